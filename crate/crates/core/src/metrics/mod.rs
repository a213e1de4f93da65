//! Scoring machinery: cosine similarities, the random-pair baseline,
//! kernel density estimates and Jensen-Shannon divergence.

mod evaluate;
mod kde;

pub use evaluate::{evaluate_model, EmbeddedRecord, ModelEvaluation, RecordScore};
pub use kde::{js_divergence, kde_estimate, KdeCurve, KDE_GRID_POINTS};
pub(crate) use kde::scott_bandwidth;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// `(a.b) / (|a||b|)`, defined as 0 when either norm vanishes.
pub fn cosine_similarity(a: &Vector, b: &Vector) -> Result<f64> {
    cosine_with_flag(a, b).map(|(c, _)| c)
}

/// Cosine plus a degeneracy flag: true when a zero vector forced the
/// defined-as-zero result.
pub fn cosine_with_flag(a: &Vector, b: &Vector) -> Result<(f64, bool)> {
    a.check_same_dim(b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Ok((0.0, true));
    }
    Ok((ab / (aa.sqrt() * bb.sqrt()), false))
}

/// A labelled set of cosine-similarity samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityDistribution {
    samples: Vec<f64>,
    label: String,
}

impl SimilarityDistribution {
    const RANGE_SLACK: f64 = 1e-9;

    pub fn new(samples: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Usage(
                "a similarity distribution needs at least one sample".into(),
            ));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.is_finite() || s.abs() > 1.0 + Self::RANGE_SLACK {
                return Err(Error::Parameter(format!(
                    "sample {i} = {s} outside [-1, 1]"
                )));
            }
        }
        Ok(Self {
            samples,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation (ddof = 1); 0 for a single sample.
    pub fn std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let var = self
            .samples
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        var.sqrt()
    }
}

/// Cosine similarities between `n_pairs` uniformly sampled pairs of distinct
/// compound embeddings. Deterministic under `seed`.
pub fn baseline_distribution(
    compound_embeddings: &[Vector],
    n_pairs: usize,
    seed: u64,
) -> Result<SimilarityDistribution> {
    if compound_embeddings.len() < 2 {
        return Err(Error::Usage(
            "baseline needs at least 2 compound embeddings".into(),
        ));
    }
    if n_pairs == 0 {
        return Err(Error::Usage("n_pairs must be at least 1".into()));
    }
    let n = compound_embeddings.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (c, _) = cosine_with_flag(&compound_embeddings[i], &compound_embeddings[j])?;
        samples.push(c.clamp(-1.0, 1.0));
    }
    SimilarityDistribution::new(samples, "baseline")
}
