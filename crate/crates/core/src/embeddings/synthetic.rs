//! Deterministic synthetic embeddings, for desk-scale verification of the
//! whole pipeline without any provider access.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::{normalize_text, EmbeddingSource};

/// How the generator treats texts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticMode {
    /// Every text maps to an independent unit-normalized Gaussian vector.
    Random,
    /// Registered compounds are built from their constituents:
    /// `normalize(w1 * e(c1) + w2 * e(c2))` plus Gaussian noise of expected
    /// norm `sigma`, re-normalized. Unregistered texts fall back to random.
    Compositional { w1: f64, w2: f64, sigma: f64 },
}

/// Unit-normalized Gaussian vector keyed by `hash(seed, text)`; a pure
/// function of `(seed, text, dim)`.
pub fn synthetic_embed(text: &str, dim: usize, seed: u64) -> Result<Vector> {
    if dim < 2 {
        return Err(Error::Parameter("synthetic embeddings need dim >= 2".into()));
    }
    let normalized = normalize_text(text);
    Ok(keyed_gaussian(&normalized, dim, seed, "embed"))
}

fn keyed_gaussian(normalized_text: &str, dim: usize, seed: u64, salt: &str) -> Vector {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(salt.as_bytes());
    hasher.update([0u8]);
    hasher.update(normalized_text.as_bytes());
    let digest = hasher.finalize();
    let mut rng_seed = [0u8; 32];
    rng_seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(rng_seed);
    let values: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    Vector::new(values).expect("gaussian draw is finite").normalized()
}

/// The deterministic generator as an embedding source.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    name: String,
    dim: usize,
    seed: u64,
    mode: SyntheticMode,
    /// normalized compound text -> (c1, c2)
    compounds: BTreeMap<String, (String, String)>,
}

impl SyntheticSource {
    pub fn new(name: impl Into<String>, dim: usize, seed: u64, mode: SyntheticMode) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter("synthetic embeddings need dim >= 2".into()));
        }
        if let SyntheticMode::Compositional { w1, w2, sigma } = mode {
            if !w1.is_finite() || !w2.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                return Err(Error::Parameter(
                    "compositional mode needs finite weights and sigma >= 0".into(),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            seed,
            mode,
            compounds: BTreeMap::new(),
        })
    }

    /// Register a compound so compositional mode knows its constituents.
    pub fn register_compound(&mut self, compound: &str, c1: &str, c2: &str) {
        self.compounds.insert(
            normalize_text(compound),
            (normalize_text(c1), normalize_text(c2)),
        );
    }

    pub fn embed_one(&self, text: &str) -> Vector {
        let normalized = normalize_text(text);
        match self.mode {
            SyntheticMode::Random => keyed_gaussian(&normalized, self.dim, self.seed, "embed"),
            SyntheticMode::Compositional { w1, w2, sigma } => {
                let Some((c1, c2)) = self.compounds.get(&normalized) else {
                    return keyed_gaussian(&normalized, self.dim, self.seed, "embed");
                };
                let u = keyed_gaussian(c1, self.dim, self.seed, "embed");
                let v = keyed_gaussian(c2, self.dim, self.seed, "embed");
                let mixed: Vec<f64> = u
                    .as_slice()
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| w1 * a + w2 * b)
                    .collect();
                let mut composed = Vector::new(mixed)
                    .expect("finite mix")
                    .normalized();
                if sigma > 0.0 {
                    // a unit Gaussian direction scaled by sigma, so the noise
                    // norm is sigma regardless of dimension
                    let noise = keyed_gaussian(&normalized, self.dim, self.seed, "noise");
                    let values: Vec<f64> = composed
                        .as_slice()
                        .iter()
                        .zip(noise.as_slice())
                        .map(|(c, n)| c + sigma * n)
                        .collect();
                    composed = Vector::new(values).expect("finite").normalized();
                }
                composed
            }
        }
    }
}

impl EmbeddingSource for SyntheticSource {
    fn name(&self) -> &str {
        &self.name
    }
    fn model_id(&self) -> &str {
        "synthetic"
    }
    fn expected_dim(&self) -> usize {
        self.dim
    }
    fn fetch(&self, texts: &[String]) -> Result<Vec<Vector>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
