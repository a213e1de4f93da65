//! Scores one composer against a corpus of embedded compound records.

use serde::{Deserialize, Serialize};

use crate::compose::Composer;
use crate::error::{Error, Result};
use crate::vector::Vector;

use super::kde::{js_divergence, kde_estimate, scott_bandwidth, KdeCurve};
use super::{cosine_with_flag, SimilarityDistribution};

/// A compound record together with whatever embeddings could be resolved.
#[derive(Debug, Clone)]
pub struct EmbeddedRecord {
    pub compound: String,
    pub c1: String,
    pub c2: String,
    pub u: Option<Vector>,
    pub v: Option<Vector>,
    pub w: Option<Vector>,
}

/// Per-record similarity between prediction and observed embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordScore {
    pub compound: String,
    pub cosine: f64,
    /// True when a zero-norm vector forced the defined-as-zero cosine.
    pub degenerate: bool,
}

/// One (source x composer) evaluation: the report entry plus the retained
/// per-record scores the analysis module consumes.
#[derive(Debug, Clone)]
pub struct ModelEvaluation {
    pub composer: String,
    pub mean_cosine: f64,
    pub js_divergence: f64,
    pub kde: KdeCurve,
    pub n_records: usize,
    pub n_skipped: usize,
    pub n_degenerate: usize,
    /// Mean cosine fell below the baseline mean.
    pub non_compositional: bool,
    pub per_record: Vec<RecordScore>,
}

/// Maximum tolerated fraction of records with missing embeddings.
const MAX_SKIP_FRACTION: f64 = 0.10;

/// Evaluate `composer` on every record with complete embeddings, scoring
/// cosine against the observed compound embedding and the distribution-level
/// divergence from `baseline`.
///
/// Records with a missing embedding are skipped and counted; more than 10%
/// skipped is an error. The KDE bandwidth defaults to Scott's rule on the
/// baseline samples so every curve in a run shares one grid.
pub fn evaluate_model<C: Composer + ?Sized>(
    composer: &C,
    records: &[EmbeddedRecord],
    baseline: &SimilarityDistribution,
    bandwidth: Option<f64>,
) -> Result<ModelEvaluation> {
    if records.is_empty() {
        return Err(Error::Usage("evaluate_model needs at least one record".into()));
    }

    let mut per_record = Vec::with_capacity(records.len());
    let mut n_skipped = 0usize;
    let mut n_degenerate = 0usize;
    for r in records {
        let (Some(u), Some(v), Some(w)) = (&r.u, &r.v, &r.w) else {
            n_skipped += 1;
            continue;
        };
        let predicted = composer.compose(u, v)?;
        let (cosine, degenerate) = cosine_with_flag(&predicted, w)?;
        if degenerate {
            n_degenerate += 1;
        }
        per_record.push(RecordScore {
            compound: r.compound.clone(),
            cosine: cosine.clamp(-1.0, 1.0),
            degenerate,
        });
    }

    if n_skipped > 0 {
        log::warn!(
            "evaluate[{}]: skipped {n_skipped} of {} records with missing embeddings",
            composer.name(),
            records.len()
        );
    }
    let skip_fraction = n_skipped as f64 / records.len() as f64;
    if skip_fraction > MAX_SKIP_FRACTION {
        return Err(Error::Integrity(format!(
            "{n_skipped} of {} records ({:.1}%) lack embeddings; limit is 10%",
            records.len(),
            100.0 * skip_fraction
        )));
    }
    if per_record.is_empty() {
        return Err(Error::Usage("no record had complete embeddings".into()));
    }

    let scores: Vec<f64> = per_record.iter().map(|r| r.cosine).collect();
    let dist = SimilarityDistribution::new(scores, composer.name())?;
    let shared_bandwidth = bandwidth.unwrap_or_else(|| scott_bandwidth(baseline));
    let kde = kde_estimate(&dist, Some(shared_bandwidth))?;
    let baseline_kde = kde_estimate(baseline, Some(shared_bandwidth))?;
    let js = js_divergence(&kde, &baseline_kde)?;

    let mean_cosine = dist.mean();
    Ok(ModelEvaluation {
        composer: composer.name(),
        mean_cosine,
        js_divergence: js,
        kde,
        n_records: per_record.len(),
        n_skipped,
        n_degenerate,
        non_compositional: mean_cosine < baseline.mean(),
        per_record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{compose_simple_add, CompositionModel};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Vector::new(v).unwrap().normalized()
    }

    /// Corpus where the compound embedding is exactly u + v, so simple
    /// addition acts as an oracle passthrough.
    fn passthrough_records(n: usize, dim: usize, seed: u64) -> Vec<EmbeddedRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let u = random_unit(&mut rng, dim);
                let v = random_unit(&mut rng, dim);
                let w = compose_simple_add(&u, &v).unwrap();
                EmbeddedRecord {
                    compound: format!("c{i}"),
                    c1: format!("a{i}"),
                    c2: format!("b{i}"),
                    u: Some(u),
                    v: Some(v),
                    w: Some(w),
                }
            })
            .collect()
    }

    fn baseline_from(records: &[EmbeddedRecord]) -> SimilarityDistribution {
        let embeddings: Vec<Vector> = records.iter().map(|r| r.w.clone().unwrap()).collect();
        super::super::baseline_distribution(&embeddings, 500, 42).unwrap()
    }

    #[test]
    fn passthrough_composer_scores_mean_cosine_one() {
        let records = passthrough_records(60, 24, 1);
        let baseline = baseline_from(&records);
        let eval =
            evaluate_model(&CompositionModel::SimpleAdd, &records, &baseline, None).unwrap();
        assert!((eval.mean_cosine - 1.0).abs() < 1e-12);
        assert_eq!(eval.n_records, 60);
        assert_eq!(eval.n_skipped, 0);
        assert!(!eval.non_compositional);
    }

    #[test]
    fn additive_corpus_separates_addition_from_multiplication() {
        // Compounds drawn from constituent pools so random compound pairs
        // occasionally share a constituent, as in a real corpus; that lifts
        // the baseline mean above the multiplication scores.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let firsts: Vec<Vector> = (0..40).map(|_| random_unit(&mut rng, 256)).collect();
        let seconds: Vec<Vector> = (0..40).map(|_| random_unit(&mut rng, 256)).collect();
        let records: Vec<EmbeddedRecord> = (0..300)
            .map(|i| {
                let fi = rng.random_range(0..firsts.len());
                let si = rng.random_range(0..seconds.len());
                let (u, v) = (firsts[fi].clone(), seconds[si].clone());
                let w: Vec<f64> = u
                    .as_slice()
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| 0.6 * a + 0.4 * b)
                    .collect();
                EmbeddedRecord {
                    compound: format!("c{i}"),
                    c1: format!("a{fi}"),
                    c2: format!("b{si}"),
                    u: Some(u),
                    v: Some(v),
                    w: Some(Vector::new(w).unwrap().normalized()),
                }
            })
            .collect();
        let baseline = baseline_from(&records);
        let add =
            evaluate_model(&CompositionModel::SimpleAdd, &records, &baseline, None).unwrap();
        let mult =
            evaluate_model(&CompositionModel::Multiplicative, &records, &baseline, None).unwrap();
        assert!(add.mean_cosine >= 0.98, "addition mean {}", add.mean_cosine);
        assert!(
            mult.mean_cosine <= baseline.mean() + 0.1,
            "multiplication mean {} vs baseline {}",
            mult.mean_cosine,
            baseline.mean()
        );
        assert!(mult.non_compositional);
        assert!(add.js_divergence > mult.js_divergence);
    }

    #[test]
    fn missing_embeddings_are_skipped_until_the_limit() {
        let mut records = passthrough_records(50, 8, 3);
        for r in records.iter_mut().take(4) {
            r.w = None;
        }
        let baseline = baseline_from(&records[4..]);
        let eval =
            evaluate_model(&CompositionModel::SimpleAdd, &records, &baseline, None).unwrap();
        assert_eq!(eval.n_skipped, 4);
        assert_eq!(eval.n_records, 46);

        for r in records.iter_mut().take(6) {
            r.w = None;
        }
        let err =
            evaluate_model(&CompositionModel::SimpleAdd, &records, &baseline, None).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn mean_cosine_is_invariant_to_positive_prediction_rescaling() {
        struct ScaledAdd(f64);
        impl Composer for ScaledAdd {
            fn name(&self) -> String {
                format!("scaled_add_{}", self.0)
            }
            fn compose(&self, u: &Vector, v: &Vector) -> crate::error::Result<Vector> {
                Ok(compose_simple_add(u, v)?.scaled(self.0))
            }
        }
        let records = passthrough_records(40, 16, 4);
        let baseline = baseline_from(&records);
        let one = evaluate_model(&ScaledAdd(1.0), &records, &baseline, None).unwrap();
        let big = evaluate_model(&ScaledAdd(273.5), &records, &baseline, None).unwrap();
        assert!((one.mean_cosine - big.mean_cosine).abs() < 1e-12);
    }
}
