//! Gaussian kernel density estimation on a fixed similarity grid, and
//! Jensen-Shannon divergence between two estimated curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SimilarityDistribution;

/// Number of evaluation points on every KDE grid.
pub const KDE_GRID_POINTS: usize = 1024;

/// Bandwidth floor; also the fallback when all samples coincide.
const BANDWIDTH_FLOOR: f64 = 1e-3;

/// Density floor applied before the divergence computation.
const DENSITY_FLOOR: f64 = 1e-12;

/// A density curve over `[-1 - 3h, 1 + 3h]`, trapezoid-normalized to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KdeCurve {
    pub label: String,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// Grid location of the highest density value.
    pub fn mode(&self) -> f64 {
        let (idx, _) = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        self.grid[idx]
    }
}

fn trapezoid(grid: &[f64], density: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    }
    acc
}

/// Scott's-rule default bandwidth for a sample set: `std * n^(-1/5)`,
/// floored so that identical samples still produce a usable curve.
pub(crate) fn scott_bandwidth(dist: &SimilarityDistribution) -> f64 {
    let h = dist.std() * (dist.count() as f64).powf(-0.2);
    h.max(BANDWIDTH_FLOOR)
}

/// Gaussian-kernel KDE of a similarity distribution.
///
/// The grid has [`KDE_GRID_POINTS`] evenly spaced points spanning
/// `[-1 - 3h, 1 + 3h]`; the returned density is renormalized so its
/// trapezoidal integral is exactly 1.
pub fn kde_estimate(dist: &SimilarityDistribution, bandwidth: Option<f64>) -> Result<KdeCurve> {
    let h = match bandwidth {
        Some(b) => {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::Parameter(format!(
                    "bandwidth must be a positive real, got {b}"
                )));
            }
            b
        }
        None => scott_bandwidth(dist),
    };

    let lo = -1.0 - 3.0 * h;
    let hi = 1.0 + 3.0 * h;
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..KDE_GRID_POINTS).map(|i| lo + i as f64 * step).collect();

    let n = dist.count() as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &s in dist.samples() {
                let z = (x - s) / h;
                acc += (-0.5 * z * z).exp();
            }
            acc * norm
        })
        .collect();

    let integral = trapezoid(&grid, &density);
    if !integral.is_finite() || integral <= 0.0 {
        return Err(Error::Numerical(
            "kde density integrated to zero; bandwidth too small for the grid".into(),
        ));
    }
    for d in &mut density {
        *d /= integral;
    }

    Ok(KdeCurve {
        label: dist.label().to_string(),
        grid,
        density,
        bandwidth: h,
    })
}

/// Jensen-Shannon divergence (base-2 logs, so the result lies in `[0, 1]`)
/// between two curves sharing a grid. Exactly symmetric in its arguments.
pub fn js_divergence(p: &KdeCurve, q: &KdeCurve) -> Result<f64> {
    if p.grid.len() != q.grid.len() || p.grid.iter().zip(&q.grid).any(|(a, b)| a != b) {
        return Err(Error::Usage(
            "js_divergence requires both curves on the same grid".into(),
        ));
    }

    let discretize = |density: &[f64]| -> Vec<f64> {
        let sum: f64 = density.iter().sum();
        density
            .iter()
            .map(|d| (d / sum).max(DENSITY_FLOOR))
            .collect()
    };
    let pd = discretize(&p.density);
    let qd = discretize(&q.density);

    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for (a, b) in pd.iter().zip(&qd) {
        let m = 0.5 * (a + b);
        kl_p += a * (a / m).log2();
        kl_q += b * (b / m).log2();
    }
    Ok((0.5 * kl_p + 0.5 * kl_q).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Normal;

    fn dist(samples: Vec<f64>) -> SimilarityDistribution {
        SimilarityDistribution::new(samples, "test").unwrap()
    }

    #[test]
    fn single_sample_peaks_at_the_sample() {
        let curve = kde_estimate(&dist(vec![0.5]), None).unwrap();
        assert_eq!(curve.bandwidth, 1e-3); // floor kicks in for zero spread
        let mode = curve.mode();
        let grid_step = curve.grid[1] - curve.grid[0];
        assert!((mode - 0.5).abs() <= grid_step);
    }

    #[test]
    fn integral_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1usize, 3, 100, 5000] {
            let samples: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let curve = kde_estimate(&dist(samples), None).unwrap();
            assert!((curve.integral() - 1.0).abs() <= 1e-3);
            assert!(curve.density.iter().all(|d| *d >= 0.0));
            assert_eq!(curve.grid.len(), KDE_GRID_POINTS);
        }
    }

    #[test]
    fn identical_samples_fall_back_to_floor_bandwidth() {
        let curve = kde_estimate(&dist(vec![0.25; 40]), None).unwrap();
        assert_eq!(curve.bandwidth, 1e-3);
        assert!((curve.integral() - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn mode_recovers_a_known_mixture() {
        // 0.7 of the mass at 0.6, 0.3 at -0.4: the dominant mode is 0.6.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let main = Normal::new(0.6, 0.05).unwrap();
        let other = Normal::new(-0.4, 0.05).unwrap();
        let samples: Vec<f64> = (0..10_000)
            .map(|i| {
                let d = if i % 10 < 7 { main } else { other };
                rng.sample::<f64, _>(d).clamp(-1.0, 1.0)
            })
            .collect();
        let curve = kde_estimate(&dist(samples), None).unwrap();
        assert!(
            (curve.mode() - 0.6).abs() <= 0.02,
            "mode {} not near 0.6",
            curve.mode()
        );
    }

    #[test]
    fn js_of_identical_curves_is_zero() {
        let curve = kde_estimate(&dist(vec![0.1, 0.4, -0.2]), None).unwrap();
        let js = js_divergence(&curve, &curve).unwrap();
        assert!(js.abs() <= 1e-9);
    }

    #[test]
    fn js_of_separated_narrow_curves_saturates() {
        let p = kde_estimate(&dist(vec![-0.5; 100]), Some(0.01)).unwrap();
        let q = kde_estimate(&dist(vec![0.9; 100]), Some(0.01)).unwrap();
        let js = js_divergence(&p, &q).unwrap();
        assert!(js >= 0.99, "js {js} below 0.99");
        assert!(js <= 1.0);
    }

    #[test]
    fn js_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let a: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = kde_estimate(&dist(a), Some(0.05)).unwrap();
            let q = kde_estimate(&dist(b), Some(0.05)).unwrap();
            let pq = js_divergence(&p, &q).unwrap();
            let qp = js_divergence(&q, &p).unwrap();
            assert_eq!(pq.to_bits(), qp.to_bits());
            assert!((0.0..=1.0).contains(&pq));
        }
    }

    #[test]
    fn js_rejects_mismatched_grids() {
        let p = kde_estimate(&dist(vec![0.0; 10]), Some(0.01)).unwrap();
        let q = kde_estimate(&dist(vec![0.0; 10]), Some(0.02)).unwrap();
        assert!(matches!(js_divergence(&p, &q), Err(Error::Usage(_))));
    }
}
