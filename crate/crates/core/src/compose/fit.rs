//! Parameter fitting for the weighted-addition and dilation composers:
//! full-batch gradient descent on the mean `1 - cosine` loss, and grid
//! search over fixed candidate sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::{
    compose_dilation, compose_weighted_add, DilationParams, FitConfig, TrainingPair,
    WeightedAddParams,
};

/// Which parametric composer is being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    WeightedAdd,
    Dilation,
}

/// Fitted parameters for either kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedParams {
    WeightedAdd(WeightedAddParams),
    Dilation(DilationParams),
}

impl FittedParams {
    pub fn compose(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        match self {
            FittedParams::WeightedAdd(p) => compose_weighted_add(u, v, p),
            FittedParams::Dilation(p) => compose_dilation(u, v, p),
        }
    }
}

/// Result of a gradient-descent fit, with the loss trace for auditing.
#[derive(Debug, Clone)]
pub struct GradientDescentOutcome {
    pub params: FittedParams,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epoch_losses: Vec<f64>,
}

/// Candidate parameter sets for grid search.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    WeightedAdd(Vec<(f64, f64)>),
    Dilation(Vec<f64>),
}

impl Grid {
    /// The default weighted-addition candidates.
    pub fn default_weighted_add() -> Self {
        Grid::WeightedAdd(vec![
            (0.5, 0.5),
            (0.6, 0.4),
            (0.4, 0.6),
            (0.2, 0.8),
            (0.8, 0.2),
            (0.1, 0.9),
            (0.9, 0.1),
        ])
    }

    /// Lambda from -1 to 1 in steps of 0.1.
    pub fn default_dilation() -> Self {
        Grid::Dilation((0..=20).map(|i| -1.0 + i as f64 * 0.1).collect())
    }

    /// The extended lambda grid, 1 to 40 in steps of 1.
    pub fn extended_dilation() -> Self {
        Grid::Dilation((1..=40).map(f64::from).collect())
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Grid::WeightedAdd(g) => g.is_empty(),
            Grid::Dilation(g) => g.is_empty(),
        }
    }
}

/// Winning grid point and its score.
#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub params: FittedParams,
    pub mean_cosine: f64,
}

fn cosine_raw(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

fn check_pairs(pairs: &[TrainingPair]) -> Result<usize> {
    if pairs.len() < 2 {
        return Err(Error::Usage(
            "parameter fitting requires at least 2 examples".into(),
        ));
    }
    let d = pairs[0].u.dim();
    for (i, p) in pairs.iter().enumerate() {
        if p.u.dim() != d || p.v.dim() != d || p.w.dim() != d {
            return Err(Error::Shape(format!(
                "training example {i} does not have uniform dimension {d}"
            )));
        }
    }
    Ok(d)
}

/// Mean loss and gradient for the current parameter vector
/// (length 2 for weighted add, 1 for dilation).
fn loss_and_gradient(kind: FitKind, theta: &[f64], pairs: &[TrainingPair]) -> (f64, Vec<f64>) {
    let n = pairs.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for p in pairs {
        let (y, dy_dtheta): (Vec<f64>, Vec<Vec<f64>>) = match kind {
            FitKind::WeightedAdd => {
                let (alpha, beta) = (theta[0], theta[1]);
                let y = p
                    .u
                    .as_slice()
                    .iter()
                    .zip(p.v.as_slice())
                    .map(|(a, b)| alpha * a + beta * b)
                    .collect();
                (y, vec![p.u.as_slice().to_vec(), p.v.as_slice().to_vec()])
            }
            FitKind::Dilation => {
                let lambda = theta[0];
                let uu = p.u.dot(&p.u);
                let uv = p.u.dot(&p.v);
                let c = (lambda - 1.0) * uv;
                let y = p
                    .u
                    .as_slice()
                    .iter()
                    .zip(p.v.as_slice())
                    .map(|(ui, vi)| uu * vi + c * ui)
                    .collect();
                // dy/dlambda = (u.v) u
                (y, vec![p.u.as_slice().iter().map(|ui| uv * ui).collect()])
            }
        };
        let w = p.w.as_slice();
        let (mut yw, mut yy, mut ww) = (0.0, 0.0, 0.0);
        for (a, b) in y.iter().zip(w) {
            yw += a * b;
            yy += a * a;
            ww += b * b;
        }
        if yy == 0.0 || ww == 0.0 {
            loss += 1.0 / n; // degenerate prediction contributes cosine 0
            continue;
        }
        let (ny, nw) = (yy.sqrt(), ww.sqrt());
        let cos = yw / (ny * nw);
        loss += (1.0 - cos) / n;
        // dL/dy_j = -(w_j/(|y||w|) - cos*y_j/|y|^2); chain through dy/dtheta
        for (gk, dyk) in grad.iter_mut().zip(&dy_dtheta) {
            let mut acc = 0.0;
            for ((yj, wj), dj) in y.iter().zip(w).zip(dyk) {
                acc += -(wj / (ny * nw) - cos * yj / yy) * dj;
            }
            *gk += acc / n;
        }
    }
    (loss, grad)
}

/// Full-batch gradient descent with step halving on overshoot, which keeps
/// the loss non-increasing epoch over epoch. Deterministic: no randomness
/// enters beyond the fixed initialization (alpha = beta = 0.5, lambda = 1).
/// `config.epochs == 0` returns the initialization untouched.
pub fn fit_gradient_descent(
    kind: FitKind,
    pairs: &[TrainingPair],
    config: &FitConfig,
) -> Result<GradientDescentOutcome> {
    check_pairs(pairs)?;
    if !config.step_size.is_finite() || config.step_size <= 0.0 {
        return Err(Error::Parameter("step_size must be > 0".into()));
    }

    let mut theta: Vec<f64> = match kind {
        FitKind::WeightedAdd => vec![0.5, 0.5],
        FitKind::Dilation => vec![1.0],
    };
    let (mut loss, _) = loss_and_gradient(kind, &theta, pairs);
    if !loss.is_finite() {
        return Err(Error::Training("initial loss is non-finite".into()));
    }
    let initial_loss = loss;
    let mut step = config.step_size;
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let (_, grad) = loss_and_gradient(kind, &theta, pairs);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite gradient at epoch {epoch}"
            )));
        }
        loop {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&grad)
                .map(|(t, g)| t - step * g)
                .collect();
            let (cand_loss, _) = loss_and_gradient(kind, &candidate, pairs);
            if !cand_loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}"
                )));
            }
            if cand_loss <= loss {
                theta = candidate;
                loss = cand_loss;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break; // flat to machine precision; keep current params
            }
        }
        epoch_losses.push(loss);
        // let the step recover when the landscape allows it
        step = (step * 1.1).min(config.step_size);
    }

    let params = match kind {
        FitKind::WeightedAdd => FittedParams::WeightedAdd(WeightedAddParams::new(
            theta[0], theta[1],
        )?),
        FitKind::Dilation => FittedParams::Dilation(DilationParams::new(theta[0])?),
    };
    Ok(GradientDescentOutcome {
        params,
        initial_loss,
        final_loss: loss,
        epoch_losses,
    })
}

/// Exhaustive evaluation of the grid, maximizing mean cosine between the
/// composed prediction and the observed compound. Ties keep the earliest
/// grid point.
pub fn fit_grid_search(pairs: &[TrainingPair], grid: &Grid) -> Result<GridSearchOutcome> {
    check_pairs(pairs)?;
    if grid.is_empty() {
        return Err(Error::Usage("grid search requires a non-empty grid".into()));
    }

    let mean_cos = |params: &FittedParams| -> Result<f64> {
        let mut total = 0.0;
        for p in pairs {
            let y = params.compose(&p.u, &p.v)?;
            total += cosine_raw(y.as_slice(), p.w.as_slice());
        }
        Ok(total / pairs.len() as f64)
    };

    let candidates: Vec<FittedParams> = match grid {
        Grid::WeightedAdd(g) => g
            .iter()
            .map(|&(a, b)| WeightedAddParams::new(a, b).map(FittedParams::WeightedAdd))
            .collect::<Result<_>>()?,
        Grid::Dilation(g) => g
            .iter()
            .map(|&l| DilationParams::new(l).map(FittedParams::Dilation))
            .collect::<Result<_>>()?,
    };

    let mut best: Option<GridSearchOutcome> = None;
    for params in candidates {
        let score = mean_cos(&params)?;
        let better = match &best {
            None => true,
            Some(b) => score > b.mean_cosine,
        };
        if better {
            best = Some(GridSearchOutcome {
                params,
                mean_cosine: score,
            });
        }
    }
    Ok(best.expect("non-empty grid yields a winner"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Vector::new(v).unwrap().normalized()
    }

    fn weighted_pairs(n: usize, dim: usize, w1: f64, w2: f64, seed: u64) -> Vec<TrainingPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u = random_unit(&mut rng, dim);
                let v = random_unit(&mut rng, dim);
                let w: Vec<f64> = u
                    .as_slice()
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| w1 * a + w2 * b)
                    .collect();
                TrainingPair {
                    u,
                    v,
                    w: Vector::new(w).unwrap().normalized(),
                }
            })
            .collect()
    }

    #[test]
    fn gradient_descent_recovers_weight_ratio() {
        let pairs = weighted_pairs(200, 32, 0.6, 0.4, 42);
        let config = FitConfig {
            epochs: 100,
            step_size: 0.1,
            ..FitConfig::default()
        };
        let out = fit_gradient_descent(FitKind::WeightedAdd, &pairs, &config).unwrap();
        let FittedParams::WeightedAdd(p) = out.params else {
            panic!("wrong kind")
        };
        let ratio = p.alpha / p.beta;
        assert!(
            (ratio - 1.5).abs() / 1.5 <= 0.05,
            "recovered ratio {ratio} not within 5% of 1.5"
        );
        assert!(out.final_loss <= out.initial_loss);
    }

    #[test]
    fn gradient_descent_loss_is_monotone() {
        let pairs = weighted_pairs(80, 16, 0.7, 0.3, 9);
        let config = FitConfig {
            epochs: 50,
            step_size: 0.25,
            ..FitConfig::default()
        };
        let out = fit_gradient_descent(FitKind::WeightedAdd, &pairs, &config).unwrap();
        for pair in out.epoch_losses.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15);
        }
    }

    #[test]
    fn dilation_stays_at_the_constructed_optimum() {
        // w = (u.u) v is the lambda = 1 regime, which is also the init.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pairs: Vec<TrainingPair> = (0..50)
            .map(|_| {
                let u = random_unit(&mut rng, 16);
                let v = random_unit(&mut rng, 16);
                let w = v.scaled(u.dot(&u));
                TrainingPair { u, v, w }
            })
            .collect();
        let config = FitConfig {
            epochs: 40,
            step_size: 0.1,
            ..FitConfig::default()
        };
        let out = fit_gradient_descent(FitKind::Dilation, &pairs, &config).unwrap();
        let FittedParams::Dilation(p) = out.params else {
            panic!("wrong kind")
        };
        assert!(out.final_loss <= out.initial_loss);
        assert!((p.lambda - 1.0).abs() < 0.2, "lambda drifted to {}", p.lambda);
    }

    #[test]
    fn grid_search_single_point() {
        let pairs = weighted_pairs(20, 8, 0.5, 0.5, 3);
        let grid = Grid::WeightedAdd(vec![(0.9, 0.1)]);
        let out = fit_grid_search(&pairs, &grid).unwrap();
        assert_eq!(
            out.params,
            FittedParams::WeightedAdd(WeightedAddParams::new(0.9, 0.1).unwrap())
        );
    }

    #[test]
    fn grid_search_finds_the_constructed_optimum() {
        let pairs = weighted_pairs(200, 32, 0.6, 0.4, 4);
        let out = fit_grid_search(&pairs, &Grid::default_weighted_add()).unwrap();
        assert_eq!(
            out.params,
            FittedParams::WeightedAdd(WeightedAddParams::new(0.6, 0.4).unwrap())
        );
    }

    #[test]
    fn default_dilation_grid_finds_an_in_grid_optimum() {
        // Data generated at lambda = 0.7 sits inside the default grid, so
        // the search lands on the nearest grid point.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gen = DilationParams::new(0.7).unwrap();
        let pairs: Vec<TrainingPair> = (0..300)
            .map(|_| {
                let u = random_unit(&mut rng, 32);
                let v = random_unit(&mut rng, 32);
                let w = compose_dilation(&u, &v, &gen).unwrap();
                TrainingPair { u, v, w }
            })
            .collect();
        let out = fit_grid_search(&pairs, &Grid::default_dilation()).unwrap();
        let FittedParams::Dilation(p) = out.params else {
            panic!("wrong kind")
        };
        assert!((p.lambda - 0.7).abs() < 0.05, "selected lambda {}", p.lambda);
    }

    #[test]
    fn extended_dilation_grid_saturates_at_the_edge() {
        // Data generated at lambda = 100 puts the optimum beyond the grid,
        // so the search lands on the largest available value.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen = DilationParams::new(100.0).unwrap();
        let pairs: Vec<TrainingPair> = (0..100)
            .map(|_| {
                let u = random_unit(&mut rng, 16);
                let v = random_unit(&mut rng, 16);
                let w = compose_dilation(&u, &v, &gen).unwrap();
                TrainingPair { u, v, w }
            })
            .collect();
        let out = fit_grid_search(&pairs, &Grid::extended_dilation()).unwrap();
        let FittedParams::Dilation(p) = out.params else {
            panic!("wrong kind")
        };
        assert_eq!(p.lambda, 40.0);
    }

    #[test]
    fn empty_grid_is_a_usage_error() {
        let pairs = weighted_pairs(10, 4, 0.5, 0.5, 6);
        assert!(matches!(
            fit_grid_search(&pairs, &Grid::WeightedAdd(vec![])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn grid_ties_break_by_first_occurrence() {
        // Scale-invariant cosine makes (0.6, 0.4) and (0.3, 0.2) identical.
        let pairs = weighted_pairs(50, 8, 0.6, 0.4, 7);
        let grid = Grid::WeightedAdd(vec![(0.6, 0.4), (0.3, 0.2)]);
        let out = fit_grid_search(&pairs, &grid).unwrap();
        assert_eq!(
            out.params,
            FittedParams::WeightedAdd(WeightedAddParams::new(0.6, 0.4).unwrap())
        );
    }
}
