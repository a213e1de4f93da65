//! Closed-form ridge regression of compound embeddings against the
//! concatenation of the constituent embeddings.
//!
//! The weight matrix minimizes `sum ||W [u;v] - w||^2 + reg * ||W||_F^2`,
//! solved through the normal equations `(X'X + reg I) W' = X'Y` with a
//! Cholesky factorization of the regularized Gram matrix.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::TrainingPair;

/// A trained linear map from concatenated constituents to the compound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeModel {
    /// Shape `d x 2d`.
    weight_matrix: Array2<f64>,
    regularization: f64,
    trained_dim: usize,
}

impl RidgeModel {
    pub fn from_weights(weight_matrix: Array2<f64>, regularization: f64) -> Result<Self> {
        // predict reads rows as slices, so force row-major storage
        let weight_matrix = weight_matrix.as_standard_layout().into_owned();
        let (rows, cols) = weight_matrix.dim();
        if rows == 0 || cols != 2 * rows {
            return Err(Error::Shape(format!(
                "ridge weight matrix must be d x 2d, got {rows} x {cols}"
            )));
        }
        if regularization < 0.0 || !regularization.is_finite() {
            return Err(Error::Parameter(
                "regularization must be a finite non-negative real".into(),
            ));
        }
        if weight_matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("ridge weights must be finite".into()));
        }
        Ok(Self {
            weight_matrix,
            regularization,
            trained_dim: rows,
        })
    }

    pub fn weight_matrix(&self) -> &Array2<f64> {
        &self.weight_matrix
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn trained_dim(&self) -> usize {
        self.trained_dim
    }
}

/// Fit the ridge map on `(u, v, w)` triples. Deterministic closed form.
pub fn ridge_fit(pairs: &[TrainingPair], regularization: f64) -> Result<RidgeModel> {
    if pairs.is_empty() {
        return Err(Error::Usage("ridge_fit requires training examples".into()));
    }
    if pairs.len() < 2 {
        return Err(Error::Usage("ridge_fit requires at least 2 examples".into()));
    }
    if regularization < 0.0 || !regularization.is_finite() {
        return Err(Error::Parameter(
            "regularization must be a finite non-negative real".into(),
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

    let n = pairs.len();
    let m = 2 * d;
    let mut x = Array2::<f64>::zeros((n, m));
    let mut y = Array2::<f64>::zeros((n, d));
    for (i, p) in pairs.iter().enumerate() {
        for j in 0..d {
            x[(i, j)] = p.u[j];
            x[(i, d + j)] = p.v[j];
            y[(i, j)] = p.w[j];
        }
    }

    // Normal equations: G = X'X + reg I, B = X'Y, solve G W' = B.
    let mut gram = x.t().dot(&x);
    for j in 0..m {
        gram[(j, j)] += regularization;
    }
    let rhs = x.t().dot(&y);

    let chol = cholesky(&gram).map_err(|diag| {
        Error::Numerical(format!(
            "normal equations are ill-conditioned (regularization = {regularization}): {diag}"
        ))
    })?;
    let wt = cholesky_solve_multi(&chol, &rhs);
    let weight_matrix = wt.t().as_standard_layout().into_owned();

    if weight_matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "ridge solve produced non-finite weights".into(),
        ));
    }

    Ok(RidgeModel {
        weight_matrix,
        regularization,
        trained_dim: d,
    })
}

/// `W [u; v]`, computed with plain row-major loops.
pub fn ridge_predict(model: &RidgeModel, u: &Vector, v: &Vector) -> Result<Vector> {
    u.check_same_dim(v)?;
    let d = model.trained_dim;
    if u.dim() != d {
        return Err(Error::Shape(format!(
            "input dimension {} does not match trained dimension {d}",
            u.dim()
        )));
    }
    let mut out = vec![0.0; d];
    let us = u.as_slice();
    let vs = v.as_slice();
    for i in 0..d {
        let row = self::row(&model.weight_matrix, i);
        let mut acc = 0.0;
        for j in 0..d {
            acc += row[j] * us[j];
        }
        for j in 0..d {
            acc += row[d + j] * vs[j];
        }
        out[i] = acc;
    }
    Vector::new(out)
}

fn row(a: &Array2<f64>, i: usize) -> &[f64] {
    a.row(i).to_slice().expect("weight matrix is row-major")
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Fails with a condition diagnostic when a pivot collapses.
fn cholesky(a: &Array2<f64>) -> std::result::Result<Array2<f64>, String> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
    let pivot_floor = max_diag * 1e-13 * n as f64;
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag.is_nan() || diag <= pivot_floor {
            return Err(format!(
                "pivot {diag:.3e} at column {j} below floor {pivot_floor:.3e} \
                 (max diagonal {max_diag:.3e}); the Gram matrix is numerically singular"
            ));
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve `L L' X = B` column by column.
fn cholesky_solve_multi(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let k = b.ncols();
    let mut x = Array2::<f64>::zeros((n, k));
    let mut z = Array1::<f64>::zeros(n);
    for c in 0..k {
        // forward: L z = b
        for i in 0..n {
            let mut s = b[(i, c)];
            for j in 0..i {
                s -= l[(i, j)] * z[j];
            }
            z[i] = s / l[(i, i)];
        }
        // backward: L' x = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= l[(j, i)] * x[(j, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}
