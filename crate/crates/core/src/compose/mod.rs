//! The six composition functions `f(u, v) -> w_hat` and their parameter types.
//!
//! Four are closed-form (simple addition, weighted addition, element-wise
//! multiplication, dilation); ridge regression and the MLP carry trained
//! state and live in their own submodules together with the fitting
//! procedures.

mod fit;
mod mlp;
mod ridge;

pub use fit::{
    fit_gradient_descent, fit_grid_search, FitKind, FittedParams, GradientDescentOutcome, Grid,
    GridSearchOutcome,
};
pub use mlp::{mlp_fit, mlp_predict, mlp_train, MlpModel, MlpTraining};
pub use ridge::{ridge_fit, ridge_predict, RidgeModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Weights of the weighted-addition model `alpha*u + beta*v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedAddParams {
    pub alpha: f64,
    pub beta: f64,
}

impl WeightedAddParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Parameter(format!(
                "weighted-add weights must be finite, got ({alpha}, {beta})"
            )));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(Error::Parameter(
                "weighted-add weights must not both be zero".into(),
            ));
        }
        Ok(Self { alpha, beta })
    }
}

/// Dilation strength; `lambda = 1` collapses the model to `(u.u) v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationParams {
    pub lambda: f64,
}

impl DilationParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Parameter(format!(
                "dilation lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }
}

/// Loss used by the fitting procedures. Only one is defined: the mean of
/// `1 - cosine(f(u,v), w)` over the training pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    OneMinusCosine,
}

/// Hyperparameters shared by the trained composers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub epochs: usize,
    pub step_size: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            step_size: 1e-3,
            batch_size: 64,
            seed: 42,
            loss: LossKind::OneMinusCosine,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Parameter("epochs must be >= 1".into()));
        }
        if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::Parameter("step_size must be > 0".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Parameter("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One training pair: constituent embeddings and the observed compound embedding.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub u: Vector,
    pub v: Vector,
    pub w: Vector,
}

pub fn compose_simple_add(u: &Vector, v: &Vector) -> Result<Vector> {
    u.check_same_dim(v)?;
    let values = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(a, b)| a + b)
        .collect();
    Vector::new(values)
}

pub fn compose_weighted_add(u: &Vector, v: &Vector, p: &WeightedAddParams) -> Result<Vector> {
    u.check_same_dim(v)?;
    if !p.alpha.is_finite() || !p.beta.is_finite() {
        return Err(Error::Parameter("weighted-add weights must be finite".into()));
    }
    let values = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(a, b)| p.alpha * a + p.beta * b)
        .collect();
    Vector::new(values)
}

pub fn compose_multiplicative(u: &Vector, v: &Vector) -> Result<Vector> {
    u.check_same_dim(v)?;
    let values = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(a, b)| a * b)
        .collect();
    Vector::new(values)
}

/// `(u.u) v + (lambda - 1)(u.v) u`
pub fn compose_dilation(u: &Vector, v: &Vector, p: &DilationParams) -> Result<Vector> {
    u.check_same_dim(v)?;
    let uu = u.dot(u);
    let uv = u.dot(v);
    let c = (p.lambda - 1.0) * uv;
    let values = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(ui, vi)| uu * vi + c * ui)
        .collect();
    Vector::new(values)
}

/// Anything that predicts a compound embedding from two constituent embeddings.
pub trait Composer {
    fn name(&self) -> String;
    fn compose(&self, u: &Vector, v: &Vector) -> Result<Vector>;
}

/// Tagged union of the six composition models.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompositionModel {
    SimpleAdd,
    WeightedAdd { params: WeightedAddParams },
    Multiplicative,
    Dilation { params: DilationParams },
    Ridge {
        #[serde(rename = "params")]
        model: RidgeModel,
    },
    Mlp {
        #[serde(rename = "params")]
        model: MlpModel,
    },
}

impl CompositionModel {
    /// Embedding dimension the model was trained for, if it carries one.
    pub fn trained_dim(&self) -> Option<usize> {
        match self {
            CompositionModel::Ridge { model } => Some(model.trained_dim()),
            CompositionModel::Mlp { model } => Some(model.output_dim()),
            _ => None,
        }
    }
}

impl Composer for CompositionModel {
    fn name(&self) -> String {
        match self {
            CompositionModel::SimpleAdd => "simple_add".into(),
            CompositionModel::WeightedAdd { .. } => "weighted_add".into(),
            CompositionModel::Multiplicative => "multiplicative".into(),
            CompositionModel::Dilation { .. } => "dilation".into(),
            CompositionModel::Ridge { .. } => "ridge".into(),
            CompositionModel::Mlp { .. } => "mlp".into(),
        }
    }

    fn compose(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        match self {
            CompositionModel::SimpleAdd => compose_simple_add(u, v),
            CompositionModel::WeightedAdd { params } => compose_weighted_add(u, v, params),
            CompositionModel::Multiplicative => compose_multiplicative(u, v),
            CompositionModel::Dilation { params } => compose_dilation(u, v, params),
            CompositionModel::Ridge { model } => ridge_predict(model, u, v),
            CompositionModel::Mlp { model } => mlp_predict(model, u, v),
        }
    }
}

/// Versioned on-disk form of a fitted model:
/// `{version, kind, dim, params, fit_config, data_fingerprint}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub dim: usize,
    #[serde(flatten)]
    pub model: CompositionModel,
    pub fit_config: Option<FitConfig>,
    pub data_fingerprint: Option<String>,
}

impl ModelDocument {
    pub const CURRENT_VERSION: u32 = 1;

    pub fn new(
        dim: usize,
        model: CompositionModel,
        fit_config: Option<FitConfig>,
        data_fingerprint: Option<String>,
    ) -> Self {
        Self {
            version: Self::CURRENT_VERSION,
            dim,
            model,
            fit_config,
            data_fingerprint,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("model serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("model document parse failed: {e}")))?;
        if doc.version != Self::CURRENT_VERSION {
            return Err(Error::Schema(format!(
                "model document version {} not supported (expected {})",
                doc.version,
                Self::CURRENT_VERSION
            )));
        }
        Ok(doc)
    }
}
