//! Feed-forward network mapping `[u; v]` to a predicted compound embedding.
//!
//! Two rectifier hidden layers (256 and 128 units), identity output, trained
//! with mini-batch gradient descent using adaptive per-parameter moment
//! estimates on the mean `1 - cosine` loss.

use ndarray::{Array1, Array2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

use super::{FitConfig, TrainingPair};

const HIDDEN: [usize; 2] = [256, 128];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    /// Shape `out x in`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

impl MlpModel {
    /// Seeded He-style initialization for embedding dimension `dim`.
    pub fn seeded(dim: usize, seed: u64) -> Self {
        let sizes = [2 * dim, HIDDEN[0], HIDDEN[1], dim];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|io| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let std = (2.0 / fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * std
                });
                Layer {
                    weights,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// `[2d, 256, 128, d]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].weights.ncols()];
        sizes.extend(self.layers.iter().map(|l| l.weights.nrows()));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").weights.nrows()
    }

    /// Single-input forward pass: rectifier on hidden layers, identity output.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input length {} does not match first layer width {}",
                input.len(),
                self.input_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut activation = input.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.weights.nrows()];
            for (i, out) in next.iter_mut().enumerate() {
                let mut acc = layer.bias[i];
                let row = layer.weights.row(i);
                let row = row.to_slice().expect("row-major weights");
                for (w, a) in row.iter().zip(&activation) {
                    acc += w * a;
                }
                *out = if li < last { acc.max(0.0) } else { acc };
            }
            activation = next;
        }
        Ok(activation)
    }

    /// Parameters flattened in layer order (weights row-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        let mut it = params.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = *it.next().ok_or_else(|| {
                    Error::Shape("flat parameter vector too short".into())
                })?;
            }
            for b in l.bias.iter_mut() {
                *b = *it
                    .next()
                    .ok_or_else(|| Error::Shape("flat parameter vector too short".into()))?;
            }
        }
        if it.next().is_some() {
            return Err(Error::Shape("flat parameter vector too long".into()));
        }
        Ok(())
    }

    /// Mean `1 - cosine` loss and its analytic gradient over `pairs`,
    /// flattened in the same order as [`flat_params`](Self::flat_params).
    pub fn loss_and_flat_gradient(&self, pairs: &[TrainingPair]) -> Result<(f64, Vec<f64>)> {
        let (inputs, targets) = batch_matrices(self, pairs)?;
        let (loss, grads) = loss_and_gradients(self, &inputs, &targets);
        let mut flat = Vec::new();
        for g in &grads {
            flat.extend(g.weights.iter());
            flat.extend(g.bias.iter());
        }
        Ok((loss, flat))
    }
}

/// Feed `[u; v]` through the network.
pub fn mlp_predict(model: &MlpModel, u: &Vector, v: &Vector) -> Result<Vector> {
    u.check_same_dim(v)?;
    let x = u.concat(v);
    let out = model.forward(x.as_slice())?;
    Vector::new(out)
}

/// Everything `mlp_train` produces: the model, the held-out score and the
/// per-epoch mean training loss trace.
#[derive(Debug, Clone)]
pub struct MlpTraining {
    pub model: MlpModel,
    pub held_out_mean_cosine: f64,
    pub epoch_losses: Vec<f64>,
}

/// Train a fresh seeded model on every supplied pair by mini-batch gradient
/// descent with adaptive moments. Returns the model and the per-epoch mean
/// training loss. `config.epochs == 0` returns the seeded initialization.
pub fn mlp_fit(pairs: &[TrainingPair], config: &FitConfig) -> Result<(MlpModel, Vec<f64>)> {
    if pairs.is_empty() {
        return Err(Error::Usage("mlp_fit needs training pairs".into()));
    }
    if !config.step_size.is_finite() || config.step_size <= 0.0 {
        return Err(Error::Parameter("step_size must be > 0".into()));
    }
    if config.batch_size < 1 {
        return Err(Error::Parameter("batch_size must be >= 1".into()));
    }
    let dim = pairs[0].u.dim();
    for (i, p) in pairs.iter().enumerate() {
        if p.u.dim() != dim || p.v.dim() != dim || p.w.dim() != dim {
            return Err(Error::Shape(format!(
                "training example {i} does not have uniform dimension {dim}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::seeded(dim, config.seed);
    let mut optimizer = Adam::new(&model, config.step_size);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..pairs.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&TrainingPair> = chunk.iter().map(|&i| &pairs[i]).collect();
            let (inputs, targets) = batch_matrices_ref(&model, &batch)?;
            let (loss, grads) = loss_and_gradients(&model, &inputs, &targets);
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "training diverged (non-finite loss) at epoch {epoch}"
                )));
            }
            epoch_loss += loss * batch.len() as f64;
            seen += batch.len();
            optimizer.step(&mut model, &grads);
        }
        epoch_losses.push(epoch_loss / seen as f64);
        if model.flat_params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Training(format!(
                "training diverged (non-finite parameters) at epoch {epoch}"
            )));
        }
    }
    Ok((model, epoch_losses))
}

/// Train on a deterministic `split` fraction of `pairs` (seeded by
/// `config.seed`) and score mean cosine on the held-out remainder.
/// `config.epochs == 0` skips training and scores the seeded initialization.
pub fn mlp_train(pairs: &[TrainingPair], config: &FitConfig, split: f64) -> Result<MlpTraining> {
    if pairs.len() < 10 {
        return Err(Error::Usage(format!(
            "mlp_train requires at least 10 examples, got {}",
            pairs.len()
        )));
    }
    if !split.is_finite() || split <= 0.0 || split >= 1.0 {
        return Err(Error::Parameter("split must lie in (0, 1)".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut indices: Vec<usize> = (0..pairs.len()).collect();
    indices.shuffle(&mut rng);
    let n_train = ((pairs.len() as f64 * split).round() as usize).clamp(1, pairs.len() - 1);
    let (train_idx, test_idx) = indices.split_at(n_train);
    let train: Vec<TrainingPair> = train_idx.iter().map(|&i| pairs[i].clone()).collect();
    let test: Vec<&TrainingPair> = test_idx.iter().map(|&i| &pairs[i]).collect();

    let (model, epoch_losses) = mlp_fit(&train, config)?;
    let held_out_mean_cosine = mean_cosine(&model, &test)?;
    Ok(MlpTraining {
        model,
        held_out_mean_cosine,
        epoch_losses,
    })
}

fn mean_cosine(model: &MlpModel, pairs: &[&TrainingPair]) -> Result<f64> {
    let mut total = 0.0;
    for p in pairs {
        let pred = model.forward(p.u.concat(&p.v).as_slice())?;
        total += cosine_raw(&pred, p.w.as_slice());
    }
    Ok(total / pairs.len() as f64)
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

fn batch_matrices(model: &MlpModel, pairs: &[TrainingPair]) -> Result<(Array2<f64>, Array2<f64>)> {
    let refs: Vec<&TrainingPair> = pairs.iter().collect();
    batch_matrices_ref(model, &refs)
}

fn batch_matrices_ref(
    model: &MlpModel,
    batch: &[&TrainingPair],
) -> Result<(Array2<f64>, Array2<f64>)> {
    let d_in = model.input_dim();
    let d_out = model.output_dim();
    let mut inputs = Array2::<f64>::zeros((batch.len(), d_in));
    let mut targets = Array2::<f64>::zeros((batch.len(), d_out));
    for (r, p) in batch.iter().enumerate() {
        let x = p.u.concat(&p.v);
        if x.dim() != d_in || p.w.dim() != d_out {
            return Err(Error::Shape("batch row does not conform to model".into()));
        }
        for (c, val) in x.as_slice().iter().enumerate() {
            inputs[(r, c)] = *val;
        }
        for (c, val) in p.w.as_slice().iter().enumerate() {
            targets[(r, c)] = *val;
        }
    }
    Ok((inputs, targets))
}

/// Batched forward + backward pass; returns the mean loss and per-layer grads.
fn loss_and_gradients(
    model: &MlpModel,
    inputs: &Array2<f64>,
    targets: &Array2<f64>,
) -> (f64, Vec<Layer>) {
    let n = inputs.nrows();
    let last = model.layers.len() - 1;

    // forward, keeping activations (a[0] = inputs) and pre-activations
    let mut activations: Vec<Array2<f64>> = vec![inputs.clone()];
    let mut pre_acts: Vec<Array2<f64>> = Vec::with_capacity(model.layers.len());
    for (li, layer) in model.layers.iter().enumerate() {
        let z = activations[li].dot(&layer.weights.t()) + &layer.bias;
        let a = if li < last { z.mapv(|x| x.max(0.0)) } else { z.clone() };
        pre_acts.push(z);
        activations.push(a);
    }
    let outputs = &activations[model.layers.len()];

    // loss and dL/dy per row
    let mut loss = 0.0;
    let mut delta = Array2::<f64>::zeros(outputs.raw_dim());
    for r in 0..n {
        let y = outputs.row(r);
        let w = targets.row(r);
        let (mut yw, mut yy, mut ww) = (0.0, 0.0, 0.0);
        for (a, b) in y.iter().zip(w.iter()) {
            yw += a * b;
            yy += a * a;
            ww += b * b;
        }
        if yy == 0.0 || ww == 0.0 {
            loss += 1.0; // cosine defined as 0 for a zero vector; gradient is left at 0
            continue;
        }
        let (ny, nw) = (yy.sqrt(), ww.sqrt());
        let c = yw / (ny * nw);
        loss += 1.0 - c;
        let scale = 1.0 / n as f64;
        for (j, (a, b)) in y.iter().zip(w.iter()).enumerate() {
            // dL/dy_j = -(w_j/(|y||w|) - c*y_j/|y|^2)
            delta[(r, j)] = -(b / (ny * nw) - c * a / yy) * scale;
        }
    }
    loss /= n as f64;

    // backward
    let mut grads: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer {
            weights: Array2::zeros(l.weights.raw_dim()),
            bias: Array1::zeros(l.bias.raw_dim()),
        })
        .collect();
    let mut d = delta;
    for li in (0..model.layers.len()).rev() {
        if li < last {
            // rectifier mask for hidden layers
            d.zip_mut_with(&pre_acts[li], |g, &z| {
                if z <= 0.0 {
                    *g = 0.0;
                }
            });
        }
        grads[li].weights = d.t().dot(&activations[li]);
        grads[li].bias = d.sum_axis(Axis(0));
        if li > 0 {
            d = d.dot(&model.layers[li].weights);
        }
    }
    (loss, grads)
}

/// Adaptive moment estimation over the layer-shaped parameter set.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Layer>,
    v: Vec<Layer>,
}

impl Adam {
    fn new(model: &MlpModel, lr: f64) -> Self {
        let zeros = || -> Vec<Layer> {
            model
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect()
        };
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &[Layer]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let g = &grads[li];
            update(
                layer.weights.iter_mut(),
                self.m[li].weights.iter_mut(),
                self.v[li].weights.iter_mut(),
                g.weights.iter(),
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
            update(
                layer.bias.iter_mut(),
                self.m[li].bias.iter_mut(),
                self.v[li].bias.iter_mut(),
                g.bias.iter(),
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update<'a>(
    params: impl Iterator<Item = &'a mut f64>,
    ms: impl Iterator<Item = &'a mut f64>,
    vs: impl Iterator<Item = &'a mut f64>,
    gs: impl Iterator<Item = &'a f64>,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for (((p, m), v), g) in params.zip(ms).zip(vs).zip(gs) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let mhat = *m / bc1;
        let vhat = *v / bc2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    }
}
