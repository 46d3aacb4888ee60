//! Minimal feedforward regression network.
//!
//! ReLU hidden layers, identity output, trained by seeded mini-batch SGD on
//! mean-squared error. The last hidden layer's pre-activations are the
//! embedding `xi = h(x)` consumed by the copula machinery; heads re-learn the
//! hidden-plus-output stack on top of a frozen trunk's embeddings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::derive_rng;

/// Dense layer, row-major `weights[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero biases.
    fn init<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights =
            (0..in_dim * out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        Self { in_dim, out_dim, weights, biases: vec![0.0; out_dim] }
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }
}

/// Learning-rate schedule for mini-batch SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LrSchedule {
    /// Fixed step throughout.
    Constant,
    /// Multiply the step by `factor` every `every` epochs.
    StepDecay { every: usize, factor: f64 },
}

impl LrSchedule {
    fn rate(&self, base: f64, epoch: usize) -> f64 {
        match *self {
            LrSchedule::Constant => base,
            LrSchedule::StepDecay { every, factor } => {
                base * factor.powi((epoch / every.max(1)) as i32)
            }
        }
    }
}

/// Training hyper-parameters. All stochastic steps derive from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default = "default_schedule")]
    pub schedule: LrSchedule,
}

fn default_schedule() -> LrSchedule {
    LrSchedule::Constant
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 1e-2,
            batch_size: 32,
            seed: 0,
            schedule: LrSchedule::Constant,
        }
    }
}

/// Feedforward network with ReLU hidden activations and identity output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layer_widths: Vec<usize>,
    layers: Vec<DenseLayer>,
}

/// Per-epoch mean training loss.
pub type LossTrace = Vec<f64>;

impl MlpModel {
    /// Seeded initialization for the given `[input, hidden.., 1]` widths.
    pub fn init(layer_widths: &[usize], seed: u64) -> Result<Self> {
        if layer_widths.len() < 3 {
            return Err(Error::InvalidInput(
                "layer widths must include input, at least one hidden layer, and output".into(),
            ));
        }
        if layer_widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidInput("layer widths must be positive".into()));
        }
        if *layer_widths.last().unwrap() != 1 {
            return Err(Error::InvalidInput("output width must be 1".into()));
        }
        let mut rng = derive_rng(seed, "mlp-init");
        let layers = layer_widths
            .windows(2)
            .map(|w| DenseLayer::init(w[0], w[1], &mut rng))
            .collect();
        Ok(Self { layer_widths: layer_widths.to_vec(), layers })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    /// Width of the last hidden layer, i.e. the embedding dimension.
    pub fn embedding_dim(&self) -> usize {
        self.layer_widths[self.layer_widths.len() - 2]
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable layer access, for hand-built fixtures and weight surgery.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    /// Pre-activations of the last hidden layer.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let hidden_count = self.layers.len() - 1;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for (li, layer) in self.layers[..hidden_count].iter().enumerate() {
            layer.forward(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if li + 1 < hidden_count {
                relu_inplace(&mut cur);
            }
        }
        Ok(cur)
    }

    /// Output-layer evaluation on an embedding.
    pub fn predict_from_embedding(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.embedding_dim() {
            return Err(Error::DimensionMismatch { expected: self.embedding_dim(), got: xi.len() });
        }
        let mut act = xi.to_vec();
        relu_inplace(&mut act);
        let out_layer = self.layers.last().unwrap();
        let mut out = Vec::with_capacity(1);
        out_layer.forward(&act, &mut out);
        Ok(out[0])
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_from_embedding(&self.embed(x)?)
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.rows().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: MlpModel = serde_json::from_str(json)?;
        if model.layer_widths.len() < 3
            || model.layers.len() + 1 != model.layer_widths.len()
            || model
                .layers
                .iter()
                .zip(model.layer_widths.windows(2))
                .any(|(l, w)| l.in_dim != w[0] || l.out_dim != w[1] || l.weights.len() != w[0] * w[1] || l.biases.len() != w[1])
        {
            return Err(Error::Serde("inconsistent layer shapes in model file".into()));
        }
        Ok(model)
    }
}

fn relu_inplace(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Forward pass storing per-layer activations, used by backprop.
/// `activations[0]` is the input; entries after a hidden layer are
/// post-ReLU, the final entry is the raw output.
fn forward_trace(model: &MlpModel, x: &[f64]) -> Vec<Vec<f64>> {
    let n_layers = model.layers.len();
    let mut acts = Vec::with_capacity(n_layers + 1);
    acts.push(x.to_vec());
    let mut cur = x.to_vec();
    let mut next = Vec::new();
    for (li, layer) in model.layers.iter().enumerate() {
        layer.forward(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if li + 1 < n_layers {
            relu_inplace(&mut cur);
        }
        acts.push(cur.clone());
    }
    acts
}

/// Accumulates MSE gradients for one sample into `grads` (same shapes as the
/// model's layers). Returns the squared error.
fn backprop_accumulate(
    model: &MlpModel,
    x: &[f64],
    y: f64,
    scale: f64,
    grads: &mut [DenseLayer],
) -> f64 {
    let acts = forward_trace(model, x);
    let n_layers = model.layers.len();
    let pred = acts[n_layers][0];
    let err = pred - y;

    // dL/d(pre-activation of output) for L = (pred - y)^2 * scale.
    let mut delta = vec![2.0 * err * scale];
    for li in (0..n_layers).rev() {
        let layer = &model.layers[li];
        let input = &acts[li];
        let g = &mut grads[li];
        for o in 0..layer.out_dim {
            g.biases[o] += delta[o];
            let row = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (gw, xi) in row.iter_mut().zip(input) {
                *gw += delta[o] * xi;
            }
        }
        if li == 0 {
            break;
        }
        // Gradient w.r.t. this layer's input = previous post-ReLU activation.
        let mut prev_delta = vec![0.0; layer.in_dim];
        for o in 0..layer.out_dim {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (pd, w) in prev_delta.iter_mut().zip(row) {
                *pd += delta[o] * w;
            }
        }
        // Through the ReLU: the stored activation is post-ReLU.
        for (pd, a) in prev_delta.iter_mut().zip(&acts[li]) {
            if *a <= 0.0 {
                *pd = 0.0;
            }
        }
        delta = prev_delta;
    }
    err * err
}

fn zero_grads(model: &MlpModel) -> Vec<DenseLayer> {
    model
        .layers
        .iter()
        .map(|l| DenseLayer {
            in_dim: l.in_dim,
            out_dim: l.out_dim,
            weights: vec![0.0; l.weights.len()],
            biases: vec![0.0; l.biases.len()],
        })
        .collect()
}

/// Seeded mini-batch SGD on MSE. Returns the trained model and the per-epoch
/// mean loss trace. Aborts with a diagnostic if the loss turns non-finite.
pub fn train_mlp(
    x: &Matrix,
    y: &[f64],
    layer_widths: &[usize],
    config: &TrainConfig,
) -> Result<(MlpModel, LossTrace)> {
    let model = MlpModel::init(layer_widths, config.seed)?;
    let trace = Vec::new();
    let mut state = (model, trace);
    train_into(&mut state.0, &mut state.1, x, y, config)?;
    Ok(state)
}

/// Trains a freshly initialized head on embeddings.
pub fn train_head(xi: &Matrix, y: &[f64], config: &TrainConfig) -> Result<Head> {
    if xi.nrows() < 2 {
        return Err(Error::InvalidInput(format!(
            "head training needs at least 2 rows, got {}",
            xi.nrows()
        )));
    }
    let d = xi.ncols();
    let (model, _) = train_mlp(xi, y, &[d, d, 1], config)?;
    Ok(Head { model })
}

fn train_into(
    model: &mut MlpModel,
    trace: &mut LossTrace,
    x: &Matrix,
    y: &[f64],
    config: &TrainConfig,
) -> Result<()> {
    let n = x.nrows();
    if n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if x.ncols() != model.input_dim() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), got: x.ncols() });
    }
    if config.batch_size == 0 || config.batch_size > n {
        return Err(Error::InvalidInput(format!(
            "batch size must be in [1, {n}], got {}",
            config.batch_size
        )));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "learning rate must be positive and finite, got {}",
            config.learning_rate
        )));
    }

    let mut shuffle_rng = derive_rng(config.seed, "mlp-shuffle");
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = zero_grads(model);

    for epoch in 0..config.epochs {
        let rate = config.schedule.rate(config.learning_rate, epoch);
        // Fisher-Yates with the seeded stream.
        for i in (1..n).rev() {
            let j = shuffle_rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            for g in grads.iter_mut() {
                g.weights.fill(0.0);
                g.biases.fill(0.0);
            }
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += backprop_accumulate(model, x.row(i), y[i], scale, &mut grads);
            }
            batch_loss *= scale;
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}; lower the learning rate"
                )));
            }
            epoch_loss += batch_loss * batch.len() as f64;
            for (layer, g) in model.layers.iter_mut().zip(&grads) {
                for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                    *w -= rate * gw;
                }
                for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                    *b -= rate * gb;
                }
            }
        }
        trace.push(epoch_loss / n as f64);
    }
    Ok(())
}

/// A bootstrap head: embedding in, hidden layer of the same width, scalar out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Head {
    model: MlpModel,
}

impl Head {
    pub fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    pub fn predict(&self, xi: &[f64]) -> Result<f64> {
        self.model.predict(xi)
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }
}

/// The S copula-bootstrapped heads of a fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeadEnsemble {
    heads: Vec<Head>,
}

impl HeadEnsemble {
    pub fn new(heads: Vec<Head>) -> Result<Self> {
        if heads.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "head ensemble needs at least 2 heads, got {}",
                heads.len()
            )));
        }
        let d = heads[0].input_dim();
        if heads.iter().any(|h| h.input_dim() != d) {
            return Err(Error::InvalidInput("heads disagree on input dimension".into()));
        }
        Ok(Self { heads })
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[Head] {
        &self.heads
    }

    /// Prediction matrix: one row per head, one column per embedding.
    pub fn predict_all(&self, embeddings: &[Vec<f64>]) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.heads.len(), embeddings.len());
        for (s, head) in self.heads.iter().enumerate() {
            for (j, xi) in embeddings.iter().enumerate() {
                out[(s, j)] = head.predict(xi)?;
            }
        }
        Ok(out)
    }
}
