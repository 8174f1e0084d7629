//! Single-hidden-layer classifier with analytic backpropagation and
//! minibatch SGD (momentum + weight decay on mean cross-entropy).
//!
//! The same network serves as the continually trained model and as the
//! per-task surrogate whose softmax confidences drive the buffer policy.
//! Everything is 64-bit and deterministic given a seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{combine, sub_rng};
use crate::stream::Sample;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Weights and biases of the two-layer network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// hidden x input
    pub w1: Mat,
    pub b1: Vec<f64>,
    /// classes x hidden
    pub w2: Mat,
    pub b2: Vec<f64>,
}

impl ModelParams {
    /// Seeded uniform init in [-a, a] with a = sqrt(6 / (fan_in + fan_out));
    /// biases start at zero.
    pub fn init(input_dim: usize, hidden_dim: usize, classes: usize, seed: u64) -> Result<Self> {
        Self::check_dims(input_dim, hidden_dim, classes)?;
        let mut rng = sub_rng(seed, "init");
        let a1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let w1 = Mat::from_fn(hidden_dim, input_dim, |_, _| rng.random_range(-a1..a1));
        let a2 = (6.0 / (hidden_dim + classes) as f64).sqrt();
        let w2 = Mat::from_fn(classes, hidden_dim, |_, _| rng.random_range(-a2..a2));
        Ok(ModelParams { w1, b1: vec![0.0; hidden_dim], w2, b2: vec![0.0; classes] })
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, classes: usize) -> Result<Self> {
        Self::check_dims(input_dim, hidden_dim, classes)?;
        Ok(ModelParams {
            w1: Mat::zeros(hidden_dim, input_dim),
            b1: vec![0.0; hidden_dim],
            w2: Mat::zeros(classes, hidden_dim),
            b2: vec![0.0; classes],
        })
    }

    fn check_dims(input_dim: usize, hidden_dim: usize, classes: usize) -> Result<()> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(Error::invalid("model dimensions must be >= 1"));
        }
        if classes < 2 {
            return Err(Error::invalid("model needs at least 2 classes"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.rows()
    }

    pub fn validate(&self) -> Result<()> {
        Self::check_dims(self.input_dim(), self.hidden_dim(), self.num_classes())?;
        if self.b1.len() != self.hidden_dim()
            || self.w2.cols() != self.hidden_dim()
            || self.b2.len() != self.num_classes()
        {
            return Err(Error::invalid("model dimensions are inconsistent"));
        }
        let finite = self
            .w1
            .data()
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.data().iter())
            .chain(self.b2.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("model contains non-finite entries"));
        }
        Ok(())
    }

    pub fn num_coords(&self) -> usize {
        self.w1.data().len() + self.b1.len() + self.w2.data().len() + self.b2.len()
    }

    /// Coordinates in a fixed order: w1, b1, w2, b2.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_coords());
        v.extend_from_slice(self.w1.data());
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(self.w2.data());
        v.extend_from_slice(&self.b2);
        v
    }

    /// Inverse of [`flatten`](Self::flatten) for the same architecture.
    pub fn from_flat(
        input_dim: usize,
        hidden_dim: usize,
        classes: usize,
        coords: &[f64],
    ) -> Result<Self> {
        let mut p = Self::zeros(input_dim, hidden_dim, classes)?;
        if coords.len() != p.num_coords() {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {}",
                p.num_coords(),
                coords.len()
            )));
        }
        let (w1, rest) = coords.split_at(hidden_dim * input_dim);
        let (b1, rest) = rest.split_at(hidden_dim);
        let (w2, b2) = rest.split_at(classes * hidden_dim);
        p.w1.data_mut().copy_from_slice(w1);
        p.b1.copy_from_slice(b1);
        p.w2.data_mut().copy_from_slice(w2);
        p.b2.copy_from_slice(b2);
        Ok(p)
    }
}

/// SGD hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    /// Classic momentum in [0, 1).
    pub momentum: f64,
    pub weight_decay: f64,
    /// Full passes over the data for multi-epoch helpers.
    pub epochs: usize,
    /// Per-epoch cosine decay of the learning rate; off by default.
    pub cosine_annealing: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 0.1,
            momentum: 0.0,
            weight_decay: 0.0,
            epochs: 1,
            cosine_annealing: false,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        // lr = 0 is accepted as the null-update limit.
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::invalid("learning_rate must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must be in [0, 1)"));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::invalid("weight_decay must be finite and >= 0"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        Ok(())
    }

    /// Learning rate used during epoch `e` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if self.cosine_annealing {
            let t = epoch as f64 / self.epochs as f64;
            self.learning_rate * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        } else {
            self.learning_rate
        }
    }
}

struct ForwardPass {
    z1: Vec<f64>,
    a1: Vec<f64>,
    logits: Vec<f64>,
}

fn forward_full(params: &ModelParams, features: &[f64]) -> Result<ForwardPass> {
    if features.len() != params.input_dim() {
        return Err(Error::invalid(format!(
            "feature length {} does not match input dimension {}",
            features.len(),
            params.input_dim()
        )));
    }
    let hidden = params.hidden_dim();
    let classes = params.num_classes();
    let mut z1 = vec![0.0; hidden];
    for h in 0..hidden {
        let mut acc = params.b1[h];
        for (w, x) in params.w1.row(h).iter().zip(features) {
            acc += w * x;
        }
        z1[h] = acc;
    }
    let a1: Vec<f64> = z1.iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect();
    let mut logits = vec![0.0; classes];
    for k in 0..classes {
        let mut acc = params.b2[k];
        for (w, a) in params.w2.row(k).iter().zip(&a1) {
            acc += w * a;
        }
        logits[k] = acc;
    }
    Ok(ForwardPass { z1, a1, logits })
}

/// Raw class scores `w2 * relu(w1 * x + b1) + b2`.
pub fn forward_logits(params: &ModelParams, features: &[f64]) -> Result<Vec<f64>> {
    Ok(forward_full(params, features)?.logits)
}

/// Numerically stable softmax (max subtraction). Entries are strictly
/// positive and sum to 1.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::invalid("softmax of an empty vector"));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("softmax input must be finite"));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Softmax probability the model assigns to the sample's own label.
pub fn target_confidence(params: &ModelParams, sample: &Sample) -> Result<f64> {
    if sample.label >= params.num_classes() {
        return Err(Error::invalid(format!(
            "label {} out of range for {} classes",
            sample.label,
            params.num_classes()
        )));
    }
    let probs = softmax(&forward_logits(params, &sample.features)?)?;
    Ok(probs[sample.label])
}

/// Gradient of the mean cross-entropy over a batch, same layout as the
/// parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros_like(params: &ModelParams) -> Self {
        Gradients {
            w1: Mat::zeros(params.hidden_dim(), params.input_dim()),
            b1: vec![0.0; params.hidden_dim()],
            w2: Mat::zeros(params.num_classes(), params.hidden_dim()),
            b2: vec![0.0; params.num_classes()],
        }
    }
}

/// Mean cross-entropy of the batch under the current parameters.
pub fn batch_loss(params: &ModelParams, batch: &[&Sample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("loss of an empty batch"));
    }
    let mut total = 0.0;
    for s in batch {
        if s.label >= params.num_classes() {
            return Err(Error::invalid(format!("label {} out of range", s.label)));
        }
        let logits = forward_full(params, &s.features)?.logits;
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
        total += lse - logits[s.label];
    }
    Ok(total / batch.len() as f64)
}

/// Mean cross-entropy and its analytic gradient over a batch.
pub fn batch_gradients(params: &ModelParams, batch: &[&Sample]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::invalid("gradient of an empty batch"));
    }
    let mut grads = Gradients::zeros_like(params);
    let mut total_loss = 0.0;
    let hidden = params.hidden_dim();
    let classes = params.num_classes();

    for s in batch {
        if s.label >= classes {
            return Err(Error::invalid(format!("label {} out of range", s.label)));
        }
        let fwd = forward_full(params, &s.features)?;
        let max = fwd.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = fwd.logits.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        total_loss += max + sum.ln() - fwd.logits[s.label];

        // dL/dlogits = softmax - onehot(label)
        let mut d2: Vec<f64> = exps.iter().map(|&e| e / sum).collect();
        d2[s.label] -= 1.0;

        for k in 0..classes {
            let dk = d2[k];
            grads.b2[k] += dk;
            let row = &mut grads.w2.data_mut()[k * hidden..(k + 1) * hidden];
            for (g, a) in row.iter_mut().zip(&fwd.a1) {
                *g += dk * a;
            }
        }
        for h in 0..hidden {
            if fwd.z1[h] <= 0.0 {
                continue; // relu gate closed
            }
            let mut dh = 0.0;
            for k in 0..classes {
                dh += params.w2.at(k, h) * d2[k];
            }
            grads.b1[h] += dh;
            let row = &mut grads.w1.data_mut()
                [h * params.w1.cols()..(h + 1) * params.w1.cols()];
            for (g, x) in row.iter_mut().zip(&s.features) {
                *g += dh * x;
            }
        }
    }

    let scale = 1.0 / batch.len() as f64;
    for g in grads
        .w1
        .data_mut()
        .iter_mut()
        .chain(grads.b1.iter_mut())
        .chain(grads.w2.data_mut().iter_mut())
        .chain(grads.b2.iter_mut())
    {
        *g *= scale;
    }
    Ok((total_loss * scale, grads))
}

/// Momentum velocity buffers.
#[derive(Debug, Clone)]
pub struct SgdState {
    velocity: Vec<f64>,
}

impl SgdState {
    pub fn zeros_like(params: &ModelParams) -> Self {
        SgdState { velocity: vec![0.0; params.num_coords()] }
    }
}

/// One SGD step on the batch: `v = momentum*v + (grad + wd*theta)`,
/// `theta -= lr*v`. Returns the pre-step batch loss.
pub fn sgd_step(
    params: &mut ModelParams,
    batch: &[&Sample],
    cfg: &SgdConfig,
    state: &mut SgdState,
) -> Result<f64> {
    cfg.validate()?;
    let (loss, grads) = batch_gradients(params, batch)?;
    if state.velocity.len() != params.num_coords() {
        return Err(Error::invalid("optimizer state does not match parameters"));
    }
    let mut coords = params.flatten();
    let grad_coords: Vec<f64> = grads
        .w1
        .data()
        .iter()
        .chain(grads.b1.iter())
        .chain(grads.w2.data().iter())
        .chain(grads.b2.iter())
        .copied()
        .collect();
    for ((theta, v), g) in coords.iter_mut().zip(&mut state.velocity).zip(&grad_coords) {
        let g = g + cfg.weight_decay * *theta;
        *v = cfg.momentum * *v + g;
        *theta -= cfg.learning_rate * *v;
    }
    *params = ModelParams::from_flat(
        params.input_dim(),
        params.hidden_dim(),
        params.num_classes(),
        &coords,
    )?;
    Ok(loss)
}

/// One full shuffled pass of minibatch SGD over `data`. The momentum buffer
/// lives for the duration of this pass. Deterministic given the seed.
pub fn train_epoch(
    params: &ModelParams,
    data: &[Sample],
    cfg: &SgdConfig,
    batch_size: usize,
    seed: u64,
) -> Result<ModelParams> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on empty data"));
    }
    if batch_size == 0 {
        return Err(Error::invalid("batch_size must be >= 1"));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut sub_rng(seed, "epoch-order"));
    let mut out = params.clone();
    let mut state = SgdState::zeros_like(&out);
    for chunk in order.chunks(batch_size) {
        let batch: Vec<&Sample> = chunk.iter().map(|&i| &data[i]).collect();
        sgd_step(&mut out, &batch, cfg, &mut state)?;
    }
    Ok(out)
}

/// `cfg.epochs` passes of [`train_epoch`] with per-epoch derived seeds.
/// `after_epoch(e, params)` runs after each pass (confidence recording etc.).
pub fn train_epochs(
    params: &ModelParams,
    data: &[Sample],
    cfg: &SgdConfig,
    batch_size: usize,
    seed: u64,
    mut after_epoch: impl FnMut(usize, &ModelParams) -> Result<()>,
) -> Result<ModelParams> {
    cfg.validate()?;
    let mut out = params.clone();
    for e in 0..cfg.epochs {
        let epoch_cfg = SgdConfig { learning_rate: cfg.lr_at(e), ..cfg.clone() };
        out = train_epoch(&out, data, &epoch_cfg, batch_size, combine(seed, e as u64))?;
        after_epoch(e, &out)?;
    }
    Ok(out)
}

/// Argmax prediction; ties go to the lowest class index.
pub fn predict(params: &ModelParams, features: &[f64]) -> Result<usize> {
    let logits = forward_logits(params, features)?;
    let mut best = 0;
    for (k, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Fraction of samples whose argmax prediction equals their label.
pub fn evaluate_accuracy(params: &ModelParams, data: &[Sample]) -> Result<f64> {
    Ok(evaluate_detailed(params, data)?.0)
}

/// Overall accuracy plus accuracy per class present in `data`.
pub fn evaluate_detailed(
    params: &ModelParams,
    data: &[Sample],
) -> Result<(f64, BTreeMap<usize, f64>)> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on empty data"));
    }
    let mut correct = 0usize;
    let mut per_class: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for s in data {
        let hit = predict(params, &s.features)? == s.label;
        let entry = per_class.entry(s.label).or_insert((0, 0));
        entry.1 += 1;
        if hit {
            correct += 1;
            entry.0 += 1;
        }
    }
    let overall = correct as f64 / data.len() as f64;
    let per_class = per_class
        .into_iter()
        .map(|(c, (hits, total))| (c, hits as f64 / total as f64))
        .collect();
    Ok((overall, per_class))
}

/// Accuracy restricted to each class (map class id -> accuracy).
pub fn per_class_accuracy(params: &ModelParams, data: &[Sample]) -> Result<BTreeMap<usize, f64>> {
    Ok(evaluate_detailed(params, data)?.1)
}
