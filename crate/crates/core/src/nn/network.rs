use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{NetworkConfig, OutputActivation};
use super::normalize::Normalizer;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Fully connected sigmoid network with its normalizer and label dictionary.
///
/// `weights[l]` is row-major `layer_sizes[l] x layer_sizes[l + 1]`, so the
/// weight from input `i` to output `j` sits at `i * outputs + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NetworkModel<T: Real> {
    pub format_version: u32,
    pub preset: super::Preset,
    pub layer_sizes: Vec<usize>,
    pub activation: OutputActivation,
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
    pub normalizer: Normalizer<T>,
    pub labels: Vec<String>,
    pub seed: u64,
    pub iterations_trained: u64,
    pub config: NetworkConfig,
    /// Column names of the training data, empty when unknown.
    #[serde(default)]
    pub feature_names: Vec<String>,
}

/// Activations of every layer, input first, output scores last.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass<T> {
    pub activations: Vec<Vec<T>>,
}

impl<T: Real> ForwardPass<T> {
    pub fn scores(&self) -> &[T] {
        self.activations.last().expect("at least input and output layers")
    }
}

/// Partial derivatives shaped like the model's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    fn zeros_like(model: &NetworkModel<T>) -> Self {
        Self {
            weights: model.weights.iter().map(|w| vec![T::zero(); w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }
}

#[inline]
fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn softmax_in_place<T: Real>(z: &mut [T]) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Reusable buffers for one training job.
#[derive(Debug, Clone)]
pub(crate) struct Scratch<T> {
    activations: Vec<Vec<T>>,
    /// Output-layer pre-activations, kept for a stable log-softmax.
    logits: Vec<T>,
    deltas: Vec<Vec<T>>,
    grads: Gradients<T>,
}

impl<T: Real> Scratch<T> {
    pub(crate) fn new(model: &NetworkModel<T>) -> Self {
        Self {
            activations: model.layer_sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            logits: vec![T::zero(); *model.layer_sizes.last().unwrap_or(&0)],
            deltas: model.layer_sizes[1..].iter().map(|&n| vec![T::zero(); n]).collect(),
            grads: Gradients::zeros_like(model),
        }
    }
}

impl<T: Real> NetworkModel<T> {
    /// Glorot-uniform weights from the config's seed, zero biases.
    pub fn init(cfg: &NetworkConfig, input_size: usize, labels: Vec<String>) -> Result<Self> {
        cfg.validate()?;
        if input_size == 0 {
            return Err(invalid("input size must be positive"));
        }
        if labels.is_empty() {
            return Err(invalid("label count must be positive"));
        }
        let mut layer_sizes = Vec::with_capacity(cfg.hidden_layers.len() + 2);
        layer_sizes.push(input_size);
        layer_sizes.extend_from_slice(&cfg.hidden_layers);
        layer_sizes.push(labels.len());

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| T::lit(rng.random_range(-r..r))).collect());
            biases.push(vec![T::zero(); fan_out]);
        }
        Ok(Self {
            format_version: MODEL_FORMAT_VERSION,
            preset: cfg.preset,
            layer_sizes,
            activation: cfg.output,
            weights,
            biases,
            normalizer: Normalizer::identity(),
            labels,
            seed: cfg.seed,
            iterations_trained: 0,
            config: cfg.clone(),
            feature_names: Vec::new(),
        })
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Checks shape chaining and finiteness, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Error::Format(m);
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(bad(format!(
                "model format version {} is not supported (expected {})",
                self.format_version, MODEL_FORMAT_VERSION
            )));
        }
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(bad("layer sizes must hold at least two positive counts".into()));
        }
        let n = self.layer_sizes.len() - 1;
        if self.weights.len() != n || self.biases.len() != n {
            return Err(bad("layer count does not match the parameter lists".into()));
        }
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(bad(format!("layer {l} parameters have the wrong shape")));
            }
        }
        if *self.layer_sizes.last().unwrap() != self.labels.len() {
            return Err(bad("output size differs from the label count".into()));
        }
        let finite = self
            .weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(bad("model holds non-finite parameters".into()));
        }
        let np = self.normalizer.params.len();
        if self.normalizer.kind != super::NormalizationKind::None && np != self.input_size() {
            return Err(bad(format!(
                "normalizer has {np} parameters for {} inputs",
                self.input_size()
            )));
        }
        if !self.feature_names.is_empty() && self.feature_names.len() != self.input_size() {
            return Err(bad("feature name count differs from the input size".into()));
        }
        Ok(())
    }

    fn check_input(&self, features: &[T]) -> Result<()> {
        if features.len() != self.input_size() {
            return Err(invalid(format!(
                "network expects {} inputs, got {}",
                self.input_size(),
                features.len()
            )));
        }
        Ok(())
    }

    fn forward_into(&self, features: &[T], acts: &mut [Vec<T>], logits: &mut [T]) {
        acts[0].copy_from_slice(features);
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let (head, tail) = acts.split_at_mut(l + 1);
            let input = &head[l];
            let out = &mut tail[0];
            let w = &self.weights[l];
            let n_out = out.len();
            out.copy_from_slice(&self.biases[l]);
            for (i, &a) in input.iter().enumerate() {
                let row = &w[i * n_out..(i + 1) * n_out];
                for (o, &wij) in out.iter_mut().zip(row) {
                    *o += a * wij;
                }
            }
            if l == last {
                logits.copy_from_slice(out);
                match self.activation {
                    OutputActivation::Softmax => softmax_in_place(out),
                    OutputActivation::Sigmoid => out.iter_mut().for_each(|v| *v = sigmoid(*v)),
                }
            } else {
                out.iter_mut().for_each(|v| *v = sigmoid(*v));
            }
        }
    }

    /// Forward pass on features that are already normalized.
    pub fn forward(&self, features: &[T]) -> Result<ForwardPass<T>> {
        self.check_input(features)?;
        let mut scratch = Scratch::new(self);
        self.forward_into(features, &mut scratch.activations, &mut scratch.logits);
        Ok(ForwardPass {
            activations: scratch.activations,
        })
    }

    /// Loss of one normalized sample including the L2 penalty.
    pub fn loss(&self, features: &[T], label: usize, l2_lambda: T) -> Result<T> {
        self.check_sample(features, label)?;
        let mut scratch = Scratch::new(self);
        self.forward_into(features, &mut scratch.activations, &mut scratch.logits);
        Ok(self.data_loss(&scratch, label) + self.l2_penalty(l2_lambda))
    }

    fn check_sample(&self, features: &[T], label: usize) -> Result<()> {
        self.check_input(features)?;
        if label >= self.label_count() {
            return Err(invalid(format!(
                "label index {label} outside {} labels",
                self.label_count()
            )));
        }
        Ok(())
    }

    fn data_loss(&self, scratch: &Scratch<T>, label: usize) -> T {
        match self.activation {
            OutputActivation::Softmax => {
                let z = &scratch.logits;
                let max = z.iter().copied().fold(T::neg_infinity(), T::max);
                let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
                lse - z[label]
            }
            OutputActivation::Sigmoid => {
                let out = scratch.activations.last().unwrap();
                let half = T::lit(0.5);
                out.iter()
                    .enumerate()
                    .map(|(k, &o)| {
                        let t = if k == label { T::one() } else { T::zero() };
                        half * (o - t) * (o - t)
                    })
                    .sum()
            }
        }
    }

    fn l2_penalty(&self, l2_lambda: T) -> T {
        if l2_lambda == T::zero() {
            return T::zero();
        }
        let sq: T = self.weights.iter().flatten().map(|&w| w * w).sum();
        l2_lambda * T::lit(0.5) * sq
    }

    /// Forward and backward pass into `scratch.grads`; returns the loss.
    fn accumulate(&self, features: &[T], label: usize, l2_lambda: T, scratch: &mut Scratch<T>) -> T {
        self.forward_into(features, &mut scratch.activations, &mut scratch.logits);
        let loss = self.data_loss(scratch, label) + self.l2_penalty(l2_lambda);
        let n_layers = self.weights.len();

        let out = &scratch.activations[n_layers];
        let d_out = &mut scratch.deltas[n_layers - 1];
        for (k, (d, &o)) in d_out.iter_mut().zip(out).enumerate() {
            let t = if k == label { T::one() } else { T::zero() };
            *d = match self.activation {
                OutputActivation::Softmax => o - t,
                OutputActivation::Sigmoid => (o - t) * o * (T::one() - o),
            };
        }
        for l in (0..n_layers).rev() {
            let n_out = self.layer_sizes[l + 1];
            let input = &scratch.activations[l];
            let (lower, upper) = scratch.deltas.split_at_mut(l);
            let delta = &upper[0];
            let gw = &mut scratch.grads.weights[l];
            let w = &self.weights[l];
            for (i, &a) in input.iter().enumerate() {
                let row = i * n_out..(i + 1) * n_out;
                for ((g, &d), &wij) in gw[row.clone()].iter_mut().zip(delta).zip(&w[row]) {
                    *g = a * d + l2_lambda * wij;
                }
            }
            scratch.grads.biases[l].copy_from_slice(delta);
            if l > 0 {
                let below = &mut lower[l - 1];
                for (i, (db, &a)) in below.iter_mut().zip(input).enumerate() {
                    let row = &w[i * n_out..(i + 1) * n_out];
                    let s: T = row.iter().zip(delta).map(|(&wij, &d)| wij * d).sum();
                    *db = s * a * (T::one() - a);
                }
            }
        }
        loss
    }

    /// Loss and its gradient for one normalized sample.
    pub fn loss_and_gradients(&self, features: &[T], label: usize, l2_lambda: T) -> Result<(T, Gradients<T>)> {
        self.check_sample(features, label)?;
        let mut scratch = Scratch::new(self);
        let loss = self.accumulate(features, label, l2_lambda, &mut scratch);
        Ok((loss, scratch.grads))
    }

    pub(crate) fn step_with(
        &mut self,
        features: &[T],
        label: usize,
        learning_rate: T,
        l2_lambda: T,
        scratch: &mut Scratch<T>,
    ) -> Result<T> {
        let loss = self.accumulate(features, label, l2_lambda, scratch);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                iteration: self.iterations_trained,
                loss: loss.as_f64(),
            });
        }
        for (w, g) in self.weights.iter_mut().zip(&scratch.grads.weights) {
            for (wi, &gi) in w.iter_mut().zip(g) {
                *wi -= learning_rate * gi;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&scratch.grads.biases) {
            for (bi, &gi) in b.iter_mut().zip(g) {
                *bi -= learning_rate * gi;
            }
        }
        self.iterations_trained += 1;
        Ok(loss)
    }

    /// One stochastic gradient step on a normalized sample; returns the loss
    /// before the update.
    pub fn backprop_step(&mut self, features: &[T], label: usize, learning_rate: T, l2_lambda: T) -> Result<T> {
        self.check_sample(features, label)?;
        let mut scratch = Scratch::new(self);
        self.step_with(features, label, learning_rate, l2_lambda, &mut scratch)
    }

    /// Normalizes raw features and returns the output scores.
    pub fn scores(&self, raw_features: &[T]) -> Result<Vec<T>> {
        let x = self.normalizer.apply(raw_features)?;
        self.check_input(&x)?;
        let mut scratch = Scratch::new(self);
        self.forward_into(&x, &mut scratch.activations, &mut scratch.logits);
        Ok(scratch.activations.pop().unwrap())
    }

    /// Index of the highest score for raw features; ties go to the lowest index.
    pub fn predict(&self, raw_features: &[T]) -> Result<(usize, Vec<T>)> {
        let scores = self.scores(raw_features)?;
        Ok((argmax(&scores), scores))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid model document: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn argmax<T: Real>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
