//! Dense feed-forward network engine with exact backpropagation.
//!
//! Everything is `f64` and bit-deterministic: the same layer specs, seed,
//! dataset, and training config always produce the same parameter vector.
//! Models are immutable values; training returns a new model.
//!
//! Parameter layout: for each layer in order, the weight matrix is stored
//! row-major as `w[out * input_dim + in]`, followed by the `output_dim`
//! biases. The penultimate layer's activations double as the extracted
//! feature vector for the complexity experiments.

mod data;
mod serial;
mod train;

pub use data::{Dataset, Example, ImageShape};
pub use serial::{load_model, save_model};
pub use train::{train, train_masked, TrainConfig, TrainOutcome};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Per-layer nonlinearity. `Softmax` is only legal on the final layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
    Softmax,
}

impl Activation {
    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::Relu => 0,
            Activation::Identity => 1,
            Activation::Softmax => 2,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Identity),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }
}

/// Shape and nonlinearity of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            input_dim,
            output_dim,
            activation,
        }
    }

    /// Number of parameters (weights plus biases) this layer owns.
    pub fn param_count(&self) -> usize {
        self.input_dim * self.output_dim + self.output_dim
    }
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer {index} has a zero dimension ({input_dim}x{output_dim})")]
    ZeroDim {
        index: usize,
        input_dim: usize,
        output_dim: usize,
    },
    #[error("layer {index} output dim {output_dim} does not chain into layer {next} input dim {next_input_dim}")]
    DimMismatch {
        index: usize,
        output_dim: usize,
        next: usize,
        next_input_dim: usize,
    },
    #[error("softmax activation on layer {index} of {count}; softmax is only permitted on the final layer")]
    SoftmaxNotLast { index: usize, count: usize },
    #[error("no layers given")]
    NoLayers,
    #[error("input length {got} does not match first layer input dim {want}")]
    InputDim { got: usize, want: usize },
    #[error("label {label} out of range for {num_classes} output classes")]
    LabelRange { label: usize, num_classes: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset input dim {got} does not match model input dim {want}")]
    DatasetDim { got: usize, want: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}: {loss}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("mask length {got} does not match param count {want}")]
    MaskLength { got: usize, want: usize },
    #[error("example {index}: {reason}")]
    BadExample { index: usize, reason: String },
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model parse at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
}

/// Dense feed-forward network with an explicit flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
    seed: u64,
}

/// Result of a forward evaluation: final-layer pre-activations (logits) plus
/// every layer's post-activation output, retained for backprop and feature
/// extraction.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Vec<f64>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardPass {
    /// Post-activation output of the layer feeding the final one, i.e. the
    /// extracted feature vector. For a single-layer model this is empty.
    pub fn penultimate(&self) -> Option<&[f64]> {
        let n = self.activations.len();
        if n >= 2 {
            Some(&self.activations[n - 2])
        } else {
            None
        }
    }
}

/// Numerically stable softmax; output is strictly positive and sums to 1.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest value, first index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl MlpModel {
    /// Build a model with parameters drawn from the scaled uniform range
    /// `[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]` per layer
    /// (biases included). Deterministic in `seed`.
    pub fn init(layers: Vec<LayerSpec>, seed: u64) -> Result<Self, NnError> {
        validate_specs(&layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total: usize = layers.iter().map(|l| l.param_count()).sum();
        let mut params = Vec::with_capacity(total);
        for spec in &layers {
            let bound = (6.0 / (spec.input_dim + spec.output_dim) as f64).sqrt();
            for _ in 0..spec.param_count() {
                params.push(rng.gen_range(-bound..=bound));
            }
        }
        Ok(MlpModel {
            layers,
            params,
            seed,
        })
    }

    /// Build a model from an explicit parameter vector (e.g. deserialized or
    /// hand-set in tests).
    pub fn from_params(layers: Vec<LayerSpec>, params: Vec<f64>, seed: u64) -> Result<Self, NnError> {
        validate_specs(&layers)?;
        let want: usize = layers.iter().map(|l| l.param_count()).sum();
        if params.len() != want {
            return Err(NnError::Parse {
                offset: 0,
                reason: format!("param count {} does not match layout {}", params.len(), want),
            });
        }
        Ok(MlpModel {
            layers,
            params,
            seed,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Replace the parameter vector wholesale (length must match).
    pub fn with_params(&self, params: Vec<f64>) -> Result<Self, NnError> {
        MlpModel::from_params(self.layers.clone(), params, self.seed)
    }

    /// Evaluate the network, retaining per-layer activations.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardPass, NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::InputDim {
                got: input.len(),
                want: self.input_dim(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut current = input;
        let mut logits = Vec::new();
        let mut offset = 0;
        for (i, spec) in self.layers.iter().enumerate() {
            let (w, b) = self.layer_slices(spec, offset);
            let mut z = vec![0.0; spec.output_dim];
            for o in 0..spec.output_dim {
                let row = &w[o * spec.input_dim..(o + 1) * spec.input_dim];
                let mut acc = b[o];
                for (wi, xi) in row.iter().zip(current.iter()) {
                    acc += wi * xi;
                }
                z[o] = acc;
            }
            if i == self.layers.len() - 1 {
                logits = z.clone();
            }
            let a = match spec.activation {
                Activation::Relu => z.into_iter().map(|v| v.max(0.0)).collect(),
                Activation::Identity => z,
                Activation::Softmax => softmax(&z),
            };
            activations.push(a);
            current = activations.last().unwrap();
            offset += spec.param_count();
        }
        Ok(ForwardPass {
            logits,
            activations,
        })
    }

    /// Class prediction: argmax over logits.
    pub fn predict(&self, input: &[f64]) -> Result<usize, NnError> {
        Ok(argmax(&self.forward(input)?.logits))
    }

    /// Cross-entropy loss (nats) of the softmax over logits against `label`.
    pub fn loss(&self, input: &[f64], label: usize) -> Result<f64, NnError> {
        self.check_label(label)?;
        let pass = self.forward(input)?;
        Ok(cross_entropy(&pass.logits, label))
    }

    /// Loss together with the gradient of the loss w.r.t. every parameter.
    pub fn loss_and_param_grad(&self, input: &[f64], label: usize) -> Result<(f64, Vec<f64>), NnError> {
        self.check_label(label)?;
        let pass = self.forward(input)?;
        let loss = cross_entropy(&pass.logits, label);
        let delta = loss_delta(&pass.logits, label);
        let (pgrad, _) = self.backward(input, &pass, &delta);
        Ok((loss, pgrad))
    }

    /// Exact gradient of the cross-entropy loss w.r.t. the input vector.
    pub fn grad_input(&self, input: &[f64], label: usize) -> Result<Vec<f64>, NnError> {
        self.check_label(label)?;
        let pass = self.forward(input)?;
        let delta = loss_delta(&pass.logits, label);
        let (_, igrad) = self.backward(input, &pass, &delta);
        Ok(igrad)
    }

    /// Gradient of a single logit (final pre-activation) w.r.t. the input.
    pub fn grad_logit(&self, input: &[f64], class: usize) -> Result<Vec<f64>, NnError> {
        self.check_label(class)?;
        let pass = self.forward(input)?;
        let mut delta = vec![0.0; self.output_dim()];
        delta[class] = 1.0;
        let (_, igrad) = self.backward(input, &pass, &delta);
        Ok(igrad)
    }

    /// Fraction of examples whose argmax prediction matches the label.
    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64, NnError> {
        if dataset.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        if dataset.dim() != self.input_dim() {
            return Err(NnError::DatasetDim {
                got: dataset.dim(),
                want: self.input_dim(),
            });
        }
        let mut correct = 0usize;
        for ex in dataset.examples() {
            if self.predict(&ex.input)? == ex.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / dataset.len() as f64)
    }

    fn check_label(&self, label: usize) -> Result<(), NnError> {
        if label >= self.output_dim() {
            return Err(NnError::LabelRange {
                label,
                num_classes: self.output_dim(),
            });
        }
        Ok(())
    }

    fn layer_slices<'a>(&'a self, spec: &LayerSpec, offset: usize) -> (&'a [f64], &'a [f64]) {
        let w_len = spec.input_dim * spec.output_dim;
        let w = &self.params[offset..offset + w_len];
        let b = &self.params[offset + w_len..offset + w_len + spec.output_dim];
        (w, b)
    }

    /// Backpropagate a gradient seeded on the final layer's pre-activations.
    /// Returns (param gradient, input gradient).
    fn backward(&self, input: &[f64], pass: &ForwardPass, final_delta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.layers.len();
        let mut pgrad = vec![0.0; self.params.len()];
        let mut delta = final_delta.to_vec();

        let mut offsets = Vec::with_capacity(n);
        let mut off = 0;
        for spec in &self.layers {
            offsets.push(off);
            off += spec.param_count();
        }

        for l in (0..n).rev() {
            let spec = &self.layers[l];
            let layer_input: &[f64] = if l == 0 {
                input
            } else {
                &pass.activations[l - 1]
            };
            let offset = offsets[l];
            let w_len = spec.input_dim * spec.output_dim;
            // dL/dW[o][i] = delta[o] * layer_input[i]; dL/db[o] = delta[o]
            for o in 0..spec.output_dim {
                let d = delta[o];
                let row = &mut pgrad[offset + o * spec.input_dim..offset + (o + 1) * spec.input_dim];
                for (g, xi) in row.iter_mut().zip(layer_input.iter()) {
                    *g += d * xi;
                }
                pgrad[offset + w_len + o] += d;
            }
            // Propagate to the previous layer: delta_prev = W^T delta, gated
            // by the previous layer's activation derivative.
            let w = &self.params[offset..offset + w_len];
            let mut prev = vec![0.0; spec.input_dim];
            for o in 0..spec.output_dim {
                let d = delta[o];
                let row = &w[o * spec.input_dim..(o + 1) * spec.input_dim];
                for (p, wi) in prev.iter_mut().zip(row.iter()) {
                    *p += d * wi;
                }
            }
            if l > 0 {
                let prev_spec = &self.layers[l - 1];
                if prev_spec.activation == Activation::Relu {
                    for (p, a) in prev.iter_mut().zip(pass.activations[l - 1].iter()) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                }
            }
            delta = prev;
        }
        (pgrad, delta)
    }
}

/// Cross-entropy of softmax(logits) against a label, in nats, computed via
/// the log-sum-exp identity for stability.
pub(crate) fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Gradient of the cross-entropy loss w.r.t. the final pre-activations:
/// softmax(logits) - onehot(label).
pub(crate) fn loss_delta(logits: &[f64], label: usize) -> Vec<f64> {
    let mut d = softmax(logits);
    d[label] -= 1.0;
    d
}

fn validate_specs(layers: &[LayerSpec]) -> Result<(), NnError> {
    if layers.is_empty() {
        return Err(NnError::NoLayers);
    }
    for (i, spec) in layers.iter().enumerate() {
        if spec.input_dim == 0 || spec.output_dim == 0 {
            return Err(NnError::ZeroDim {
                index: i,
                input_dim: spec.input_dim,
                output_dim: spec.output_dim,
            });
        }
        if spec.activation == Activation::Softmax && i != layers.len() - 1 {
            return Err(NnError::SoftmaxNotLast {
                index: i,
                count: layers.len(),
            });
        }
        if i + 1 < layers.len() && spec.output_dim != layers[i + 1].input_dim {
            return Err(NnError::DimMismatch {
                index: i,
                output_dim: spec.output_dim,
                next: i + 1,
                next_input_dim: layers[i + 1].input_dim,
            });
        }
    }
    Ok(())
}

/// Convenience: the standard classifier architecture used throughout the
/// experiments, `input -> hidden ReLU -> classes softmax`.
pub fn classifier_arch(input_dim: usize, hidden: usize, classes: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::new(input_dim, hidden, Activation::Relu),
        LayerSpec::new(hidden, classes, Activation::Softmax),
    ]
}

/// Same architecture with the hidden nonlinearity removed (linear end to end
/// apart from the softmax output).
pub fn linear_arch(input_dim: usize, hidden: usize, classes: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::new(input_dim, hidden, Activation::Identity),
        LayerSpec::new(hidden, classes, Activation::Softmax),
    ]
}

#[cfg(test)]
mod tests;
