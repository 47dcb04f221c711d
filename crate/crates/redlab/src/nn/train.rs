//! Mini-batch SGD training with per-epoch deterministic shuffling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, MlpModel, NnError};
use crate::seed;

/// Loss selection. Only cross-entropy on softmax is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    CrossEntropy,
}

/// Training hyperparameters. The same (config, seed, dataset, model) tuple
/// always yields bit-identical trained parameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            batch_size: 32,
            max_epochs: 100,
            seed: 0,
            loss: Loss::CrossEntropy,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NnError> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(NnError::BadConfig(format!(
                "learning_rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(NnError::BadConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Trained model plus the per-epoch training-accuracy curve.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub accuracy_curve: Vec<f64>,
}

/// Train with plain mini-batch SGD.
pub fn train(model: &MlpModel, dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome, NnError> {
    train_masked(model, dataset, config, None)
}

/// Train while holding the masked (false) parameter entries at exactly zero.
/// Masked entries receive no gradient updates, so a zeroed entry stays zero
/// bit-for-bit through any number of steps.
pub fn train_masked(
    model: &MlpModel,
    dataset: &Dataset,
    config: &TrainConfig,
    mask: Option<&[bool]>,
) -> Result<TrainOutcome, NnError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if dataset.dim() != model.input_dim() {
        return Err(NnError::DatasetDim {
            got: dataset.dim(),
            want: model.input_dim(),
        });
    }
    if let Some(m) = mask {
        if m.len() != model.params().len() {
            return Err(NnError::MaskLength {
                got: m.len(),
                want: model.params().len(),
            });
        }
    }

    let mut current = model.clone();
    let mut curve = Vec::with_capacity(config.max_epochs);
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(config.seed, epoch as u64));
        order.shuffle(&mut rng);

        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grad = vec![0.0; current.params().len()];
            for &i in batch {
                let ex = &dataset.examples()[i];
                let (loss, g) = current.loss_and_param_grad(&ex.input, ex.label)?;
                if !loss.is_finite() {
                    return Err(NnError::NonFiniteLoss {
                        epoch,
                        batch: batch_idx,
                        loss,
                    });
                }
                for (acc, gi) in grad.iter_mut().zip(g.iter()) {
                    *acc += gi;
                }
            }
            let scale = config.learning_rate / batch.len() as f64;
            let params = current.params_mut();
            for (p, g) in params.iter_mut().zip(grad.iter()) {
                *p -= scale * g;
            }
            if let Some(m) = mask {
                for (p, &keep) in params.iter_mut().zip(m.iter()) {
                    if !keep {
                        *p = 0.0;
                    }
                }
            }
        }
        curve.push(current.accuracy(dataset)?);
    }

    Ok(TrainOutcome {
        model: current,
        accuracy_curve: curve,
    })
}

/// First epoch (1-based) at which the curve reaches `target` accuracy, if any.
pub fn epochs_to_accuracy(curve: &[f64], target: f64) -> Option<usize> {
    curve.iter().position(|&a| a >= target).map(|i| i + 1)
}
