//! Labeled datasets with inputs in `[0,1]`.

use super::NnError;

/// One labeled example. Inputs live in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub label: usize,
}

/// Optional image geometry carried alongside flat input vectors so the
/// block-quantization code can reshape them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }
}

/// A set of labeled examples sharing one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    num_classes: usize,
    image_shape: Option<ImageShape>,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, num_classes: usize) -> Result<Self, NnError> {
        Self::with_shape(examples, num_classes, None)
    }

    pub fn with_shape(
        examples: Vec<Example>,
        num_classes: usize,
        image_shape: Option<ImageShape>,
    ) -> Result<Self, NnError> {
        if examples.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        if num_classes == 0 {
            return Err(NnError::BadConfig("num_classes must be positive".into()));
        }
        let dim = examples[0].input.len();
        if let Some(shape) = image_shape {
            if shape.len() != dim {
                return Err(NnError::BadConfig(format!(
                    "image shape {}x{}x{} does not match input dim {}",
                    shape.channels, shape.height, shape.width, dim
                )));
            }
        }
        for (i, ex) in examples.iter().enumerate() {
            if ex.input.len() != dim {
                return Err(NnError::BadExample {
                    index: i,
                    reason: format!("input dim {} != {}", ex.input.len(), dim),
                });
            }
            if ex.label >= num_classes {
                return Err(NnError::BadExample {
                    index: i,
                    reason: format!("label {} >= num_classes {}", ex.label, num_classes),
                });
            }
            if let Some(&v) = ex.input.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
                return Err(NnError::BadExample {
                    index: i,
                    reason: format!("input value {} outside [0,1]", v),
                });
            }
        }
        Ok(Dataset {
            examples,
            num_classes,
            image_shape,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn image_shape(&self) -> Option<ImageShape> {
        self.image_shape
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Shared input dimension.
    pub fn dim(&self) -> usize {
        self.examples[0].input.len()
    }

    /// First `n` examples (all of them if `n` exceeds the length).
    pub fn take(&self, n: usize) -> Dataset {
        Dataset {
            examples: self.examples.iter().take(n).cloned().collect(),
            num_classes: self.num_classes,
            image_shape: self.image_shape,
        }
    }

    /// Replace the examples, keeping class count and image geometry.
    /// Used by attack pipelines that perturb inputs in place.
    pub fn with_examples(&self, examples: Vec<Example>) -> Result<Dataset, NnError> {
        Dataset::with_shape(examples, self.num_classes, self.image_shape)
    }

    /// Fraction of examples carrying the most common label.
    pub fn majority_class_frequency(&self) -> f64 {
        let mut counts = vec![0usize; self.num_classes];
        for ex in &self.examples {
            counts[ex.label] += 1;
        }
        let max = counts.into_iter().max().unwrap_or(0);
        max as f64 / self.examples.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mixed_dims() {
        let err = Dataset::new(
            vec![
                Example { input: vec![0.0, 0.5], label: 0 },
                Example { input: vec![0.1], label: 1 },
            ],
            2,
        )
        .unwrap_err();
        assert!(err.to_string().contains("input dim"));
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = Dataset::new(vec![Example { input: vec![0.0], label: 2 }], 2).unwrap_err();
        assert!(err.to_string().contains("label 2"));
    }

    #[test]
    fn rejects_out_of_range_values() {
        let err = Dataset::new(vec![Example { input: vec![1.5], label: 0 }], 1).unwrap_err();
        assert!(err.to_string().contains("outside [0,1]"));
    }

    #[test]
    fn majority_frequency_counts() {
        let ds = Dataset::new(
            vec![
                Example { input: vec![0.0], label: 0 },
                Example { input: vec![0.0], label: 1 },
                Example { input: vec![0.0], label: 1 },
                Example { input: vec![0.0], label: 1 },
            ],
            2,
        )
        .unwrap();
        assert_eq!(ds.majority_class_frequency(), 0.75);
    }
}
