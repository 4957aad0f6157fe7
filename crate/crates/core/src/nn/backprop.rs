//! Batched loss evaluation with exact reverse-mode gradients.

use crate::error::{Error, Result};

use super::loss::{loss_grad, LossKind, LossTarget};
use super::{GradientSet, MlpModel};

/// A supervised batch. Inputs and targets are parallel slices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<LossTarget>,
}

impl Batch {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<LossTarget>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::input("empty batch"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::shape(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Batch { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Weighted-sum loss over the batch and its exact gradients.
///
/// `per_sample_weights` default to 1, realizing a plain sum; nonnegative
/// weights realize the per-sample loss weighting of the guided fine-tuning
/// objective.
pub fn backprop_grads(
    model: &MlpModel,
    batch: &Batch,
    loss_kind: LossKind,
    per_sample_weights: Option<&[f64]>,
) -> Result<(f64, GradientSet)> {
    if let Some(w) = per_sample_weights {
        if w.len() != batch.len() {
            return Err(Error::shape(format!(
                "{} weights vs {} samples",
                w.len(),
                batch.len()
            )));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::input("per-sample weights must be finite and >= 0"));
        }
    }
    let mut grads = GradientSet::zeros_like(model);
    let mut total = 0.0;
    for (j, (input, target)) in batch.inputs.iter().zip(&batch.targets).enumerate() {
        let w = per_sample_weights.map_or(1.0, |ws| ws[j]);
        let trace = model.forward_trace(input)?;
        let (loss, mut d_pred) = loss_grad(loss_kind, trace.output(), target)?;
        total += w * loss;
        for g in &mut d_pred {
            *g *= w;
        }
        model.backward(&trace, &d_pred, &mut grads)?;
    }
    Ok((total, grads))
}
