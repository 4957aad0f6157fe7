//! Training losses and their gradients with respect to the prediction.

use crate::error::{Error, Result};
use crate::linalg::{log_softmax, softmax};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// −log softmax(prediction)[target class]; prediction entries are logits.
    CrossEntropyLogits,
    /// Mean squared difference over the prediction coordinates.
    Mse,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::CrossEntropyLogits => "cross_entropy_logits",
            LossKind::Mse => "mse",
        }
    }
}

/// A supervised target: a class index for cross-entropy, a real vector for
/// regression.
#[derive(Debug, Clone, PartialEq)]
pub enum LossTarget {
    Class(usize),
    Vector(Vec<f64>),
}

impl LossTarget {
    pub fn scalar(y: f64) -> Self {
        LossTarget::Vector(vec![y])
    }
}

fn validate_prediction(prediction: &[f64]) -> Result<()> {
    if prediction.is_empty() {
        return Err(Error::input("empty prediction"));
    }
    if prediction.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite prediction".into()));
    }
    Ok(())
}

pub fn loss_eval(kind: LossKind, prediction: &[f64], target: &LossTarget) -> Result<f64> {
    validate_prediction(prediction)?;
    match (kind, target) {
        (LossKind::CrossEntropyLogits, LossTarget::Class(c)) => {
            if *c >= prediction.len() {
                return Err(Error::input(format!(
                    "target class {} out of range for {} logits",
                    c,
                    prediction.len()
                )));
            }
            Ok(-log_softmax(prediction)?[*c])
        }
        (LossKind::Mse, LossTarget::Vector(t)) => {
            if t.len() != prediction.len() {
                return Err(Error::shape(format!(
                    "mse target length {} vs prediction length {}",
                    t.len(),
                    prediction.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("non-finite target".into()));
            }
            let n = prediction.len() as f64;
            Ok(prediction
                .iter()
                .zip(t)
                .map(|(p, y)| (p - y) * (p - y))
                .sum::<f64>()
                / n)
        }
        (LossKind::CrossEntropyLogits, LossTarget::Vector(_)) => Err(Error::input(
            "cross_entropy_logits needs a class-index target",
        )),
        (LossKind::Mse, LossTarget::Class(_)) => Err(Error::input("mse needs a vector target")),
    }
}

/// Loss value together with dL/d(prediction).
pub fn loss_grad(
    kind: LossKind,
    prediction: &[f64],
    target: &LossTarget,
) -> Result<(f64, Vec<f64>)> {
    let loss = loss_eval(kind, prediction, target)?;
    let grad = match (kind, target) {
        (LossKind::CrossEntropyLogits, LossTarget::Class(c)) => {
            let mut g = softmax(prediction)?;
            g[*c] -= 1.0;
            g
        }
        (LossKind::Mse, LossTarget::Vector(t)) => {
            let n = prediction.len() as f64;
            prediction
                .iter()
                .zip(t)
                .map(|(p, y)| 2.0 * (p - y) / n)
                .collect()
        }
        _ => unreachable!("loss_eval already rejected the mismatch"),
    };
    Ok((loss, grad))
}
