//! Off-the-shelf fine-tuning regularizers: batch entropy minimization with
//! a diversity anchor, and the margin-augmented similarity softmax.

use crate::error::{Error, Result};
use crate::linalg::log_softmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegKind {
    None,
    EntropyUeo,
    Mms,
}

impl RegKind {
    pub fn name(self) -> &'static str {
        match self {
            RegKind::None => "none",
            RegKind::EntropyUeo => "entropy_ueo",
            RegKind::Mms => "mms",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(RegKind::None),
            "entropy_ueo" => Ok(RegKind::EntropyUeo),
            "mms" => Ok(RegKind::Mms),
            other => Err(Error::config(format!("unknown regularizer `{other}`"))),
        }
    }
}

/// Regularizer selection plus every hyperparameter the phase-2 objective and
/// the weight-averaging add-ons consume.
#[derive(Debug, Clone)]
pub struct RegularizerConfig {
    pub kind: RegKind,
    /// Weight of the regularizer inside the phase-2 objective.
    pub alpha: f64,
    /// Margin scale of the similarity-softmax loss.
    pub lambda_margin: f64,
    /// Interpolation point of the pretrained/fine-tuned weight blend.
    pub wise_alpha: f64,
    /// Shape parameter of the beta-density moving average.
    pub bma_beta: f64,
    pub batch_size: usize,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        RegularizerConfig {
            kind: RegKind::None,
            alpha: 0.1,
            lambda_margin: 0.1,
            wise_alpha: 0.5,
            bma_beta: 0.5,
            batch_size: 32,
        }
    }
}

impl RegularizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::config("alpha must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.wise_alpha) {
            return Err(Error::config("wise_alpha must lie in [0, 1]"));
        }
        if self.bma_beta <= 0.0 {
            return Err(Error::config("bma_beta must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        Ok(())
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum()
}

fn validate_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::input("empty probability vector"));
    }
    if p.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(Error::input("probabilities must be finite and nonnegative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-6 {
        return Err(Error::input(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// Mean per-sample entropy minus the entropy of the batch-mean distribution:
/// `(1/B)·Σ_x H(p(x)) − H(p̄)`. Natural log. Zero both for a uniform batch
/// and for a batch of identical one-hot predictions.
pub fn ueo_entropy(batch_probs: &[Vec<f64>]) -> Result<f64> {
    if batch_probs.is_empty() {
        return Err(Error::input("empty batch"));
    }
    let b = batch_probs.len() as f64;
    let c = batch_probs[0].len();
    let mut mean = vec![0.0; c];
    let mut sum_h = 0.0;
    for p in batch_probs {
        if p.len() != c {
            return Err(Error::shape("ragged probability batch"));
        }
        validate_simplex(p)?;
        sum_h += entropy(p);
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v / b;
        }
    }
    Ok(sum_h / b - entropy(&mean))
}

/// Margin-augmented similarity softmax for one sample:
/// `−log [ exp(s_y/τ) / Σ_c exp((s_c + λ·(1 − t_sim[y][c]))/τ) ]`,
/// where `s_c` are image/text similarity scores and `t_sim[y][c]` is the
/// similarity between the target's and class c's text representations. With
/// λ = 0 this is exactly the plain cross-entropy over `s/τ`.
pub fn mms_loss(
    sims: &[f64],
    target: usize,
    text_sims_to_target: &[f64],
    lambda: f64,
    tau: f64,
) -> Result<f64> {
    if sims.is_empty() {
        return Err(Error::input("empty similarity vector"));
    }
    if target >= sims.len() {
        return Err(Error::input("target class out of range"));
    }
    if text_sims_to_target.len() != sims.len() {
        return Err(Error::shape("text similarity row length mismatch"));
    }
    if tau <= 0.0 {
        return Err(Error::config("temperature must be positive"));
    }
    let logits: Vec<f64> = sims
        .iter()
        .zip(text_sims_to_target)
        .map(|(s, t)| (s + lambda * (1.0 - t)) / tau)
        .collect();
    // The numerator keeps the unshifted target similarity.
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln() + m;
    Ok(lse - sims[target] / tau)
}

/// Inputs accepted by the regularizer dispatch.
#[derive(Debug, Clone)]
pub enum RegInput<'a> {
    /// Per-sample probability vectors (entropy regularizer).
    BatchProbs(&'a [Vec<f64>]),
    /// Per-sample (similarity row, target, target-row text similarities)
    /// triplets plus the temperature (margin softmax; the scalar is the
    /// batch mean).
    Similarity {
        sims: &'a [Vec<f64>],
        targets: &'a [usize],
        text_sims: &'a [Vec<f64>],
        tau: f64,
    },
}

/// Evaluate the configured regularizer to a scalar.
pub fn regularizer_eval(cfg: &RegularizerConfig, input: &RegInput) -> Result<f64> {
    cfg.validate()?;
    match (cfg.kind, input) {
        (RegKind::None, _) => Ok(0.0),
        (RegKind::EntropyUeo, RegInput::BatchProbs(batch)) => ueo_entropy(batch),
        (RegKind::Mms, RegInput::Similarity { sims, targets, text_sims, tau }) => {
            if sims.is_empty() {
                return Err(Error::input("empty batch"));
            }
            if sims.len() != targets.len() || sims.len() != text_sims.len() {
                return Err(Error::shape("similarity batch lengths disagree"));
            }
            let mut total = 0.0;
            for ((s, &y), t) in sims.iter().zip(*targets).zip(*text_sims) {
                total += mms_loss(s, y, t, cfg.lambda_margin, *tau)?;
            }
            Ok(total / sims.len() as f64)
        }
        _ => Err(Error::input("regularizer kind does not match its input")),
    }
}
