//! Weight-space averaging add-ons: pretrained/fine-tuned interpolation and
//! the beta-density moving average of a parameter trajectory.

use statrs::distribution::{Beta, Continuous};

use crate::error::{Error, Result};
use crate::nn::MlpModel;

/// `(1 − alpha)·pretrained + alpha·finetuned`, elementwise.
pub fn weight_space_blend(
    pretrained: &MlpModel,
    finetuned: &MlpModel,
    wise_alpha: f64,
) -> Result<MlpModel> {
    pretrained.blend(finetuned, wise_alpha)
}

/// α_t: the Beta(β, β) density at (t + 0.5)/(T + 1).
pub fn bma_alpha(t: u64, horizon: u64, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::config("beta must be positive"));
    }
    if t > horizon {
        return Err(Error::input(format!("step {t} beyond horizon {horizon}")));
    }
    let x = (t as f64 + 0.5) / (horizon as f64 + 1.0);
    let dist = Beta::new(beta, beta).map_err(|e| Error::config(format!("beta dist: {e}")))?;
    Ok(dist.pdf(x))
}

/// Running beta-weighted average of a flat parameter trajectory.
#[derive(Debug, Clone)]
pub struct BmaState {
    average: Vec<f64>,
    weight_sum: f64,
    next_step: u64,
    horizon: u64,
    beta: f64,
}

impl BmaState {
    pub fn new(n_params: usize, horizon: u64, beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::config("beta must be positive"));
        }
        Ok(BmaState {
            average: vec![0.0; n_params],
            weight_sum: 0.0,
            next_step: 0,
            horizon,
            beta,
        })
    }

    pub fn average(&self) -> &[f64] {
        &self.average
    }

    pub fn steps_taken(&self) -> u64 {
        self.next_step
    }
}

/// Fold step-`t` parameters into the average:
/// `avg ← (Σ_{k<t} α_k / Σ_{k≤t} α_k)·avg + (α_t / Σ_{k≤t} α_k)·θ_t`.
/// Steps must arrive in order 0, 1, ..., T.
pub fn bma_update(state: &mut BmaState, current: &[f64]) -> Result<()> {
    if current.len() != state.average.len() {
        return Err(Error::shape("parameter length changed mid-average"));
    }
    let t = state.next_step;
    let alpha_t = bma_alpha(t, state.horizon, state.beta)?;
    let new_sum = state.weight_sum + alpha_t;
    let keep = state.weight_sum / new_sum;
    let add = alpha_t / new_sum;
    for (avg, cur) in state.average.iter_mut().zip(current) {
        *avg = keep * *avg + add * cur;
    }
    state.weight_sum = new_sum;
    state.next_step = t + 1;
    Ok(())
}
