//! SGD and AdamW with decoupled weight decay, plus parameter freezing.
//!
//! The update kernels operate on flat parameter slices so that the same code
//! drives full models, prompt-expert embedding blocks, and the attention
//! module's parameter vector.

use crate::error::{Error, Result};

use super::{GradientSet, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimKind {
    Sgd,
    AdamW(AdamHyper),
}

/// One AdamW step over a flat parameter slice. `t` is the 1-based step count
/// after this update; moments are bias-corrected, weight decay is decoupled.
#[allow(clippy::too_many_arguments)]
pub fn adamw_step_flat(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
    hyper: AdamHyper,
    freeze: Option<&[bool]>,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), m.len());
    debug_assert_eq!(params.len(), v.len());
    let bc1 = 1.0 - hyper.beta1.powi(t as i32);
    let bc2 = 1.0 - hyper.beta2.powi(t as i32);
    for i in 0..params.len() {
        if freeze.is_some_and(|f| f[i]) {
            continue;
        }
        let g = grads[i];
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * (m_hat / (v_hat.sqrt() + hyper.eps) + hyper.weight_decay * params[i]);
    }
}

pub fn sgd_step_flat(params: &mut [f64], grads: &[f64], lr: f64, freeze: Option<&[bool]>) {
    debug_assert_eq!(params.len(), grads.len());
    for i in 0..params.len() {
        if freeze.is_some_and(|f| f[i]) {
            continue;
        }
        params[i] -= lr * grads[i];
    }
}

/// Self-contained AdamW state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct FlatAdamW {
    pub lr: f64,
    pub hyper: AdamHyper,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl FlatAdamW {
    pub fn new(n_params: usize, lr: f64, hyper: AdamHyper) -> Self {
        FlatAdamW {
            lr,
            hyper,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape("FlatAdamW: parameter length changed"));
        }
        self.step += 1;
        adamw_step_flat(
            params, grads, &mut self.m, &mut self.v, self.step, self.lr, self.hyper, None,
        );
        Ok(())
    }
}

/// Per-parameter freeze flags aligned with [`MlpModel::params_flat`].
#[derive(Debug, Clone)]
pub struct FreezeMask {
    flags: Vec<bool>,
}

impl FreezeMask {
    pub fn none(model: &MlpModel) -> Self {
        FreezeMask {
            flags: vec![false; model.param_count()],
        }
    }

    pub fn all(model: &MlpModel) -> Self {
        FreezeMask {
            flags: vec![true; model.param_count()],
        }
    }

    /// Freeze whole layers: `layer_frozen[l]` covers weights and biases of
    /// layer `l`.
    pub fn per_layer(model: &MlpModel, layer_frozen: &[bool]) -> Result<Self> {
        if layer_frozen.len() != model.layer_sizes().len() - 1 {
            return Err(Error::shape(format!(
                "{} layer flags for a {}-layer model",
                layer_frozen.len(),
                model.layer_sizes().len() - 1
            )));
        }
        let mut flags = Vec::with_capacity(model.param_count());
        for (l, frozen) in layer_frozen.iter().enumerate() {
            let n = model.layer_sizes()[l] * model.layer_sizes()[l + 1] + model.layer_sizes()[l + 1];
            flags.extend(std::iter::repeat(*frozen).take(n));
        }
        Ok(FreezeMask { flags })
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }
}

/// Optimizer state bound to one model's parameter layout.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimKind,
    learning_rate: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimKind, learning_rate: f64) -> Result<Self> {
        if learning_rate <= 0.0 || !learning_rate.is_finite() {
            return Err(Error::config("learning_rate must be positive"));
        }
        Ok(OptimizerState {
            kind,
            learning_rate,
            m: Vec::new(),
            v: Vec::new(),
            step: 0,
        })
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(OptimKind::Sgd, learning_rate)
    }

    pub fn adamw(learning_rate: f64, hyper: AdamHyper) -> Result<Self> {
        Self::new(OptimKind::AdamW(hyper), learning_rate)
    }

    /// AdamW with the default (β1=0.9, β2=0.999, eps=1e-8, no decay).
    pub fn adamw_default(learning_rate: f64) -> Result<Self> {
        Self::adamw(learning_rate, AdamHyper::default())
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update. Masked parameters (and their moment accumulators)
    /// are left untouched.
    pub fn step(
        &mut self,
        model: &mut MlpModel,
        grads: &GradientSet,
        freeze_mask: Option<&FreezeMask>,
    ) -> Result<()> {
        if !grads.congruent_with(model) {
            return Err(Error::shape("gradients not congruent with model"));
        }
        let n = model.param_count();
        if let Some(mask) = freeze_mask {
            if mask.flags.len() != n {
                return Err(Error::shape("freeze mask not congruent with model"));
            }
        }
        let mut params = model.params_flat();
        let grads_flat = grads.flat();
        match self.kind {
            OptimKind::Sgd => {
                sgd_step_flat(
                    &mut params,
                    &grads_flat,
                    self.learning_rate,
                    freeze_mask.map(FreezeMask::flags),
                );
                self.step += 1;
            }
            OptimKind::AdamW(hyper) => {
                if self.m.is_empty() {
                    self.m = vec![0.0; n];
                    self.v = vec![0.0; n];
                }
                if self.m.len() != n {
                    return Err(Error::shape("optimizer moments not congruent with model"));
                }
                self.step += 1;
                adamw_step_flat(
                    &mut params,
                    &grads_flat,
                    &mut self.m,
                    &mut self.v,
                    self.step,
                    self.learning_rate,
                    hyper,
                    freeze_mask.map(FreezeMask::flags),
                );
            }
        }
        model.set_params_flat(&params)
    }
}
