//! Minimal differentiable fully-connected network engine.
//!
//! A model is a stack of dense layers `a_{l+1} = act(W_l a_l + b_l)` with a
//! single hidden activation shared by all hidden layers and an identity
//! output layer. Weights are row-major `(out_dim, in_dim)`. Everything is
//! `f64`: the bound formulas and the finite-difference gradient checks need
//! the precision.

mod backprop;
mod checkpoint;
mod gradcheck;
mod loss;
mod optim;

pub use backprop::{backprop_grads, Batch};
pub use checkpoint::{load_model, read_model_block, save_model, write_model_block};
pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{loss_eval, loss_grad, LossKind, LossTarget};
pub use optim::{
    adamw_step_flat, sgd_step_flat, AdamHyper, FlatAdamW, FreezeMask, OptimKind, OptimizerState,
};

use rand::distributions::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::rng;

/// Hidden-layer activation. The output layer is always identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the post-activation value.
    pub fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

/// One dense layer's parameters (or, reused, its gradients).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Row-major `(out_dim, in_dim)`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerParams {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerParams {
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }
}

/// A fully-connected network; houses the hypothesis spaces of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    layers: Vec<LayerParams>,
    activation: Activation,
}

/// Per-layer post-activation values from a forward pass, kept for backprop.
/// `activations[0]` is the input itself.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }
}

/// Per-parameter gradients mirroring an [`MlpModel`] layout.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub layers: Vec<LayerParams>,
}

impl GradientSet {
    pub fn zeros_like(model: &MlpModel) -> Self {
        GradientSet {
            layers: model
                .layer_sizes
                .windows(2)
                .map(|w| LayerParams::zeros(w[0], w[1]))
                .collect(),
        }
    }

    pub fn congruent_with(&self, model: &MlpModel) -> bool {
        self.layers.len() == model.layers.len()
            && self
                .layers
                .iter()
                .zip(&model.layers)
                .all(|(g, p)| g.weights.len() == p.weights.len() && g.biases.len() == p.biases.len())
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for w in &mut l.weights {
                *w *= factor;
            }
            for b in &mut l.biases {
                *b *= factor;
            }
        }
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::config(
            "layer_sizes needs an input and an output width",
        ));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::config("layer widths must be positive"));
    }
    Ok(())
}

impl MlpModel {
    /// All-zero parameters.
    pub fn zeros(layer_sizes: &[usize], activation: Activation) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let layers = layer_sizes
            .windows(2)
            .map(|w| LayerParams::zeros(w[0], w[1]))
            .collect();
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            activation,
        })
    }

    /// Xavier-uniform weights, zero biases, from a dedicated seed.
    pub fn seeded(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut model = MlpModel::zeros(layer_sizes, activation)?;
        let mut rng = rng::rng_from_seed(seed);
        for (l, layer) in model.layers.iter_mut().enumerate() {
            let fan_in = layer_sizes[l] as f64;
            let fan_out = layer_sizes[l + 1] as f64;
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            for w in &mut layer.weights {
                *w = dist.sample(&mut rng);
            }
        }
        Ok(model)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    /// n(H) = Σ_l (in_l · out_l + out_l).
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = self.forward_trace(input)?;
        Ok(trace.activations.pop().expect("trace has an output layer"))
    }

    /// Forward pass keeping every layer's post-activation for backprop.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace> {
        if input.len() != self.input_dim() {
            return Err(Error::shape(format!(
                "input length {} does not match input width {}",
                input.len(),
                self.input_dim()
            )));
        }
        let n_layers = self.layers.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(input.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let is_output = l + 1 == n_layers;
            let in_dim = self.layer_sizes[l];
            let out_dim = self.layer_sizes[l + 1];
            let prev = &activations[l];
            let mut out = vec![0.0; out_dim];
            for (o, out_v) in out.iter_mut().enumerate() {
                let row = &layer.weights[o * in_dim..(o + 1) * in_dim];
                let mut z = layer.biases[o];
                for (w, x) in row.iter().zip(prev) {
                    z += w * x;
                }
                *out_v = if is_output { z } else { self.activation.apply(z) };
            }
            activations.push(out);
        }
        Ok(Trace { activations })
    }

    /// Reverse pass. Accumulates parameter gradients into `grads` (must be
    /// shape-congruent) and returns dL/d(input).
    pub fn backward(
        &self,
        trace: &Trace,
        d_output: &[f64],
        grads: &mut GradientSet,
    ) -> Result<Vec<f64>> {
        if d_output.len() != self.output_dim() {
            return Err(Error::shape(format!(
                "d_output length {} does not match output width {}",
                d_output.len(),
                self.output_dim()
            )));
        }
        if !grads.congruent_with(self) {
            return Err(Error::shape("gradient set not congruent with model"));
        }
        let n_layers = self.layers.len();
        let mut upstream = d_output.to_vec();
        for l in (0..n_layers).rev() {
            let is_output = l + 1 == n_layers;
            let in_dim = self.layer_sizes[l];
            let out_dim = self.layer_sizes[l + 1];
            let inputs = &trace.activations[l];
            let outputs = &trace.activations[l + 1];
            let layer = &self.layers[l];
            let g = &mut grads.layers[l];
            let mut d_inputs = vec![0.0; in_dim];
            for o in 0..out_dim {
                let act_grad = if is_output {
                    1.0
                } else {
                    self.activation.grad_from_output(outputs[o])
                };
                let d_z = upstream[o] * act_grad;
                g.biases[o] += d_z;
                let row = o * in_dim;
                for i in 0..in_dim {
                    g.weights[row + i] += d_z * inputs[i];
                    d_inputs[i] += layer.weights[row + i] * d_z;
                }
            }
            upstream = d_inputs;
        }
        Ok(upstream)
    }

    /// All parameters in checkpoint order: per layer, weights row-major then
    /// biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(format!(
                "flat parameter vector has {} entries, model has {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut idx = 0;
        for l in &mut self.layers {
            l.weights.copy_from_slice(&flat[idx..idx + l.weights.len()]);
            idx += l.weights.len();
            l.biases.copy_from_slice(&flat[idx..idx + l.biases.len()]);
            idx += l.biases.len();
        }
        Ok(())
    }

    /// Elementwise convex combination `(1-alpha)·self + alpha·other`.
    pub fn blend(&self, other: &MlpModel, alpha: f64) -> Result<MlpModel> {
        if self.layer_sizes != other.layer_sizes {
            return Err(Error::shape("blend requires identical architectures"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config("blend alpha must lie in [0, 1]"));
        }
        let a = self.params_flat();
        let b = other.params_flat();
        let mixed: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (1.0 - alpha) * x + alpha * y)
            .collect();
        let mut out = self.clone();
        out.set_params_flat(&mixed)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_single_layer_passes_input_through() {
        let mut model = MlpModel::zeros(&[2, 2], Activation::Tanh).unwrap();
        model.layers_mut()[0].weights = vec![1.0, 0.0, 0.0, 1.0];
        let out = model.forward(&[3.0, -1.0]).unwrap();
        assert_eq!(out, vec![3.0, -1.0]);
    }

    #[test]
    fn zero_weights_yield_bias() {
        let mut model = MlpModel::zeros(&[3, 1], Activation::Relu).unwrap();
        model.layers_mut()[0].biases = vec![0.5];
        let out = model.forward(&[9.0, -2.0, 0.1]).unwrap();
        assert_eq!(out, vec![0.5]);
    }

    #[test]
    fn forward_matches_hand_rolled_scalar_evaluation() {
        // 1 -> 3 -> 1 tanh net evaluated entry by entry, independently of
        // the layer loop.
        let model = MlpModel::seeded(&[1, 3, 1], Activation::Tanh, 991).unwrap();
        let x = 0.7;
        let l0 = &model.layers()[0];
        let h: Vec<f64> = (0..3)
            .map(|o| (l0.weights[o] * x + l0.biases[o]).tanh())
            .collect();
        let l1 = &model.layers()[1];
        let expected = l1.weights[0] * h[0] + l1.weights[1] * h[1] + l1.weights[2] * h[2]
            + l1.biases[0];
        let got = model.forward(&[x]).unwrap()[0];
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let model = MlpModel::zeros(&[2, 2], Activation::Tanh).unwrap();
        assert!(model.forward(&[1.0]).is_err());
    }

    #[test]
    fn toy_universal_param_count_is_h2_plus_4h_plus_1() {
        for h in [60usize, 80, 100] {
            let model = MlpModel::zeros(&[1, h, h, 1], Activation::Tanh).unwrap();
            assert_eq!(model.param_count(), h * h + 4 * h + 1);
        }
        let m60 = MlpModel::zeros(&[1, 60, 60, 1], Activation::Tanh).unwrap();
        assert_eq!(m60.param_count(), 3841);
    }

    #[test]
    fn params_flat_round_trip() {
        let model = MlpModel::seeded(&[2, 5, 3], Activation::Relu, 4).unwrap();
        let flat = model.params_flat();
        assert_eq!(flat.len(), model.param_count());
        let mut copy = MlpModel::zeros(&[2, 5, 3], Activation::Relu).unwrap();
        copy.set_params_flat(&flat).unwrap();
        assert_eq!(copy.params_flat(), flat);
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = MlpModel::seeded(&[4, 8, 2], Activation::Tanh, 123).unwrap();
        let b = MlpModel::seeded(&[4, 8, 2], Activation::Tanh, 123).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
    }

    #[test]
    fn blend_endpoints_are_exact() {
        let a = MlpModel::seeded(&[2, 3, 1], Activation::Tanh, 1).unwrap();
        let b = MlpModel::seeded(&[2, 3, 1], Activation::Tanh, 2).unwrap();
        assert_eq!(a.blend(&b, 0.0).unwrap().params_flat(), a.params_flat());
        assert_eq!(a.blend(&b, 1.0).unwrap().params_flat(), b.params_flat());
        let mid = a.blend(&b, 0.5).unwrap().params_flat();
        for ((m, x), y) in mid.iter().zip(a.params_flat()).zip(b.params_flat()) {
            assert!((m - 0.5 * (x + y)).abs() < 1e-15);
        }
    }
}
