//! Central finite-difference oracle for the reverse-mode gradients.

use crate::error::{Error, Result};

use super::backprop::{backprop_grads, Batch};
use super::loss::LossKind;
use super::MlpModel;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    /// Flat index of the worst parameter.
    pub worst_param: usize,
    pub n_params: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Relative error with an absolute floor, so exactly-zero gradients compare
/// against the finite-difference noise floor instead of dividing by zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-4);
    (analytic - numeric).abs() / denom
}

/// Compares `backprop_grads` against central finite differences parameter by
/// parameter.
///
/// For relu models the caller is responsible for evaluating away from the
/// activation kinks (no pre-activation within ~10·fd_step of zero); the
/// two-sided difference straddles the kink otherwise and the comparison is
/// meaningless.
pub fn grad_check(
    model: &MlpModel,
    batch: &Batch,
    loss_kind: LossKind,
    per_sample_weights: Option<&[f64]>,
    fd_step: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    if fd_step <= 0.0 || !fd_step.is_finite() {
        return Err(Error::config("fd_step must be positive"));
    }
    let (_, grads) = backprop_grads(model, batch, loss_kind, per_sample_weights)?;
    let analytic = grads.flat();
    let mut probe = model.clone();
    let mut params = model.params_flat();

    let mut max_rel_err = 0.0;
    let mut worst_param = 0;
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + fd_step;
        probe.set_params_flat(&params)?;
        let (loss_plus, _) = backprop_grads(&probe, batch, loss_kind, per_sample_weights)?;
        params[i] = orig - fd_step;
        probe.set_params_flat(&params)?;
        let (loss_minus, _) = backprop_grads(&probe, batch, loss_kind, per_sample_weights)?;
        params[i] = orig;

        let numeric = (loss_plus - loss_minus) / (2.0 * fd_step);
        let rel = relative_error(analytic[i], numeric);
        if rel > max_rel_err {
            max_rel_err = rel;
            worst_param = i;
        }
    }
    Ok(GradCheckReport {
        max_rel_err,
        worst_param,
        n_params: params.len(),
        tol,
        pass: max_rel_err <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LossTarget};
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn quadratic_scalar_matches_to_machine_noise() {
        // f(theta) = theta^2 via y = theta * x at x = 1, target 0: the
        // central difference of a quadratic is exact up to rounding.
        let mut model = MlpModel::zeros(&[1, 1], Activation::Identity).unwrap();
        model.layers_mut()[0].weights = vec![1.0];
        let batch = Batch::new(vec![vec![1.0]], vec![LossTarget::scalar(0.0)]).unwrap();
        let report = grad_check(&model, &batch, LossKind::Mse, None, 1e-5, 1e-8).unwrap();
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn wide_tanh_net_passes_at_1e4() {
        let model = MlpModel::seeded(&[1, 40, 40, 1], Activation::Tanh, 2024).unwrap();
        let mut rng = rng::rng_from_seed(77);
        let inputs: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-3.0..3.0)]).collect();
        let targets: Vec<LossTarget> = (0..8)
            .map(|_| LossTarget::scalar(rng.gen_range(-5.0..5.0)))
            .collect();
        let batch = Batch::new(inputs, targets).unwrap();
        let report = grad_check(&model, &batch, LossKind::Mse, None, 1e-5, 1e-4).unwrap();
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn relu_net_away_from_kinks_passes() {
        let model = MlpModel::seeded(&[2, 12, 3], Activation::Relu, 5).unwrap();
        let mut rng = rng::rng_from_seed(6);
        // Keep resampling until every pre-activation is far from zero.
        let mut batch = None;
        'outer: for _ in 0..200 {
            let input = vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let trace = model.forward_trace(&input).unwrap();
            for a in &trace.activations[1..trace.activations.len() - 1] {
                if a.iter().any(|v| v.abs() < 1e-4) {
                    continue 'outer;
                }
            }
            batch = Some(
                Batch::new(vec![input], vec![LossTarget::Vector(vec![0.1, -0.2, 0.4])]).unwrap(),
            );
            break;
        }
        let batch = batch.expect("found a kink-free input");
        let report = grad_check(&model, &batch, LossKind::Mse, None, 1e-6, 1e-4).unwrap();
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn weighted_cross_entropy_batch_passes() {
        let model = MlpModel::seeded(&[3, 10, 4], Activation::Tanh, 13).unwrap();
        let mut rng = rng::rng_from_seed(14);
        let inputs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<LossTarget> =
            (0..5).map(|_| LossTarget::Class(rng.gen_range(0..4))).collect();
        let weights: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..2.0)).collect();
        let batch = Batch::new(inputs, targets).unwrap();
        let report = grad_check(
            &model,
            &batch,
            LossKind::CrossEntropyLogits,
            Some(&weights),
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(report.pass, "max rel err {}", report.max_rel_err);
    }

    #[test]
    fn rejects_non_positive_step() {
        let model = MlpModel::zeros(&[1, 1], Activation::Identity).unwrap();
        let batch = Batch::new(vec![vec![1.0]], vec![LossTarget::scalar(0.0)]).unwrap();
        assert!(grad_check(&model, &batch, LossKind::Mse, None, 0.0, 1e-4).is_err());
    }
}
