//! The 1-D toy regression task: an odd, discontinuous target with a cosine
//! ripple and quadratic growth, observed under Gaussian noise.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;

use super::{DomainDataset, Labels};

/// Noiseless target `sgn(x)·(3|cos x| + x²/2 + 3)` with `sgn(0) = 0`.
pub fn toy_target(x: f64) -> f64 {
    let sgn = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    };
    sgn * (3.0 * x.cos().abs() + x * x / 2.0 + 3.0)
}

/// Draw `(train, test)` sets with `x ~ U(x_range)` and `y = f(x) + N(0, σ²)`.
/// The test set uses an independent seed stream of the same distribution.
pub fn gen_toy_regression(
    n_train: usize,
    n_test: usize,
    noise_sd: f64,
    x_range: (f64, f64),
    seed: u64,
) -> Result<(DomainDataset, DomainDataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::config("n_train and n_test must be >= 1"));
    }
    if noise_sd < 0.0 || !noise_sd.is_finite() {
        return Err(Error::config("noise_sd must be finite and >= 0"));
    }
    let (lo, hi) = x_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::config(format!("degenerate x range [{lo}, {hi}]")));
    }
    let draw = |label: &str, n: usize| -> DomainDataset {
        let mut rng = rng::child_rng(seed, label, 0);
        let noise = Normal::new(0.0, 1.0).expect("unit normal");
        let mut features = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.gen_range(lo..hi);
            let y = toy_target(x) + noise_sd * noise.sample(&mut rng);
            features.push(vec![x]);
            targets.push(y);
        }
        DomainDataset {
            domain_id: 0,
            features,
            labels: Labels::Real(targets),
            pi: 1.0,
        }
    };
    Ok((draw("toy.train", n_train), draw("toy.test", n_test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_vanishes_at_origin() {
        assert_eq!(toy_target(0.0), 0.0);
    }

    #[test]
    fn target_is_odd() {
        for i in 0..200 {
            let x = -4.0 + 8.0 * (i as f64) / 199.0;
            assert!(
                (toy_target(-x) + toy_target(x)).abs() < 1e-12,
                "f is not odd at x = {x}"
            );
        }
    }

    #[test]
    fn analytic_value_at_half_pi() {
        let expected = 3.0 + std::f64::consts::PI.powi(2) / 8.0;
        assert!((toy_target(std::f64::consts::FRAC_PI_2) - expected).abs() < 1e-12);
    }

    #[test]
    fn generation_is_seed_deterministic_and_streams_independent() {
        let (tr1, te1) = gen_toy_regression(50, 60, 0.5, (-4.0, 4.0), 11).unwrap();
        let (tr2, te2) = gen_toy_regression(50, 60, 0.5, (-4.0, 4.0), 11).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        assert_eq!(tr1.len(), 50);
        assert_eq!(te1.len(), 60);
        assert_ne!(tr1.features[0], te1.features[0]);
    }

    #[test]
    fn noiseless_samples_lie_on_the_target() {
        let (train, _) = gen_toy_regression(30, 1, 0.0, (-4.0, 4.0), 3).unwrap();
        let ys = train.real_labels().unwrap();
        for (x, y) in train.features.iter().zip(ys) {
            assert!((toy_target(x[0]) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_range() {
        assert!(gen_toy_regression(10, 10, 0.5, (4.0, 4.0), 0).is_err());
        assert!(gen_toy_regression(10, 10, 0.5, (5.0, 4.0), 0).is_err());
    }
}
