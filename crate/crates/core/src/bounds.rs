//! Closed-form generalization-bound arithmetic.
//!
//! Two finite-sample upper bounds are compared: the bound for a universal
//! predictor trained on everything (one capacity term at the pooled sample
//! count) and the bound for an aggregate of per-domain experts combined on
//! an independent second phase (a Hoeffding transfer term, an aggregator
//! capacity term, and a mixture of per-domain expert capacity terms). All
//! logarithms are natural.

use crate::error::{Error, Result};

/// Every symbol the bound expressions need: sample counts, mixture weights,
/// capacity (VC-dimension) figures, the confidence level, the loss bound,
/// and the universal constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    /// Phase-1 sample total n (experts see n_i = π_i·n each).
    pub n: u64,
    /// Phase-2 sample total m.
    pub m: u64,
    /// Source mixture weights π_i (must sum to 1, all positive).
    pub pi: Vec<f64>,
    /// Target mixture weights π′_i (must sum to 1, nonnegative).
    pub pi_prime: Vec<f64>,
    /// VC-dimension of the universal hypothesis space.
    pub d0: f64,
    /// VC-dimension of the aggregator hypothesis space.
    pub d_tilde: f64,
    /// Per-domain expert VC-dimensions.
    pub d_i: Vec<f64>,
    /// Confidence parameter, in (0, 1).
    pub delta: f64,
    /// Upper bound on the loss function.
    pub c_l: f64,
    /// The universal constant in front of the capacity terms.
    pub c_const: f64,
}

impl BoundConfig {
    pub fn d(&self) -> usize {
        self.pi.len()
    }

    pub fn n_total(&self) -> f64 {
        (self.n + self.m) as f64
    }

    /// Per-domain phase-1 count n_i = π_i·n.
    pub fn n_i(&self, i: usize) -> f64 {
        self.pi[i] * self.n as f64
    }

    /// c_π = Σ π′_i / √π_i.
    pub fn c_pi(&self) -> f64 {
        self.pi
            .iter()
            .zip(&self.pi_prime)
            .map(|(p, pp)| pp / p.sqrt())
            .sum()
    }

    pub fn with_delta(&self, delta: f64) -> BoundConfig {
        BoundConfig {
            delta,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d == 0 {
            return Err(Error::config("at least one domain required"));
        }
        if self.pi_prime.len() != d || self.d_i.len() != d {
            return Err(Error::config(
                "pi, pi_prime and d_i must have one entry per domain",
            ));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::config("sample counts must be >= 1"));
        }
        let sum_pi: f64 = self.pi.iter().sum();
        let sum_pp: f64 = self.pi_prime.iter().sum();
        if (sum_pi - 1.0).abs() > 1e-12 || (sum_pp - 1.0).abs() > 1e-12 {
            return Err(Error::config("mixture weights must sum to 1"));
        }
        if self.pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::config("pi entries must be positive"));
        }
        if self.pi_prime.iter().any(|&p| p < 0.0) {
            return Err(Error::config("pi_prime entries must be nonnegative"));
        }
        if self.d0 <= 0.0 || self.d_tilde <= 0.0 || self.d_i.iter().any(|&v| v <= 0.0) {
            return Err(Error::config("VC dimensions must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must lie in (0, 1)"));
        }
        if self.c_l <= 0.0 || self.c_const <= 0.0 {
            return Err(Error::config("c_l and c_const must be positive"));
        }
        Ok(())
    }

    fn require_counts_at_least_two(&self) -> Result<()> {
        if self.n_total() < 2.0 || (self.m as f64) < 2.0 {
            return Err(Error::config("sample totals must be >= 2"));
        }
        for i in 0..self.d() {
            if self.n_i(i) < 2.0 {
                return Err(Error::config(format!(
                    "per-domain count n_{i} = {} must be >= 2",
                    self.n_i(i)
                )));
            }
        }
        Ok(())
    }

    fn require_equal_phases(&self) -> Result<()> {
        if self.n != self.m {
            return Err(Error::config("this expression assumes m = n"));
        }
        Ok(())
    }
}

/// Capacity proxy for an `n_params`-parameter network: `n·ln n`.
pub fn vc_dim_approx(n_params: f64) -> Result<f64> {
    if n_params < 1.0 || !n_params.is_finite() {
        return Err(Error::config("n_params must be >= 1"));
    }
    Ok(n_params * n_params.ln())
}

/// √((d0·ln N + ln(1/δ)) / N), scaled by the universal constant.
pub fn upp_universal_expr(d0: f64, n_total: f64, delta: f64, c_const: f64) -> f64 {
    c_const * ((d0 * n_total.ln() + (1.0 / delta).ln()) / n_total).sqrt()
}

/// c_π·√(c_L·ln(1/δ) / (2m)).
pub fn hoeffding_transfer_term(c_pi: f64, c_l: f64, m: f64, delta: f64) -> f64 {
    c_pi * (c_l * (1.0 / delta).ln() / (2.0 * m)).sqrt()
}

/// √((d̃·ln m + ln(1/δ)) / m), scaled by the universal constant.
pub fn aggregator_capacity_term(d_tilde: f64, m: f64, delta: f64, c_const: f64) -> f64 {
    c_const * ((d_tilde * m.ln() + (1.0 / delta).ln()) / m).sqrt()
}

/// One domain's capacity term √((d_i·ln n_i + ln(1/δ)) / n_i).
pub fn expert_capacity_term_single(d_i: f64, n_i: f64, delta: f64) -> f64 {
    ((d_i * n_i.ln() + (1.0 / delta).ln()) / n_i).sqrt()
}

/// The three itemized pieces of the ensemble bound.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleTerms {
    pub hoeffding: f64,
    pub aggregator: f64,
    pub experts: f64,
}

impl EnsembleTerms {
    pub fn total(&self) -> f64 {
        self.hoeffding + self.aggregator + self.experts
    }
}

pub fn upp_ensemble_terms(cfg: &BoundConfig) -> Result<EnsembleTerms> {
    cfg.validate()?;
    cfg.require_counts_at_least_two()?;
    let m = cfg.m as f64;
    let hoeffding = hoeffding_transfer_term(cfg.c_pi(), cfg.c_l, m, cfg.delta);
    let aggregator = aggregator_capacity_term(cfg.d_tilde, m, cfg.delta, cfg.c_const);
    let experts = cfg.c_const * expert_capacity_sum_unchecked(cfg);
    Ok(EnsembleTerms {
        hoeffding,
        aggregator,
        experts,
    })
}

fn expert_capacity_sum_unchecked(cfg: &BoundConfig) -> f64 {
    (0..cfg.d())
        .map(|i| cfg.pi_prime[i] * expert_capacity_term_single(cfg.d_i[i], cfg.n_i(i), cfg.delta))
        .sum()
}

/// The mixture of per-domain expert capacity terms,
/// C·Σ π′_i·√((d_i·ln n_i + ln(1/δ)) / n_i) — the leading piece once the
/// ensemble bound is rearranged around the corollary's ε.
pub fn expert_capacity_sum(cfg: &BoundConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.require_counts_at_least_two()?;
    Ok(cfg.c_const * expert_capacity_sum_unchecked(cfg))
}

/// Upper bound on the aggregated predictor's target risk gap.
pub fn upp_ensemble(cfg: &BoundConfig) -> Result<f64> {
    Ok(upp_ensemble_terms(cfg)?.total())
}

/// Upper bound on the universal predictor's target risk gap (sample total
/// N = n + m).
pub fn upp_universal(cfg: &BoundConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.n_total() < 2.0 {
        return Err(Error::config("N must be >= 2"));
    }
    Ok(upp_universal_expr(
        cfg.d0,
        cfg.n_total(),
        cfg.delta,
        cfg.c_const,
    ))
}

/// c(δ) = inf_i √((ln 2n + ln(1/δ)/d0) / (ln n_i + ln(3/δ)/d_i)),
/// defined under m = n.
pub fn c_delta(cfg: &BoundConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.require_equal_phases()?;
    cfg.require_counts_at_least_two()?;
    let n = cfg.n as f64;
    let numerator = (2.0 * n).ln() + (1.0 / cfg.delta).ln() / cfg.d0;
    let value = (0..cfg.d())
        .map(|i| {
            let denom = cfg.n_i(i).ln() + (3.0 / cfg.delta).ln() / cfg.d_i[i];
            (numerator / denom).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(value)
}

/// ε = c_π·√(c_L·ln(3/δ)/N) + C·√((2d̃·ln(N/2) + 2ln(3/δ))/N), under m = n.
pub fn corollary_epsilon(cfg: &BoundConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.require_equal_phases()?;
    cfg.require_counts_at_least_two()?;
    let n_total = cfg.n_total();
    let log3d = (3.0 / cfg.delta).ln();
    let first = cfg.c_pi() * (cfg.c_l * log3d / n_total).sqrt();
    let second = cfg.c_const
        * ((2.0 * cfg.d_tilde * (n_total / 2.0).ln() + 2.0 * log3d) / n_total).sqrt();
    Ok(first + second)
}

#[derive(Debug, Clone, Copy)]
pub struct Remark3Report {
    /// Exact condition Σ π′_i·√(2d_i)/√π_i ≤ c(δ)·√d0.
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub c_delta: f64,
    /// Equal-mixture shortcut 2·Σ d_i ≤ d0.
    pub simplified_holds: bool,
    pub sum_2di: f64,
}

/// Evaluate the expert-capacity condition under which the ensemble bound at
/// confidence δ/3 stays below the universal bound at δ (plus ε).
pub fn check_remark3(cfg: &BoundConfig) -> Result<Remark3Report> {
    let c_delta = c_delta(cfg)?;
    let lhs: f64 = (0..cfg.d())
        .map(|i| cfg.pi_prime[i] * (2.0 * cfg.d_i[i]).sqrt() / cfg.pi[i].sqrt())
        .sum();
    let rhs = c_delta * cfg.d0.sqrt();
    let sum_2di = 2.0 * cfg.d_i.iter().sum::<f64>();
    Ok(Remark3Report {
        holds: lhs <= rhs,
        lhs,
        rhs,
        c_delta,
        simplified_holds: sum_2di <= cfg.d0,
        sum_2di,
    })
}

/// Ratio of universal bound at δ to ensemble bound at δ/3 (the corollary's
/// confidence pairing). Requires equal N and δ across the two configs.
pub fn bound_ratio(cfg_universal: &BoundConfig, cfg_ensemble: &BoundConfig) -> Result<f64> {
    cfg_universal.validate()?;
    cfg_ensemble.validate()?;
    if cfg_universal.n + cfg_universal.m != cfg_ensemble.n + cfg_ensemble.m {
        return Err(Error::config("configs disagree on the sample total N"));
    }
    if cfg_universal.delta != cfg_ensemble.delta {
        return Err(Error::config("configs disagree on delta"));
    }
    let numerator = upp_universal(cfg_universal)?;
    let denominator = upp_ensemble(&cfg_ensemble.with_delta(cfg_ensemble.delta / 3.0))?;
    Ok(numerator / denominator)
}
