//! Multi-domain classification suite with a shared labeling rule.
//!
//! All domains draw from one latent space: `n_classes` Gaussian prototypes,
//! samples scattered around their prototype and labeled by the nearest
//! prototype (rejection keeps the labeling exact). Each domain then pushes
//! its latent samples through a private affine map — a seeded rotation whose
//! angles scale with `domain_shift_strength`, plus a shift — so the labeling
//! rule is domain-invariant while the feature distributions drift apart.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;

use super::{DomainDataset, Labels};

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub n_domains: usize,
    pub n_classes: usize,
    pub feature_dim: usize,
    pub samples_per_domain: Vec<usize>,
    pub domain_shift_strength: f64,
    /// Standard deviation of the latent scatter around each prototype.
    pub class_spread: f64,
    /// Largest rotation angle (radians) per Givens plane at strength 1.
    pub max_angle: f64,
    /// Scale of the per-domain shift vector at strength 1.
    pub shift_scale: f64,
}

impl SuiteConfig {
    pub fn new(
        n_domains: usize,
        n_classes: usize,
        feature_dim: usize,
        samples_per_domain: Vec<usize>,
        domain_shift_strength: f64,
    ) -> Self {
        SuiteConfig {
            n_domains,
            n_classes,
            feature_dim,
            samples_per_domain,
            domain_shift_strength,
            class_spread: 0.35,
            max_angle: 0.8,
            shift_scale: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_domains < 2 {
            return Err(Error::config("need at least 2 domains"));
        }
        if self.n_classes < 2 {
            return Err(Error::config("need at least 2 classes"));
        }
        if self.feature_dim < 2 {
            return Err(Error::config("feature_dim must be >= 2"));
        }
        if self.samples_per_domain.len() != self.n_domains {
            return Err(Error::config(format!(
                "{} sample counts for {} domains",
                self.samples_per_domain.len(),
                self.n_domains
            )));
        }
        if self.samples_per_domain.iter().any(|&n| n < self.n_classes) {
            return Err(Error::config(
                "every domain needs at least n_classes samples",
            ));
        }
        if self.domain_shift_strength < 0.0 || !self.domain_shift_strength.is_finite() {
            return Err(Error::config("domain_shift_strength must be >= 0"));
        }
        Ok(())
    }
}

/// Invertible per-domain map `x = R z + b` with orthogonal `R`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    /// Row-major `(dim, dim)` rotation.
    pub rotation: Vec<f64>,
    pub shift: Vec<f64>,
    dim: usize,
}

impl AffineMap {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = self.shift.clone();
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.rotation[r * d..(r + 1) * d];
            for (w, zi) in row.iter().zip(z) {
                *o += w * zi;
            }
        }
        out
    }

    /// Exact inverse: `z = Rᵀ (x − b)`.
    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let centered: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
        let mut out = vec![0.0; d];
        for (c, o) in out.iter_mut().enumerate() {
            for r in 0..d {
                *o += self.rotation[r * d + c] * centered[r];
            }
        }
        out
    }
}

/// Left-multiply a Givens rotation G(p, q, theta) into `m` (row-major dim×dim).
fn apply_givens(m: &mut [f64], dim: usize, p: usize, q: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    for col in 0..dim {
        let a = m[p * dim + col];
        let b = m[q * dim + col];
        m[p * dim + col] = c * a - s * b;
        m[q * dim + col] = s * a + c * b;
    }
}

/// The seeded affine map of one domain. Strength 0 yields the identity map.
pub fn domain_affine_map(cfg: &SuiteConfig, domain_id: usize, seed: u64) -> AffineMap {
    let d = cfg.feature_dim;
    let mut rng = rng::child_rng(seed, "suite.domain_map", domain_id as u64);
    let mut rotation = vec![0.0; d * d];
    for i in 0..d {
        rotation[i * d + i] = 1.0;
    }
    let s = cfg.domain_shift_strength;
    for p in 0..d {
        for q in (p + 1)..d {
            let theta = s * cfg.max_angle * rand::Rng::gen_range(&mut rng, -1.0..1.0);
            apply_givens(&mut rotation, d, p, q, theta);
        }
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let shift: Vec<f64> = (0..d)
        .map(|_| s * cfg.shift_scale * normal.sample(&mut rng))
        .collect();
    AffineMap {
        rotation,
        shift,
        dim: d,
    }
}

/// The latent class prototypes shared by every domain.
pub fn latent_prototypes(cfg: &SuiteConfig, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::child_rng(seed, "suite.prototypes", 0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..cfg.n_classes)
        .map(|_| (0..cfg.feature_dim).map(|_| normal.sample(&mut rng)).collect())
        .collect()
}

pub fn nearest_prototype(z: &[f64], prototypes: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, p) in prototypes.iter().enumerate() {
        let d: f64 = z.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

pub fn gen_domain_suite(cfg: &SuiteConfig, seed: u64) -> Result<Vec<DomainDataset>> {
    cfg.validate()?;
    let prototypes = latent_prototypes(cfg, seed);
    let total: usize = cfg.samples_per_domain.iter().sum();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut suite = Vec::with_capacity(cfg.n_domains);
    for (i, &n_samples) in cfg.samples_per_domain.iter().enumerate() {
        let map = domain_affine_map(cfg, i, seed);
        let mut rng = rng::child_rng(seed, "suite.samples", i as u64);
        let base = n_samples / cfg.n_classes;
        let rem = n_samples % cfg.n_classes;
        let mut features = Vec::with_capacity(n_samples);
        let mut labels = Vec::with_capacity(n_samples);
        for c in 0..cfg.n_classes {
            let count = base + usize::from(c < rem);
            for _ in 0..count {
                // Rejection keeps the nearest-prototype rule exact.
                let mut tries = 0;
                let z = loop {
                    let z: Vec<f64> = prototypes[c]
                        .iter()
                        .map(|p| p + cfg.class_spread * normal.sample(&mut rng))
                        .collect();
                    if nearest_prototype(&z, &prototypes) == c {
                        break z;
                    }
                    tries += 1;
                    if tries > 10_000 {
                        return Err(Error::Numeric(
                            "class prototypes too close for the requested spread".into(),
                        ));
                    }
                };
                features.push(map.apply(&z));
                labels.push(c);
            }
        }
        suite.push(DomainDataset {
            domain_id: i,
            features,
            labels: Labels::Class {
                labels,
                n_classes: cfg.n_classes,
            },
            pi: n_samples as f64 / total as f64,
        });
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::validate_suite;

    fn cfg(strength: f64) -> SuiteConfig {
        SuiteConfig::new(3, 4, 6, vec![60, 60, 60], strength)
    }

    #[test]
    fn zero_strength_gives_identity_maps() {
        let c = cfg(0.0);
        for i in 0..3 {
            let map = domain_affine_map(&c, i, 5);
            for r in 0..6 {
                for col in 0..6 {
                    let expected = if r == col { 1.0 } else { 0.0 };
                    assert_eq!(map.rotation[r * 6 + col], expected);
                }
            }
            assert!(map.shift.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rotation_is_orthogonal_and_inverse_is_exact() {
        let c = cfg(1.0);
        let map = domain_affine_map(&c, 1, 7);
        let z = vec![0.3, -1.2, 0.8, 0.0, 2.0, -0.4];
        let back = map.invert(&map.apply(&z));
        for (a, b) in z.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn labels_recoverable_through_inverse_map() {
        let c = cfg(1.0);
        let suite = gen_domain_suite(&c, 42).unwrap();
        let prototypes = latent_prototypes(&c, 42);
        for domain in &suite {
            let map = domain_affine_map(&c, domain.domain_id, 42);
            let labels = domain.class_labels().unwrap();
            for (x, &y) in domain.features.iter().zip(labels) {
                let z = map.invert(x);
                assert_eq!(nearest_prototype(&z, &prototypes), y);
            }
        }
    }

    #[test]
    fn class_balance_within_one() {
        let c = SuiteConfig::new(2, 4, 4, vec![61, 62], 0.5);
        let suite = gen_domain_suite(&c, 9).unwrap();
        for domain in &suite {
            let labels = domain.class_labels().unwrap();
            let per_class: Vec<usize> = (0..4)
                .map(|k| labels.iter().filter(|&&l| l == k).count())
                .collect();
            let lo = *per_class.iter().min().unwrap();
            let hi = *per_class.iter().max().unwrap();
            assert!(hi - lo <= 1, "unbalanced classes: {per_class:?}");
        }
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        let c = SuiteConfig::new(3, 3, 4, vec![30, 50, 20], 1.0);
        let suite = gen_domain_suite(&c, 0).unwrap();
        validate_suite(&suite).unwrap();
        assert!((suite[0].pi - 0.3).abs() < 1e-15);
    }

    #[test]
    fn empirical_class_means_match_mapped_prototypes() {
        // Brute-force empirical mean oracle, 3 domains at strength 1.
        let c = SuiteConfig::new(3, 3, 5, vec![900, 900, 900], 1.0);
        let suite = gen_domain_suite(&c, 21).unwrap();
        let prototypes = latent_prototypes(&c, 21);
        for domain in &suite {
            let map = domain_affine_map(&c, domain.domain_id, 21);
            let labels = domain.class_labels().unwrap();
            for (cls, proto) in prototypes.iter().enumerate() {
                let idx: Vec<usize> = (0..domain.len()).filter(|&i| labels[i] == cls).collect();
                let n_c = idx.len() as f64;
                let mut mean = vec![0.0; c.feature_dim];
                for &i in &idx {
                    for (m, v) in mean.iter_mut().zip(&domain.features[i]) {
                        *m += v / n_c;
                    }
                }
                let expected = map.apply(proto);
                let err: f64 = mean
                    .iter()
                    .zip(&expected)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!(
                    err < 3.0 / n_c.sqrt(),
                    "domain {} class {cls}: mean off by {err}",
                    domain.domain_id
                );
            }
        }
    }

    #[test]
    fn rejects_invalid_sizes() {
        assert!(gen_domain_suite(&SuiteConfig::new(1, 4, 4, vec![20], 1.0), 0).is_err());
        assert!(gen_domain_suite(&SuiteConfig::new(2, 1, 4, vec![20, 20], 1.0), 0).is_err());
        assert!(gen_domain_suite(&SuiteConfig::new(2, 8, 4, vec![4, 20], 1.0), 0).is_err());
    }
}
