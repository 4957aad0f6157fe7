//! Deterministic synthetic data: the 1-D toy regression task and a
//! multi-domain classification suite sharing one labeling rule, plus the
//! disjoint two-phase split used by the guided fine-tuning.

mod io;
mod suite;
mod toy;

pub use io::{export_datasets, import_datasets};
pub use suite::{
    domain_affine_map, gen_domain_suite, latent_prototypes, nearest_prototype, AffineMap,
    SuiteConfig,
};
pub use toy::{gen_toy_regression, toy_target};

use crate::error::{Error, Result};
use crate::rng;
use rand::seq::SliceRandom;

/// Labels of one dataset: class indices or real regression targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Class { labels: Vec<usize>, n_classes: usize },
    Real(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class { labels, .. } => labels.len(),
            Labels::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> Labels {
        match self {
            Labels::Class { labels, n_classes } => Labels::Class {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
            Labels::Real(v) => Labels::Real(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// One source or target domain: features, labels, and its mixture weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    pub domain_id: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Labels,
    /// Mixture weight π_i of this domain within its suite.
    pub pi: f64,
}

impl DomainDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn class_labels(&self) -> Result<&[usize]> {
        match &self.labels {
            Labels::Class { labels, .. } => Ok(labels),
            Labels::Real(_) => Err(Error::input("expected classification labels")),
        }
    }

    pub fn real_labels(&self) -> Result<&[f64]> {
        match &self.labels {
            Labels::Real(v) => Ok(v),
            Labels::Class { .. } => Err(Error::input("expected regression labels")),
        }
    }

    pub fn n_classes(&self) -> Result<usize> {
        match &self.labels {
            Labels::Class { n_classes, .. } => Ok(*n_classes),
            Labels::Real(_) => Err(Error::input("regression dataset has no classes")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::input(format!("domain {} is empty", self.domain_id)));
        }
        if self.labels.len() != self.len() {
            return Err(Error::shape(format!(
                "domain {}: {} labels for {} samples",
                self.domain_id,
                self.labels.len(),
                self.len()
            )));
        }
        let dim = self.feature_dim();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::shape(format!(
                    "domain {}: row {} has {} features, expected {}",
                    self.domain_id,
                    i,
                    row.len(),
                    dim
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "domain {}: non-finite feature in row {}",
                    self.domain_id, i
                )));
            }
        }
        if let Labels::Class { labels, n_classes } = &self.labels {
            if let Some(bad) = labels.iter().find(|&&c| c >= *n_classes) {
                return Err(Error::input(format!(
                    "domain {}: label {} outside 0..{}",
                    self.domain_id, bad, n_classes
                )));
            }
        }
        Ok(())
    }

    /// New dataset holding the given sample indices (order preserved).
    pub fn subset(&self, idx: &[usize]) -> DomainDataset {
        DomainDataset {
            domain_id: self.domain_id,
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: self.labels.select(idx),
            pi: self.pi,
        }
    }
}

/// Validate a whole suite: mixture weights sum to 1 and the class space is
/// identical across domains.
pub fn validate_suite(suite: &[DomainDataset]) -> Result<()> {
    if suite.is_empty() {
        return Err(Error::input("empty suite"));
    }
    for d in suite {
        d.validate()?;
    }
    let total_pi: f64 = suite.iter().map(|d| d.pi).sum();
    if (total_pi - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!(
            "mixture weights sum to {total_pi}, expected 1"
        )));
    }
    let classes: Vec<Option<usize>> = suite
        .iter()
        .map(|d| match &d.labels {
            Labels::Class { n_classes, .. } => Some(*n_classes),
            Labels::Real(_) => None,
        })
        .collect();
    if classes.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::input("domains disagree on the label space"));
    }
    Ok(())
}

/// Disjoint per-domain split into phase-1 (expert training) and phase-2
/// (aggregation / fine-tuning) halves.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub step1: Vec<DomainDataset>,
    pub step2: Vec<DomainDataset>,
}

/// Random per-domain partition without replacement. Both halves keep the
/// domain id and mixture weight.
pub fn split_step_data(
    suite: &[DomainDataset],
    step2_fraction: f64,
    seed: u64,
) -> Result<SplitPair> {
    if !(0.0 < step2_fraction && step2_fraction < 1.0) {
        return Err(Error::config("step2_fraction must lie strictly in (0, 1)"));
    }
    let mut step1 = Vec::with_capacity(suite.len());
    let mut step2 = Vec::with_capacity(suite.len());
    for domain in suite {
        domain.validate()?;
        let n = domain.len();
        let n2 = (step2_fraction * n as f64).round() as usize;
        if n2 == 0 || n2 >= n {
            return Err(Error::input(format!(
                "domain {} has {} samples, too few for a {}/{} split",
                domain.domain_id,
                n,
                n - n2,
                n2
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = rng::child_rng(seed, "split", domain.domain_id as u64);
        idx.shuffle(&mut rng);
        let mut second: Vec<usize> = idx[..n2].to_vec();
        let mut first: Vec<usize> = idx[n2..].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        step1.push(domain.subset(&first));
        step2.push(domain.subset(&second));
    }
    Ok(SplitPair { step1, step2 })
}

/// Per-class-per-domain k-shot subsample (keeps every sample of a class that
/// has fewer than `k`).
pub fn few_shot_filter(domain: &DomainDataset, k: usize, seed: u64) -> Result<DomainDataset> {
    if k == 0 {
        return Err(Error::config("k must be >= 1"));
    }
    let labels = domain.class_labels()?;
    let n_classes = domain.n_classes()?;
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        per_class[c].push(i);
    }
    let mut keep = Vec::new();
    for (c, idx) in per_class.iter().enumerate() {
        let mut idx = idx.clone();
        let mut rng = rng::child_rng(seed, "few_shot", (domain.domain_id * 100_003 + c) as u64);
        idx.shuffle(&mut rng);
        idx.truncate(k);
        keep.extend(idx);
    }
    keep.sort_unstable();
    Ok(domain.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(n: usize) -> DomainDataset {
        DomainDataset {
            domain_id: 0,
            features: (0..n).map(|i| vec![i as f64]).collect(),
            labels: Labels::Real((0..n).map(|i| i as f64).collect()),
            pi: 1.0,
        }
    }

    #[test]
    fn half_split_of_100_is_50_50_disjoint() {
        let suite = vec![ds(100)];
        let pair = split_step_data(&suite, 0.5, 9).unwrap();
        assert_eq!(pair.step1[0].len(), 50);
        assert_eq!(pair.step2[0].len(), 50);
        let mut all: Vec<i64> = pair.step1[0]
            .features
            .iter()
            .chain(&pair.step2[0].features)
            .map(|f| f[0] as i64)
            .collect();
        all.sort_unstable();
        let expected: Vec<i64> = (0..100).collect();
        assert_eq!(all, expected, "halves must partition the index set");
    }

    #[test]
    fn same_seed_same_split_different_seed_differs() {
        let suite = vec![ds(120)];
        let a = split_step_data(&suite, 0.5, 1).unwrap();
        let b = split_step_data(&suite, 0.5, 1).unwrap();
        let c = split_step_data(&suite, 0.5, 2).unwrap();
        assert_eq!(a.step2[0].features, b.step2[0].features);
        assert_ne!(a.step2[0].features, c.step2[0].features);
    }

    #[test]
    fn rejects_degenerate_splits() {
        let suite = vec![ds(1)];
        assert!(split_step_data(&suite, 0.5, 0).is_err());
        let suite = vec![ds(10)];
        assert!(split_step_data(&suite, 0.0, 0).is_err());
        assert!(split_step_data(&suite, 1.0, 0).is_err());
    }

    #[test]
    fn few_shot_keeps_k_per_class() {
        let domain = DomainDataset {
            domain_id: 3,
            features: (0..40).map(|i| vec![i as f64]).collect(),
            labels: Labels::Class {
                labels: (0..40).map(|i| i % 4).collect(),
                n_classes: 4,
            },
            pi: 1.0,
        };
        let shot = few_shot_filter(&domain, 3, 5).unwrap();
        assert_eq!(shot.len(), 12);
        let labels = shot.class_labels().unwrap();
        for c in 0..4 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 3);
        }
    }
}
