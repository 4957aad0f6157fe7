//! Delimited-text export/import of datasets, for cross-checking with
//! external tools.
//!
//! Format: a header `domain_id,label,f0,...,f{D-1}` followed by one row per
//! sample. Classification labels are bare integers, regression targets carry
//! a decimal point. Mixture weights are recomputed from sample counts on
//! import; import re-validates every dataset invariant.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{validate_suite, DomainDataset, Labels};

pub fn export_datasets(datasets: &[DomainDataset], path: &Path) -> Result<()> {
    validate_suite(datasets)?;
    let dim = datasets[0].feature_dim();
    let mut out = String::new();
    out.push_str("domain_id,label");
    for f in 0..dim {
        out.push_str(&format!(",f{f}"));
    }
    out.push('\n');
    for d in datasets {
        for (i, row) in d.features.iter().enumerate() {
            out.push_str(&d.domain_id.to_string());
            out.push(',');
            match &d.labels {
                Labels::Class { labels, .. } => out.push_str(&labels[i].to_string()),
                Labels::Real(v) => out.push_str(&format!("{:?}", v[i])),
            }
            for x in row {
                out.push_str(&format!(",{x:?}"));
            }
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn import_datasets(path: &Path) -> Result<Vec<DomainDataset>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "domain_id" || cols[1] != "label" {
        return Err(Error::Parse(format!("bad dataset header `{header}`")));
    }
    let dim = cols.len() - 2;

    struct Partial {
        features: Vec<Vec<f64>>,
        raw_labels: Vec<String>,
    }
    let mut domains: Vec<(usize, Partial)> = Vec::new();
    let mut classification = true;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(Error::Parse(format!(
                "row {}: {} fields, expected {}",
                lineno + 2,
                fields.len(),
                dim + 2
            )));
        }
        let domain_id: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad domain_id", lineno + 2)))?;
        let label = fields[1].to_string();
        if label.contains('.') || label.contains('e') || label.contains('E') {
            classification = false;
        }
        let row: Vec<f64> = fields[2..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad feature `{t}`", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        match domains.iter_mut().find(|(id, _)| *id == domain_id) {
            Some((_, p)) => {
                p.features.push(row);
                p.raw_labels.push(label);
            }
            None => domains.push((
                domain_id,
                Partial {
                    features: vec![row],
                    raw_labels: vec![label],
                },
            )),
        }
    }
    if domains.is_empty() {
        return Err(Error::Parse("dataset file has no rows".into()));
    }
    let total: usize = domains.iter().map(|(_, p)| p.features.len()).sum();
    let mut n_classes = 0usize;
    if classification {
        for (_, p) in &domains {
            for l in &p.raw_labels {
                let c: usize = l
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad class label `{l}`")))?;
                n_classes = n_classes.max(c + 1);
            }
        }
    }
    let out: Vec<DomainDataset> = domains
        .into_iter()
        .map(|(domain_id, p)| {
            let labels = if classification {
                Labels::Class {
                    labels: p.raw_labels.iter().map(|l| l.parse().unwrap()).collect(),
                    n_classes,
                }
            } else {
                let reals: Result<Vec<f64>> = p
                    .raw_labels
                    .iter()
                    .map(|l| {
                        l.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad real label `{l}`")))
                    })
                    .collect();
                Labels::Real(reals?)
            };
            Ok(DomainDataset {
                domain_id,
                pi: p.features.len() as f64 / total as f64,
                features: p.features,
                labels,
            })
        })
        .collect::<Result<_>>()?;
    validate_suite(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_domain_suite, gen_toy_regression, SuiteConfig};

    #[test]
    fn classification_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("suite.csv");
        let suite =
            gen_domain_suite(&SuiteConfig::new(3, 4, 5, vec![40, 44, 48], 1.0), 3).unwrap();
        export_datasets(&suite, &path).unwrap();
        let back = import_datasets(&path).unwrap();
        assert_eq!(suite.len(), back.len());
        for (a, b) in suite.iter().zip(&back) {
            assert_eq!(a.domain_id, b.domain_id);
            assert_eq!(a.features, b.features);
            assert_eq!(a.labels, b.labels);
            assert!((a.pi - b.pi).abs() < 1e-12);
        }
    }

    #[test]
    fn regression_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        let (train, _) = gen_toy_regression(25, 5, 0.5, (-4.0, 4.0), 8).unwrap();
        export_datasets(&[train.clone()], &path).unwrap();
        let back = import_datasets(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].features, train.features);
        assert_eq!(back[0].labels, train.labels);
    }

    #[test]
    fn import_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "domain_id,label,f0,f1\n0,1,0.5\n").unwrap();
        assert!(import_datasets(&path).is_err());
    }
}
