//! Small dense-vector helpers shared across the crate.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity. Rejects zero-norm vectors (cosine is undefined there).
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "cosine: lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::input("cosine of zero-norm vector is undefined"));
    }
    Ok(dot(a, b) / (na * nb))
}

/// Cosine similarity together with its gradients w.r.t. both arguments:
/// ∂cos/∂a = b/(|a||b|) − cos·a/|a|², and symmetrically for b.
pub fn cosine_with_grads(a: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let cos = cosine(a, b)?;
    let na = norm(a);
    let nb = norm(b);
    let grad_a: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| bi / (na * nb) - cos * ai / (na * na))
        .collect();
    let grad_b: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| ai / (na * nb) - cos * bi / (nb * nb))
        .collect();
    Ok((cos, grad_a, grad_b))
}

/// Numerically safe softmax (max-subtraction before exponentiation).
///
/// With the CLIP temperature 0.01 the logits reach magnitude ~100, so the
/// shift is mandatory rather than cosmetic.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::input("softmax of empty slice"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("softmax over non-finite logits".into()));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// log(softmax(logits)) without intermediate underflow.
pub fn log_softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::input("log_softmax of empty slice"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("log_softmax over non-finite logits".into()));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln() + m;
    Ok(logits.iter().map(|v| v - lse).collect())
}

/// argmax index; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
