//! Cross-modal attention: per-sample simplex weights over the experts.
//!
//! A query map (dense `d_f → d_f` with bias) transforms the vision feature;
//! a key map (a learned length-C combination with scalar bias, applied
//! across the class axis of each expert's `(C, d_f)` text-feature matrix)
//! produces one `d_f` key per expert. The weights are the softmax of the
//! query/key cosines.

use crate::error::{Error, Result};
use crate::linalg::{cosine, softmax};
use crate::miniclip::EncoderPair;

#[derive(Debug, Clone, PartialEq)]
pub struct CmAttnParams {
    /// Row-major `(d_f, d_f)` query weights.
    pub w_q: Vec<f64>,
    pub b_q: Vec<f64>,
    /// Length-C combination across the class axis.
    pub w_k: Vec<f64>,
    pub b_k: f64,
    pub d_f: usize,
    pub n_classes: usize,
    /// Softmax temperature over the cosines (1 = the bare softmax).
    pub temperature: f64,
}

impl CmAttnParams {
    /// Identity query map and mean-pooling key map: before any training the
    /// key of an expert is the mean of its class text features, so the
    /// initial weights already rank experts by feature-space similarity.
    pub fn init(d_f: usize, n_classes: usize) -> Result<Self> {
        if d_f == 0 || n_classes == 0 {
            return Err(Error::config("d_f and n_classes must be >= 1"));
        }
        let mut w_q = vec![0.0; d_f * d_f];
        for i in 0..d_f {
            w_q[i * d_f + i] = 1.0;
        }
        Ok(CmAttnParams {
            w_q,
            b_q: vec![0.0; d_f],
            w_k: vec![1.0 / n_classes as f64; n_classes],
            b_k: 0.0,
            d_f,
            n_classes,
            temperature: 1.0,
        })
    }

    pub fn param_count(&self) -> usize {
        self.w_q.len() + self.b_q.len() + self.w_k.len() + 1
    }

    /// Flat layout: w_q row-major, b_q, w_k, b_k.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.w_q);
        out.extend_from_slice(&self.b_q);
        out.extend_from_slice(&self.w_k);
        out.push(self.b_k);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape("attention parameter vector length mismatch"));
        }
        let (wq, rest) = flat.split_at(self.w_q.len());
        let (bq, rest) = rest.split_at(self.b_q.len());
        let (wk, bk) = rest.split_at(self.w_k.len());
        self.w_q.copy_from_slice(wq);
        self.b_q.copy_from_slice(bq);
        self.w_k.copy_from_slice(wk);
        self.b_k = bk[0];
        Ok(())
    }

    /// q(x) = W_q v + b_q for an already-encoded vision feature.
    pub fn query(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.d_f {
            return Err(Error::shape(format!(
                "feature length {} vs d_f {}",
                v.len(),
                self.d_f
            )));
        }
        let mut q = self.b_q.clone();
        for (r, qv) in q.iter_mut().enumerate() {
            let row = &self.w_q[r * self.d_f..(r + 1) * self.d_f];
            for (w, x) in row.iter().zip(v) {
                *qv += w * x;
            }
        }
        Ok(q)
    }

    /// k_i = Σ_c w_k[c]·T_i[c,·] + b_k for one expert's text features.
    pub fn key(&self, text_feats: &[Vec<f64>]) -> Result<Vec<f64>> {
        if text_feats.len() != self.n_classes {
            return Err(Error::shape(format!(
                "{} text rows vs C = {}",
                text_feats.len(),
                self.n_classes
            )));
        }
        let mut k = vec![self.b_k; self.d_f];
        for (c, row) in text_feats.iter().enumerate() {
            if row.len() != self.d_f {
                return Err(Error::shape("text feature width mismatch"));
            }
            for (kv, t) in k.iter_mut().zip(row) {
                *kv += self.w_k[c] * t;
            }
        }
        Ok(k)
    }
}

/// Keys for every expert.
pub fn cmattn_keys(params: &CmAttnParams, expert_text_feats: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<f64>>> {
    expert_text_feats.iter().map(|t| params.key(t)).collect()
}

/// Weights from an already-encoded vision feature.
pub fn cmattn_weights_from_feature(
    params: &CmAttnParams,
    feature: &[f64],
    expert_text_feats: &[Vec<Vec<f64>>],
) -> Result<Vec<f64>> {
    if expert_text_feats.is_empty() {
        return Err(Error::input("need at least one expert"));
    }
    let q = params.query(feature)?;
    let keys = cmattn_keys(params, expert_text_feats)?;
    let sims: Vec<f64> = keys
        .iter()
        .map(|k| Ok(cosine(&q, k)? / params.temperature))
        .collect::<Result<_>>()?;
    softmax(&sims)
}

/// Simplex weights w(x) over the experts for a raw input `x`.
pub fn cmattn_weights(
    params: &CmAttnParams,
    pair: &EncoderPair,
    x: &[f64],
    expert_text_feats: &[Vec<Vec<f64>>],
) -> Result<Vec<f64>> {
    let feature = pair.encode_image(x)?;
    cmattn_weights_from_feature(params, &feature, expert_text_feats)
}
