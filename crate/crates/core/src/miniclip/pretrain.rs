//! Mock contrastive pretraining.
//!
//! Stands in for web-scale pretraining: the vision encoder and the class
//! embeddings are trained jointly so that the cosine/temperature zero-shot
//! rule beats chance, then everything is frozen. The text encoder is a
//! fixed seeded map from the start — prompts influence text features only
//! through it.

use rand::seq::SliceRandom;

use crate::datagen::DomainDataset;
use crate::error::{Error, Result};
use crate::linalg::{cosine_with_grads, norm, softmax};
use crate::nn::{Activation, FlatAdamW, GradientSet, MlpModel, OptimizerState};
use crate::rng;

use super::{prompt_input, EncoderPair, PromptExpert};

#[derive(Debug, Clone)]
pub struct EncoderConfig {
    pub d_f: usize,
    pub embed_dim: usize,
    pub prompt_len: usize,
    pub vision_hidden: Vec<usize>,
    pub text_hidden: Vec<usize>,
    pub tau: f64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            d_f: 32,
            embed_dim: 16,
            prompt_len: 16,
            vision_hidden: vec![32],
            text_hidden: vec![48],
            tau: 0.01,
            epochs: 30,
            lr: 3e-3,
            batch_size: 64,
        }
    }
}

fn seeded_class_embeddings(n_classes: usize, embed_dim: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, 1.0).expect("normal");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_classes);
    let mut rng = rng::rng_from_seed(seed);
    for _ in 0..n_classes {
        let mut row: Vec<f64> = (0..embed_dim).map(|_| normal.sample(&mut rng)).collect();
        let n = norm(&row);
        for v in &mut row {
            *v /= n;
        }
        rows.push(row);
    }
    rows
}

fn build_pair(cfg: &EncoderConfig, feature_dim: usize, n_classes: usize, seed: u64) -> Result<EncoderPair> {
    if cfg.d_f < 2 || cfg.embed_dim < 2 {
        return Err(Error::config("d_f and embed_dim must be >= 2"));
    }
    if cfg.prompt_len == 0 {
        return Err(Error::config("prompt_len must be >= 1"));
    }
    let mut vision_sizes = vec![feature_dim];
    vision_sizes.extend_from_slice(&cfg.vision_hidden);
    vision_sizes.push(cfg.d_f);
    let mut text_sizes = vec![cfg.prompt_len * cfg.embed_dim + cfg.embed_dim];
    text_sizes.extend_from_slice(&cfg.text_hidden);
    text_sizes.push(cfg.d_f);
    let pair = EncoderPair {
        vision_encoder: MlpModel::seeded(
            &vision_sizes,
            Activation::Tanh,
            rng::child_seed(seed, "pretrain.vision", 0),
        )?,
        text_encoder: MlpModel::seeded(
            &text_sizes,
            Activation::Tanh,
            rng::child_seed(seed, "pretrain.text", 0),
        )?,
        class_embeddings: seeded_class_embeddings(
            n_classes,
            cfg.embed_dim,
            rng::child_seed(seed, "pretrain.class_embeddings", 0),
        ),
        tau: cfg.tau,
        d_f: cfg.d_f,
        embed_dim: cfg.embed_dim,
    };
    pair.validate()?;
    Ok(pair)
}

/// Jointly train the vision encoder and the class embeddings on a pooled
/// sample of the given domains (cross-entropy through the zero-shot softmax
/// with a null prompt), then freeze. `epochs = 0` returns the seeded
/// initialization exactly.
pub fn pretrain_mock_encoders(
    suite: &[DomainDataset],
    cfg: &EncoderConfig,
    seed: u64,
) -> Result<EncoderPair> {
    if suite.is_empty() {
        return Err(Error::input("pretraining pool is empty"));
    }
    for d in suite {
        d.validate()?;
    }
    let n_classes = suite[0].n_classes()?;
    let feature_dim = suite[0].feature_dim();
    let mut pair = build_pair(cfg, feature_dim, n_classes, seed)?;
    if cfg.epochs == 0 {
        return Ok(pair);
    }

    let pool: Vec<(&[f64], usize)> = suite
        .iter()
        .flat_map(|d| {
            let labels = match &d.labels {
                crate::datagen::Labels::Class { labels, .. } => labels,
                _ => unreachable!("validated as classification above"),
            };
            d.features
                .iter()
                .zip(labels)
                .map(|(x, &y)| (x.as_slice(), y))
        })
        .collect();
    if pool.is_empty() {
        return Err(Error::input("pretraining pool is empty"));
    }

    let null_prompt = PromptExpert::zeros(usize::MAX, cfg.prompt_len, cfg.embed_dim)?;
    let mut vision_opt = OptimizerState::adamw_default(cfg.lr)?;
    let mut embed_opt = FlatAdamW::new(n_classes * cfg.embed_dim, cfg.lr, Default::default());
    let mut order: Vec<usize> = (0..pool.len()).collect();

    for epoch in 0..cfg.epochs {
        let mut shuffle_rng = rng::child_rng(seed, "pretrain.shuffle", epoch as u64);
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            // Text features for the current class embeddings (null prompt).
            let text_traces: Vec<_> = (0..n_classes)
                .map(|c| {
                    pair.text_encoder
                        .forward_trace(&prompt_input(&null_prompt, &pair.class_embeddings[c]))
                })
                .collect::<Result<_>>()?;
            let texts: Vec<&[f64]> = text_traces.iter().map(|t| t.output()).collect();

            let mut vision_grads = GradientSet::zeros_like(&pair.vision_encoder);
            let mut d_texts = vec![vec![0.0; cfg.d_f]; n_classes];
            for &idx in chunk {
                let (x, y) = pool[idx];
                let trace = pair.vision_encoder.forward_trace(x)?;
                let v = trace.output();
                let mut logits = Vec::with_capacity(n_classes);
                let mut grad_pairs = Vec::with_capacity(n_classes);
                for t in &texts {
                    let (cos, g_v, g_t) = cosine_with_grads(v, t)?;
                    logits.push(cos / cfg.tau);
                    grad_pairs.push((g_v, g_t));
                }
                let mut d_logits = softmax(&logits)?;
                d_logits[y] -= 1.0;
                let mut d_v = vec![0.0; cfg.d_f];
                for (c, (g_v, g_t)) in grad_pairs.iter().enumerate() {
                    let upstream = d_logits[c] / cfg.tau;
                    for (dv, g) in d_v.iter_mut().zip(g_v) {
                        *dv += upstream * g;
                    }
                    for (dt, g) in d_texts[c].iter_mut().zip(g_t) {
                        *dt += upstream * g;
                    }
                }
                pair.vision_encoder.backward(&trace, &d_v, &mut vision_grads)?;
            }
            // Push text-feature gradients through the frozen text encoder
            // into the class-embedding slice of its input.
            let mut embed_grads = vec![0.0; n_classes * cfg.embed_dim];
            let mut sink = GradientSet::zeros_like(&pair.text_encoder);
            for (c, trace) in text_traces.iter().enumerate() {
                let d_input = pair.text_encoder.backward(trace, &d_texts[c], &mut sink)?;
                let tail = &d_input[cfg.prompt_len * cfg.embed_dim..];
                for (g, d) in embed_grads[c * cfg.embed_dim..(c + 1) * cfg.embed_dim]
                    .iter_mut()
                    .zip(tail)
                {
                    *g += d;
                }
            }
            vision_opt.step(&mut pair.vision_encoder, &vision_grads, None)?;
            let mut flat: Vec<f64> = pair.class_embeddings.concat();
            embed_opt.step(&mut flat, &embed_grads)?;
            for (c, row) in pair.class_embeddings.iter_mut().enumerate() {
                row.copy_from_slice(&flat[c * cfg.embed_dim..(c + 1) * cfg.embed_dim]);
            }
        }
    }
    // Freeze with unit-norm class embeddings.
    for row in &mut pair.class_embeddings {
        let n = norm(row);
        if n > 0.0 {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
    }
    Ok(pair)
}
