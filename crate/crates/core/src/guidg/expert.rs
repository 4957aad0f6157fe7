//! Phase 1: per-domain prompt-expert training against frozen encoders.

use rand::seq::SliceRandom;

use crate::datagen::DomainDataset;
use crate::error::{Error, Result};
use crate::linalg::{cosine_with_grads, softmax};
use crate::miniclip::{prompt_input, EncoderPair, PromptExpert};
use crate::nn::{FlatAdamW, GradientSet};
use crate::rng;

#[derive(Debug, Clone, Copy)]
pub struct ExpertTrainStats {
    /// Summed cross-entropy over the domain before the first update.
    pub initial_loss: f64,
    /// Summed cross-entropy over the domain after the last epoch.
    pub final_loss: f64,
    pub epochs: usize,
}

fn domain_cross_entropy(
    pair: &EncoderPair,
    expert: &PromptExpert,
    features: &[Vec<f64>],
    labels: &[usize],
) -> Result<f64> {
    let texts = crate::miniclip::text_features(expert, pair)?;
    let mut total = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let p = crate::miniclip::zero_shot_predict(pair, x, &texts)?;
        total -= p[y].ln();
    }
    Ok(total)
}

/// Minimize the domain's cross-entropy over the prompt embeddings only.
/// Both encoders and the class embeddings stay frozen (they are borrowed
/// immutably); gradients reach the prompt through the text encoder's input.
pub fn train_domain_expert(
    pair: &EncoderPair,
    domain: &DomainDataset,
    expert: PromptExpert,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(PromptExpert, ExpertTrainStats)> {
    domain.validate()?;
    expert.validate()?;
    let labels = domain.class_labels()?.to_vec();
    let n_classes = domain.n_classes()?;
    if n_classes != pair.n_classes() {
        return Err(Error::shape(format!(
            "domain has {n_classes} classes, encoders have {}",
            pair.n_classes()
        )));
    }
    if expert.embed_dim != pair.embed_dim || expert.prompt_len != pair.prompt_len() {
        return Err(Error::shape("expert shape does not match the text encoder"));
    }
    let mut expert = expert;

    // Frozen vision features, computed once.
    let image_feats: Vec<Vec<f64>> = domain
        .features
        .iter()
        .map(|x| pair.encode_image(x))
        .collect::<Result<_>>()?;

    let initial_loss = domain_cross_entropy(pair, &expert, &domain.features, &labels)?;
    let prompt_dim = expert.prompt_len * expert.embed_dim;
    let mut opt = FlatAdamW::new(prompt_dim, lr, Default::default());
    let batch_size = 64usize;
    let mut order: Vec<usize> = (0..image_feats.len()).collect();

    for epoch in 0..epochs {
        let mut shuffle_rng = rng::child_rng(seed, "expert.shuffle", epoch as u64);
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(batch_size) {
            let text_traces: Vec<_> = (0..n_classes)
                .map(|c| {
                    pair.text_encoder
                        .forward_trace(&prompt_input(&expert, &pair.class_embeddings[c]))
                })
                .collect::<Result<_>>()?;
            let mut d_texts = vec![vec![0.0; pair.d_f]; n_classes];
            for &j in chunk {
                let v = &image_feats[j];
                let mut logits = Vec::with_capacity(n_classes);
                let mut text_grads = Vec::with_capacity(n_classes);
                for trace in &text_traces {
                    let (cos, _, g_t) = cosine_with_grads(v, trace.output())?;
                    logits.push(cos / pair.tau);
                    text_grads.push(g_t);
                }
                let mut d_logits = softmax(&logits)?;
                d_logits[labels[j]] -= 1.0;
                for (c, g_t) in text_grads.iter().enumerate() {
                    let upstream = d_logits[c] / pair.tau;
                    for (d, g) in d_texts[c].iter_mut().zip(g_t) {
                        *d += upstream * g;
                    }
                }
            }
            let mut prompt_grads = vec![0.0; prompt_dim];
            let mut sink = GradientSet::zeros_like(&pair.text_encoder);
            for (c, trace) in text_traces.iter().enumerate() {
                let d_input = pair.text_encoder.backward(trace, &d_texts[c], &mut sink)?;
                for (g, d) in prompt_grads.iter_mut().zip(&d_input[..prompt_dim]) {
                    *g += d;
                }
            }
            opt.step(&mut expert.embeddings, &prompt_grads)?;
        }
    }

    let final_loss = domain_cross_entropy(pair, &expert, &domain.features, &labels)?;
    Ok((
        expert,
        ExpertTrainStats {
            initial_loss,
            final_loss,
            epochs,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_domain_suite, SuiteConfig};
    use crate::miniclip::{pretrain_mock_encoders, EncoderConfig};

    fn fixture(seed: u64) -> (EncoderPair, Vec<DomainDataset>) {
        let suite =
            gen_domain_suite(&SuiteConfig::new(2, 3, 4, vec![60, 60], 0.8), seed).unwrap();
        let cfg = EncoderConfig {
            d_f: 8,
            embed_dim: 6,
            prompt_len: 4,
            vision_hidden: vec![10],
            text_hidden: vec![10],
            epochs: 8,
            lr: 3e-3,
            batch_size: 32,
            ..EncoderConfig::default()
        };
        let pair = pretrain_mock_encoders(&suite, &cfg, seed).unwrap();
        (pair, suite)
    }

    #[test]
    fn encoders_stay_bit_identical_and_loss_does_not_increase() {
        for seed in 0..3u64 {
            let (pair, suite) = fixture(seed);
            let before_vision: Vec<u64> = pair
                .vision_encoder
                .params_flat()
                .iter()
                .map(|v| v.to_bits())
                .collect();
            let before_text: Vec<u64> = pair
                .text_encoder
                .params_flat()
                .iter()
                .map(|v| v.to_bits())
                .collect();
            let expert =
                PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, seed + 100).unwrap();
            let (_, stats) =
                train_domain_expert(&pair, &suite[0], expert, 15, 2e-3, seed).unwrap();
            assert!(
                stats.final_loss <= stats.initial_loss,
                "seed {seed}: loss rose from {} to {}",
                stats.initial_loss,
                stats.final_loss
            );
            let after_vision: Vec<u64> = pair
                .vision_encoder
                .params_flat()
                .iter()
                .map(|v| v.to_bits())
                .collect();
            let after_text: Vec<u64> = pair
                .text_encoder
                .params_flat()
                .iter()
                .map(|v| v.to_bits())
                .collect();
            assert_eq!(before_vision, after_vision);
            assert_eq!(before_text, after_text);
        }
    }

    #[test]
    fn different_domains_yield_different_experts() {
        let (pair, suite) = fixture(7);
        let init = PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, 500).unwrap();
        let (a, _) = train_domain_expert(&pair, &suite[0], init.clone(), 10, 2e-3, 1).unwrap();
        let (b, _) = train_domain_expert(&pair, &suite[1], init, 10, 2e-3, 1).unwrap();
        let dist: f64 = a
            .embeddings
            .iter()
            .zip(&b.embeddings)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(dist > 0.0, "independent domains produced identical experts");
    }

    #[test]
    fn empty_domain_is_rejected() {
        let (pair, suite) = fixture(3);
        let empty = DomainDataset {
            domain_id: 9,
            features: vec![],
            labels: crate::datagen::Labels::Class {
                labels: vec![],
                n_classes: 3,
            },
            pi: 1.0,
        };
        let _ = suite;
        let expert = PromptExpert::zeros(9, pair.prompt_len(), pair.embed_dim).unwrap();
        assert!(train_domain_expert(&pair, &empty, expert, 3, 1e-3, 0).is_err());
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let (pair, suite) = fixture(11);
        let init = PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, 4).unwrap();
        let (a, _) = train_domain_expert(&pair, &suite[0], init.clone(), 8, 2e-3, 42).unwrap();
        let (b, _) = train_domain_expert(&pair, &suite[0], init, 8, 2e-3, 42).unwrap();
        let bits = |e: &PromptExpert| e.embeddings.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
