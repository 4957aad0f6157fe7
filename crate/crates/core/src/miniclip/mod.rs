//! A miniature frozen dual encoder standing in for CLIP: a vision MLP, a
//! text-analog MLP over (prompt ⊕ class-embedding) inputs, and the
//! cosine/temperature zero-shot rule.

mod pretrain;

pub use pretrain::{pretrain_mock_encoders, EncoderConfig};

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{argmax, cosine, norm, softmax};
use crate::nn::{read_model_block, write_model_block, MlpModel};
use crate::rng;
use rand_distr::{Distribution, Normal};

/// Frozen dual encoder plus the class-embedding table and temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderPair {
    pub vision_encoder: MlpModel,
    pub text_encoder: MlpModel,
    /// `(C, embed_dim)`; rows unit-norm after construction.
    pub class_embeddings: Vec<Vec<f64>>,
    pub tau: f64,
    pub d_f: usize,
    pub embed_dim: usize,
}

impl EncoderPair {
    pub fn n_classes(&self) -> usize {
        self.class_embeddings.len()
    }

    /// Prompt length the text encoder was built for.
    pub fn prompt_len(&self) -> usize {
        (self.text_encoder.input_dim() - self.embed_dim) / self.embed_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau <= 0.0 {
            return Err(Error::config("temperature must be positive"));
        }
        if self.vision_encoder.output_dim() != self.d_f
            || self.text_encoder.output_dim() != self.d_f
        {
            return Err(Error::shape("encoders must both emit d_f features"));
        }
        if self.class_embeddings.is_empty() {
            return Err(Error::config("need at least one class embedding"));
        }
        for row in &self.class_embeddings {
            if row.len() != self.embed_dim {
                return Err(Error::shape("class embedding width mismatch"));
            }
        }
        if (self.text_encoder.input_dim() - self.embed_dim) % self.embed_dim != 0 {
            return Err(Error::shape(
                "text encoder input must hold a whole number of prompt slots",
            ));
        }
        Ok(())
    }

    pub fn encode_image(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.vision_encoder.forward(x)
    }
}

/// A learnable per-domain prompt: `prompt_len` embedding rows prepended to
/// every class embedding before text encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptExpert {
    pub domain_id: usize,
    /// Flattened `(prompt_len, embed_dim)` row-major.
    pub embeddings: Vec<f64>,
    pub prompt_len: usize,
    pub embed_dim: usize,
}

impl PromptExpert {
    pub fn zeros(domain_id: usize, prompt_len: usize, embed_dim: usize) -> Result<Self> {
        if prompt_len == 0 || embed_dim == 0 {
            return Err(Error::config("prompt_len and embed_dim must be >= 1"));
        }
        Ok(PromptExpert {
            domain_id,
            embeddings: vec![0.0; prompt_len * embed_dim],
            prompt_len,
            embed_dim,
        })
    }

    /// Small seeded Gaussian init (std 0.02, the usual prompt-tuning scale).
    pub fn seeded(domain_id: usize, prompt_len: usize, embed_dim: usize, seed: u64) -> Result<Self> {
        let mut expert = Self::zeros(domain_id, prompt_len, embed_dim)?;
        let mut rng = rng::rng_from_seed(seed);
        let normal = Normal::new(0.0, 0.02).expect("normal");
        for v in &mut expert.embeddings {
            *v = normal.sample(&mut rng);
        }
        Ok(expert)
    }

    pub fn validate(&self) -> Result<()> {
        if self.embeddings.len() != self.prompt_len * self.embed_dim {
            return Err(Error::shape("prompt embedding length mismatch"));
        }
        if self.embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite prompt embedding".into()));
        }
        Ok(())
    }
}

/// Concatenate the flattened prompt with one class embedding — the text
/// encoder's input vector.
pub fn prompt_input(expert: &PromptExpert, class_embedding: &[f64]) -> Vec<f64> {
    let mut input = Vec::with_capacity(expert.embeddings.len() + class_embedding.len());
    input.extend_from_slice(&expert.embeddings);
    input.extend_from_slice(class_embedding);
    input
}

/// Text representation T_c of `class_id` under this expert: the frozen text
/// encoder applied to (prompt ⊕ class embedding).
pub fn build_prompt(expert: &PromptExpert, class_id: usize, pair: &EncoderPair) -> Result<Vec<f64>> {
    expert.validate()?;
    if expert.embed_dim != pair.embed_dim {
        return Err(Error::shape("expert and encoder embed_dim differ"));
    }
    let embedding = pair
        .class_embeddings
        .get(class_id)
        .ok_or_else(|| Error::input(format!("class {class_id} out of range")))?;
    pair.text_encoder.forward(&prompt_input(expert, embedding))
}

/// All C text representations for one expert (rows of a `(C, d_f)` matrix).
pub fn text_features(expert: &PromptExpert, pair: &EncoderPair) -> Result<Vec<Vec<f64>>> {
    (0..pair.n_classes())
        .map(|c| build_prompt(expert, c, pair))
        .collect()
}

/// Softmax over cosine similarities at temperature `tau`, on raw feature /
/// text vectors.
pub fn zero_shot_probs(image_feat: &[f64], texts: &[Vec<f64>], tau: f64) -> Result<Vec<f64>> {
    if texts.is_empty() {
        return Err(Error::input("no text representations given"));
    }
    if tau <= 0.0 {
        return Err(Error::config("temperature must be positive"));
    }
    let logits: Vec<f64> = texts
        .iter()
        .map(|t| Ok(cosine(image_feat, t)? / tau))
        .collect::<Result<_>>()?;
    softmax(&logits)
}

/// Class probabilities for a raw input `x` against prepared texts.
pub fn zero_shot_predict(pair: &EncoderPair, x: &[f64], texts: &[Vec<f64>]) -> Result<Vec<f64>> {
    let feat = pair.encode_image(x)?;
    zero_shot_probs(&feat, texts, pair.tau)
}

/// Zero-shot argmax class.
pub fn zero_shot_class(pair: &EncoderPair, x: &[f64], texts: &[Vec<f64>]) -> Result<usize> {
    Ok(argmax(&zero_shot_predict(pair, x, texts)?))
}

fn normalize_rows(rows: &mut [Vec<f64>]) {
    for row in rows {
        let n = norm(row);
        if n > 0.0 {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
    }
}

/// Checkpoint layout: a manifest header, then the two model blocks, then the
/// class-embedding rows.
pub fn save_encoders(pair: &EncoderPair, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("guidg-encoders v1\n");
    out.push_str(&format!("d_f {}\n", pair.d_f));
    out.push_str(&format!("embed_dim {}\n", pair.embed_dim));
    out.push_str(&format!("classes {}\n", pair.n_classes()));
    out.push_str(&format!("tau {:?}\n", pair.tau));
    write_model_block(&pair.vision_encoder, &mut out);
    write_model_block(&pair.text_encoder, &mut out);
    for row in &pair.class_embeddings {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&vals.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_encoders(path: &Path) -> Result<EncoderPair> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default();
    if magic.trim() != "guidg-encoders v1" {
        return Err(Error::Parse(format!("bad encoder magic `{magic}`")));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing `{name}`")))?;
        line.trim()
            .strip_prefix(&format!("{name} "))
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("expected `{name}`, found `{line}`")))
    };
    let d_f: usize = field("d_f")?.parse().map_err(|_| Error::Parse("bad d_f".into()))?;
    let embed_dim: usize = field("embed_dim")?
        .parse()
        .map_err(|_| Error::Parse("bad embed_dim".into()))?;
    let classes: usize = field("classes")?
        .parse()
        .map_err(|_| Error::Parse("bad classes".into()))?;
    let tau: f64 = field("tau")?.parse().map_err(|_| Error::Parse("bad tau".into()))?;
    let vision_encoder = read_model_block(&mut lines)?;
    let text_encoder = read_model_block(&mut lines)?;
    let mut class_embeddings = Vec::with_capacity(classes);
    for c in 0..classes {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing class embedding {c}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad embedding value `{t}`")))
            })
            .collect::<Result<_>>()?;
        if row.len() != embed_dim {
            return Err(Error::Parse(format!(
                "class embedding {c} has {} values, expected {embed_dim}",
                row.len()
            )));
        }
        class_embeddings.push(row);
    }
    let pair = EncoderPair {
        vision_encoder,
        text_encoder,
        class_embeddings,
        tau,
        d_f,
        embed_dim,
    };
    pair.validate()?;
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    pub(crate) fn tiny_pair(c: usize, feature_dim: usize) -> EncoderPair {
        let embed_dim = 4;
        let prompt_len = 3;
        let d_f = 6;
        let mut class_embeddings: Vec<Vec<f64>> = (0..c)
            .map(|i| {
                let mut rng = rng::child_rng(900, "emb", i as u64);
                let normal = Normal::new(0.0, 1.0).unwrap();
                (0..embed_dim).map(|_| normal.sample(&mut rng)).collect()
            })
            .collect();
        normalize_rows(&mut class_embeddings);
        EncoderPair {
            vision_encoder: MlpModel::seeded(&[feature_dim, 8, d_f], Activation::Tanh, 71)
                .unwrap(),
            text_encoder: MlpModel::seeded(
                &[prompt_len * embed_dim + embed_dim, 10, d_f],
                Activation::Tanh,
                72,
            )
            .unwrap(),
            class_embeddings,
            tau: 0.01,
            d_f,
            embed_dim,
        }
    }

    #[test]
    fn identical_texts_give_uniform_probabilities() {
        let t = vec![vec![0.4, -0.2, 1.0]; 5];
        let p = zero_shot_probs(&[1.0, 0.5, -0.3], &t, 0.01).unwrap();
        for v in &p {
            assert!((v - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_scale_invariance() {
        let texts = vec![vec![0.4, -0.2, 1.0], vec![-0.9, 0.1, 0.2]];
        let scaled: Vec<Vec<f64>> = texts
            .iter()
            .map(|t| t.iter().map(|v| v * 7.3).collect())
            .collect();
        let img = [1.0, 0.5, -0.3];
        let img_scaled: Vec<f64> = img.iter().map(|v| v * 0.01).collect();
        let a = zero_shot_probs(&img, &texts, 0.5).unwrap();
        let b = zero_shot_probs(&img_scaled, &scaled, 0.5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_temperature_matches_direct_softmax() {
        // cos similarities (0.8, 0.2) at tau = 0.01: softmax over (80, 20).
        let img = vec![1.0, 0.0];
        let texts = vec![vec![0.8, 0.6], vec![0.2, (1.0f64 - 0.04).sqrt()]];
        let p = zero_shot_probs(&img, &texts, 0.01).unwrap();
        let direct1 = 1.0 / (1.0 + (-60.0f64).exp());
        assert!((p[0] - direct1).abs() < 1e-12);
        assert!((p[1] - (-60.0f64).exp() / (1.0 + (-60.0f64).exp())).abs() < 1e-24);
        assert!((p[1] - 8.7565e-27).abs() < 1e-29, "p1 = {:e}", p[1]);
    }

    #[test]
    fn probabilities_live_on_the_simplex() {
        let pair = tiny_pair(4, 5);
        let expert = PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, 3).unwrap();
        let texts = text_features(&expert, &pair).unwrap();
        let p = zero_shot_predict(&pair, &[0.2, -1.0, 0.5, 0.0, 2.0], &texts).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn argmax_matches_raw_cosines() {
        let pair = tiny_pair(6, 5);
        let expert = PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, 4).unwrap();
        let texts = text_features(&expert, &pair).unwrap();
        let x = [0.3, 0.9, -0.2, 0.4, -1.1];
        let feat = pair.encode_image(&x).unwrap();
        let cosines: Vec<f64> = texts.iter().map(|t| cosine(&feat, t).unwrap()).collect();
        assert_eq!(zero_shot_class(&pair, &x, &texts).unwrap(), argmax(&cosines));
    }

    #[test]
    fn distinct_classes_give_distinct_texts() {
        let pair = tiny_pair(3, 4);
        let expert = PromptExpert::seeded(0, pair.prompt_len(), pair.embed_dim, 9).unwrap();
        let a = build_prompt(&expert, 0, &pair).unwrap();
        let b = build_prompt(&expert, 1, &pair).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, build_prompt(&expert, 0, &pair).unwrap());
        assert!(build_prompt(&expert, 3, &pair).is_err());
    }

    #[test]
    fn zero_expert_equals_direct_composition() {
        let pair = tiny_pair(3, 4);
        let zero = PromptExpert::zeros(0, pair.prompt_len(), pair.embed_dim).unwrap();
        let got = build_prompt(&zero, 2, &pair).unwrap();
        let mut input = vec![0.0; pair.prompt_len() * pair.embed_dim];
        input.extend_from_slice(&pair.class_embeddings[2]);
        let direct = pair.text_encoder.forward(&input).unwrap();
        assert_eq!(got, direct);
    }

    #[test]
    fn encoder_checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("encoders.txt");
        let pair = tiny_pair(4, 5);
        save_encoders(&pair, &path).unwrap();
        let back = load_encoders(&path).unwrap();
        assert_eq!(pair, back);
    }

    #[test]
    fn zero_norm_vector_is_rejected() {
        let texts = vec![vec![0.0, 0.0]];
        assert!(zero_shot_probs(&[1.0, 1.0], &texts, 0.01).is_err());
    }
}
