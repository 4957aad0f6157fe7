//! The expert-ensemble method: per-domain prompt experts (phase 1),
//! cross-modal attention weighting, guided fine-tuning of the vision
//! encoder (phase 2), weighted ensemble inference, and the optional
//! fine-tuning regularizers. Also the plain-MLP aggregation path used by
//! the 1-D regression study.

mod averaging;
mod cmattn;
mod expert;
mod finetune;
mod regularizer;
mod toy_aggregate;

pub use averaging::{bma_alpha, bma_update, weight_space_blend, BmaState};
pub use cmattn::{cmattn_keys, cmattn_weights, cmattn_weights_from_feature, CmAttnParams};
pub use expert::{train_domain_expert, ExpertTrainStats};
pub use finetune::{ensemble_infer, guided_finetune_step, EnsembleOutcome, FinetuneSample,
    FinetuneState, StepLosses, WeightMode};
pub use regularizer::{mms_loss, regularizer_eval, ueo_entropy, RegInput, RegKind,
    RegularizerConfig};
pub use toy_aggregate::toy_aggregate_train;

use crate::error::{Error, Result};
use crate::miniclip::{text_features, EncoderPair, PromptExpert};
use crate::nn::MlpModel;

/// The trained per-domain experts, either prompt experts over the frozen
/// dual encoder or plain MLPs (the regression path). Prompt experts carry
/// their cached `(C, d_f)` text-feature matrices: experts and text encoder
/// are both frozen in phase 2, so the features are computed once.
#[derive(Debug, Clone)]
pub enum ExpertSet {
    Prompt {
        experts: Vec<PromptExpert>,
        /// One `(C, d_f)` matrix per expert.
        text_feats: Vec<Vec<Vec<f64>>>,
    },
    Mlp(Vec<MlpModel>),
}

impl ExpertSet {
    /// Cache text features for a set of frozen prompt experts.
    pub fn from_prompt_experts(experts: Vec<PromptExpert>, pair: &EncoderPair) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::input("expert set needs at least one expert"));
        }
        let text_feats = experts
            .iter()
            .map(|e| text_features(e, pair))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpertSet::Prompt {
            experts,
            text_feats,
        })
    }

    pub fn from_mlps(models: Vec<MlpModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::input("expert set needs at least one expert"));
        }
        Ok(ExpertSet::Mlp(models))
    }

    pub fn len(&self) -> usize {
        match self {
            ExpertSet::Prompt { experts, .. } => experts.len(),
            ExpertSet::Mlp(models) => models.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn text_feats(&self) -> Result<&[Vec<Vec<f64>>]> {
        match self {
            ExpertSet::Prompt { text_feats, .. } => Ok(text_feats),
            ExpertSet::Mlp(_) => Err(Error::input("MLP experts have no text features")),
        }
    }
}
