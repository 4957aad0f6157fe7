//! Miniature implementation of the GuiDG expert-ensemble training pipeline.
//!
//! The crate is organized around six subsystems:
//!
//! - [`nn`] — a small differentiable fully-connected network engine with
//!   exact reverse-mode gradients, AdamW/SGD, and a finite-difference
//!   gradient oracle.
//! - [`datagen`] — deterministic synthetic data: the 1-D toy regression task
//!   and a multi-domain classification suite with a shared label function.
//! - [`miniclip`] — a frozen dual-encoder stand-in for CLIP (vision MLP,
//!   text-analog MLP over prompt ⊕ class embeddings, cosine zero-shot rule).
//! - [`guidg`] — the method itself: per-domain prompt experts, Cross-Modal
//!   Attention weighting, expert-guided fine-tuning, weighted ensemble
//!   inference, and the optional fine-tuning regularizers.
//! - [`bounds`] — closed-form evaluation of the VC-dimension generalization
//!   bounds that motivate the ensemble design.
//! - [`harness`] — seeded experiment runners producing CSV / JSON-lines
//!   reports with full config manifests.
//!
//! All arithmetic is `f64`. Every random quantity is derived from an explicit
//! seed through [`rng`], so identical configs reproduce identical bytes.

pub mod bounds;
pub mod datagen;
pub mod error;
pub mod guidg;
pub mod harness;
pub mod linalg;
pub mod miniclip;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
