//! Identify and mitigate classifier bias through feature and label embedding
//! spaces.
//!
//! - [`bias`]: protected class prototypes, the difference set `Δ`, its
//!   principal spectrum, the bias direction and its removal from features.
//! - [`model`]: MLP encoder with a one-hot softmax baseline head or protected
//!   cosine-softmax label-embedding heads (one per protected attribute value),
//!   trained with hand-written backpropagation and momentum SGD.
//! - [`fairness`]: bias amplification, statistical parity, equality of
//!   opportunity, equalized odds, per-class accuracy and weighted mAP.
//! - [`datagen`]: synthetic datasets with a controllable attribute skew.
//! - [`experiment`]: JSON-configured pipelines and the named study presets.
//!
//! # Examples
//!
//! Each capability has a runnable example (`cargo run --example <name>`):
//!
//! | example | shows |
//! |---|---|
//! | `generate_data` | skewed synthetic data, skew table, splits, CSV |
//! | `train_baseline` | softmax baseline training and its history |
//! | `protected_heads` | per-attribute cosine heads and the summed ensemble |
//! | `bias_profile` | prototypes, `Δ` spectrum, skewness, shuffled control |
//! | `bias_removal` | projecting the bias direction out of features |
//! | `fairness_metrics` | parity, opportunity, odds, amplification, weighted mAP |
//! | `checkpoint` | JSON checkpoints |
//! | `gradient_check` | analytic vs finite-difference gradients |
//! | `experiment_config` | config parsing and pointer-addressed errors |
//! | `reproduce_preset` | a full study preset with its report |

// `!(x > 0.0)` checks are meant to reject NaN too.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod bias;
pub mod datagen;
mod error;
pub mod experiment;
pub mod fairness;
pub mod model;
pub mod numeric;

pub use error::{Error, Result};
