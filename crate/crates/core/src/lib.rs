//! Spam-filter robustness laboratory: an LSTM spam classifier, a black-box
//! word-substitution evasion attack, a feature-map adversarial detector, and
//! continual adversarial retraining (fine-tuning or elastic weight
//! consolidation), plus the single-pass vs two-stage inference benchmark.

pub mod attack;
pub mod classifier;
pub mod continual;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod num;
pub mod pipeline;
pub mod serialize;
pub mod stats;
pub mod text;

pub use error::{Error, Result};
