//! Deterministic dense-f64 numeric kernel: LSTM forward/backward, output
//! layer, softmax/cross-entropy, Adam, and gradient verification.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod lstm;
pub mod ops;
pub mod tensor;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use dense::DenseParams;
pub use gradcheck::{gradient_check, CheckedModel};
pub use lstm::{lstm_backward, lstm_forward, ForwardCache, LstmParams};
pub use ops::{argmax, cross_entropy, softmax, softmax_cross_entropy};
pub use tensor::ParamTensor;
