use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::tensor::ParamTensor;

/// Adam hyperparameters. Defaults: lr 1e-3, betas 0.9/0.999, eps 1e-8.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second-moment accumulators for one tensor.
#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Adam optimizer state over an ordered list of tensors.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step_count: u64,
    moments: Vec<Moments>,
}

impl OptimizerState {
    /// Fresh state with zeroed accumulators, one slot per tensor length.
    pub fn new(config: AdamConfig, tensor_lens: &[usize]) -> Self {
        OptimizerState {
            config,
            step_count: 0,
            moments: tensor_lens
                .iter()
                .map(|&n| Moments {
                    m: vec![0.0; n],
                    v: vec![0.0; n],
                })
                .collect(),
        }
    }

    /// One Adam update over all tensors using their grad buffers.
    pub fn step(&mut self, tensors: &mut [&mut ParamTensor]) -> Result<()> {
        if tensors.len() != self.moments.len() {
            return Err(Error::shape(format!(
                "optimizer tracks {} tensors, got {}",
                self.moments.len(),
                tensors.len()
            )));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for (tensor, mom) in tensors.iter_mut().zip(self.moments.iter_mut()) {
            if tensor.len() != mom.m.len() {
                return Err(Error::shape(format!(
                    "tensor {} length {} does not match optimizer slot {}",
                    tensor.name,
                    tensor.len(),
                    mom.m.len()
                )));
            }
            for i in 0..tensor.len() {
                let g = tensor.grad[i];
                mom.m[i] = beta1 * mom.m[i] + (1.0 - beta1) * g;
                mom.v[i] = beta2 * mom.v[i] + (1.0 - beta2) * g * g;
                let m_hat = mom.m[i] / bc1;
                let v_hat = mom.v[i] / bc2;
                tensor.values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Single-tensor convenience wrapper around [`OptimizerState::step`].
pub fn adam_step(state: &mut OptimizerState, tensor: &mut ParamTensor) -> Result<()> {
    state.step(&mut [tensor])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(value: f64, grad: f64) -> ParamTensor {
        let mut t = ParamTensor::from_values("p", &[1], vec![value]).unwrap();
        t.grad[0] = grad;
        t
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut t = scalar(0.7, 0.0);
        let mut state = OptimizerState::new(AdamConfig::default(), &[1]);
        adam_step(&mut state, &mut t).unwrap();
        assert_eq!(t.values[0], 0.7);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // g=1: bias-corrected m_hat = v_hat = 1, update = -lr/(1+eps) ~ -lr.
        let mut t = scalar(0.0, 1.0);
        let mut state = OptimizerState::new(AdamConfig::default(), &[1]);
        adam_step(&mut state, &mut t).unwrap();
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((t.values[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn deterministic_given_identical_state() {
        let run = || {
            let mut t = scalar(0.3, 0.25);
            let mut state = OptimizerState::new(AdamConfig::default(), &[1]);
            for _ in 0..10 {
                t.grad[0] = 0.25;
                adam_step(&mut state, &mut t).unwrap();
            }
            t.values[0].to_bits()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut t = scalar(0.0, 0.0);
        let mut state = OptimizerState::new(AdamConfig::default(), &[2]);
        assert!(adam_step(&mut state, &mut t).is_err());
    }
}
