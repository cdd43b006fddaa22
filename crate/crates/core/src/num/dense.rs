use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::tensor::ParamTensor;

/// Fully connected output layer: weight (C x H) and bias (C).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseParams {
    pub weight: ParamTensor,
    pub bias: ParamTensor,
    pub out: usize,
    pub input: usize,
}

impl DenseParams {
    pub fn zeros(name: &str, out: usize, input: usize) -> Self {
        DenseParams {
            weight: ParamTensor::zeros(format!("{name}.weight"), &[out, input]),
            bias: ParamTensor::zeros(format!("{name}.bias"), &[out]),
            out,
            input,
        }
    }

    pub fn init(name: &str, out: usize, input: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut p = DenseParams::zeros(name, out, input);
        for v in p.weight.values.iter_mut() {
            *v = rng.gen_range(-scale..=scale);
        }
        p
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input {
            return Err(Error::shape(format!(
                "dense input width {} != {}",
                x.len(),
                self.input
            )));
        }
        let mut y = self.bias.values.clone();
        for r in 0..self.out {
            let row = &self.weight.values[r * self.input..(r + 1) * self.input];
            let mut acc = 0.0;
            for (w, xv) in row.iter().zip(x) {
                acc += w * xv;
            }
            y[r] += acc;
        }
        Ok(y)
    }

    /// Accumulates parameter gradients and returns the gradient w.r.t. the
    /// input.
    pub fn backward(&mut self, x: &[f64], dy: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input || dy.len() != self.out {
            return Err(Error::shape("dense backward shape mismatch"));
        }
        let mut dx = vec![0.0; self.input];
        for r in 0..self.out {
            let d = dy[r];
            self.bias.grad[r] += d;
            let wrow = &self.weight.values[r * self.input..(r + 1) * self.input];
            let grow = &mut self.weight.grad[r * self.input..(r + 1) * self.input];
            for i in 0..self.input {
                grow[i] += d * x[i];
                dx[i] += d * wrow[i];
            }
        }
        Ok(dx)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut ParamTensor> {
        vec![&mut self.weight, &mut self.bias]
    }

    pub fn tensors(&self) -> Vec<&ParamTensor> {
        vec![&self.weight, &self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_is_affine() {
        let mut p = DenseParams::zeros("d", 2, 3);
        p.weight.values = vec![1.0, 0.0, -1.0, 0.5, 0.5, 0.5];
        p.bias.values = vec![0.1, -0.1];
        let y = p.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert!((y[0] - (1.0 - 3.0 + 0.1)).abs() < 1e-15);
        assert!((y[1] - (0.5 + 1.0 + 1.5 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn backward_shapes_and_values() {
        let mut p = DenseParams::zeros("d", 2, 2);
        p.weight.values = vec![1.0, 2.0, 3.0, 4.0];
        let dx = p.backward(&[0.5, -0.5], &[1.0, 1.0]).unwrap();
        // dx_i = sum_r dy_r * w[r][i]
        assert_eq!(dx, vec![4.0, 6.0]);
        assert_eq!(p.bias.grad, vec![1.0, 1.0]);
        assert_eq!(p.weight.grad, vec![0.5, -0.5, 0.5, -0.5]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let p = DenseParams::zeros("d", 2, 3);
        assert!(p.forward(&[1.0]).is_err());
    }
}
