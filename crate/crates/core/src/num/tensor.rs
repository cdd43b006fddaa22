use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named dense f64 tensor with a gradient buffer of the same length.
///
/// All trainable state in the library lives in these; optimizers, Fisher
/// estimation and serialization iterate them in a fixed order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub grad: Vec<f64>,
}

impl ParamTensor {
    /// Zero-initialized tensor.
    pub fn zeros(name: impl Into<String>, shape: &[usize]) -> Self {
        let len = shape.iter().product();
        ParamTensor {
            name: name.into(),
            shape: shape.to_vec(),
            values: vec![0.0; len],
            grad: vec![0.0; len],
        }
    }

    pub fn from_values(name: impl Into<String>, shape: &[usize], values: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::shape(format!(
                "tensor values length {} does not match shape {:?}",
                values.len(),
                shape
            )));
        }
        Ok(ParamTensor {
            name: name.into(),
            shape: shape.to_vec(),
            values,
            grad: vec![0.0; len],
        })
    }

    /// Uniform init in [-scale, scale] from the supplied generator.
    pub fn uniform(name: impl Into<String>, shape: &[usize], scale: f64, rng: &mut impl Rng) -> Self {
        let mut t = ParamTensor::zeros(name, shape);
        for v in t.values.iter_mut() {
            *v = rng.gen_range(-scale..=scale);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grad(&mut self) {
        for g in self.grad.iter_mut() {
            *g = 0.0;
        }
    }

    /// Restores the grad buffer after deserialization (serde skips it).
    pub fn ensure_grad(&mut self) {
        if self.grad.len() != self.values.len() {
            self.grad = vec![0.0; self.values.len()];
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "tensor {} contains non-finite values",
                self.name
            )));
        }
        Ok(())
    }
}
