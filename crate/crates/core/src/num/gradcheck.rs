use crate::error::{Error, Result};
use crate::num::tensor::ParamTensor;

/// A model whose analytic gradients can be checked against central finite
/// differences. `loss` must be a pure forward evaluation; `loss_with_grads`
/// must fill every tensor's grad buffer (after zeroing).
pub trait CheckedModel {
    fn loss(&mut self) -> f64;
    fn loss_with_grads(&mut self) -> f64;
    fn tensors_mut(&mut self) -> Vec<&mut ParamTensor>;
}

/// Compares analytic gradients against central finite differences and
/// returns the maximum relative error over all checked entries.
///
/// With `limit = Some(n)` at most n entries per tensor are checked, taken at
/// a fixed stride so the check stays deterministic.
pub fn gradient_check<M: CheckedModel>(
    model: &mut M,
    eps: f64,
    limit: Option<usize>,
) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::invalid("gradient_check eps must be positive"));
    }

    model.loss_with_grads();
    let analytic: Vec<Vec<f64>> = model
        .tensors_mut()
        .iter()
        .map(|t| t.grad.clone())
        .collect();
    let n_tensors = analytic.len();

    let mut max_rel = 0.0f64;
    for k in 0..n_tensors {
        let len = analytic[k].len();
        let stride = match limit {
            Some(cap) if cap > 0 && len > cap => len.div_ceil(cap),
            _ => 1,
        };
        let mut idx = 0;
        while idx < len {
            let orig = model.tensors_mut()[k].values[idx];
            model.tensors_mut()[k].values[idx] = orig + eps;
            let lp = model.loss();
            model.tensors_mut()[k].values[idx] = orig - eps;
            let lm = model.loss();
            model.tensors_mut()[k].values[idx] = orig;
            let numeric = (lp - lm) / (2.0 * eps);
            let a = analytic[k][idx];
            let denom = a.abs().max(numeric.abs());
            let rel = if denom < 1e-6 {
                (a - numeric).abs()
            } else {
                (a - numeric).abs() / denom
            };
            max_rel = max_rel.max(rel);
            idx += stride;
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear model y = w.x, squared loss against a fixed target. Gradients
    /// of a quadratic are exact under central differences.
    struct LinearSq {
        w: ParamTensor,
        x: Vec<f64>,
        target: f64,
    }

    impl CheckedModel for LinearSq {
        fn loss(&mut self) -> f64 {
            let y: f64 = self.w.values.iter().zip(&self.x).map(|(a, b)| a * b).sum();
            (y - self.target) * (y - self.target)
        }
        fn loss_with_grads(&mut self) -> f64 {
            self.w.zero_grad();
            let y: f64 = self.w.values.iter().zip(&self.x).map(|(a, b)| a * b).sum();
            for (g, xv) in self.w.grad.iter_mut().zip(&self.x) {
                *g = 2.0 * (y - self.target) * xv;
            }
            (y - self.target) * (y - self.target)
        }
        fn tensors_mut(&mut self) -> Vec<&mut ParamTensor> {
            vec![&mut self.w]
        }
    }

    #[test]
    fn eps_zero_is_invalid() {
        let mut m = LinearSq {
            w: ParamTensor::from_values("w", &[2], vec![0.3, -0.7]).unwrap(),
            x: vec![1.0, 2.0],
            target: 0.5,
        };
        assert!(gradient_check(&mut m, 0.0, None).is_err());
        assert!(gradient_check(&mut m, -1e-5, None).is_err());
    }

    #[test]
    fn linear_quadratic_is_near_exact() {
        let mut m = LinearSq {
            w: ParamTensor::from_values("w", &[3], vec![0.3, -0.7, 1.2]).unwrap(),
            x: vec![1.0, 2.0, -0.5],
            target: 0.5,
        };
        let err = gradient_check(&mut m, 1e-5, None).unwrap();
        assert!(err < 1e-10, "relative error {err}");
    }

    #[test]
    fn sampled_subset_runs() {
        let mut m = LinearSq {
            w: ParamTensor::from_values("w", &[4], vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            x: vec![1.0, -1.0, 2.0, -2.0],
            target: 1.0,
        };
        let err = gradient_check(&mut m, 1e-5, Some(2)).unwrap();
        assert!(err < 1e-10);
    }
}
