use crate::error::{Error, Result};

/// Floor applied to probabilities inside the loss so -log(0) never occurs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::invalid("softmax on empty logits"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("softmax input contains non-finite values"));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Cross-entropy loss -log(probs[target]) with the probability floor.
pub fn cross_entropy(probs: &[f64], target: usize) -> Result<f64> {
    if target >= probs.len() {
        return Err(Error::invalid(format!(
            "target {} out of range for {} categories",
            target,
            probs.len()
        )));
    }
    Ok(-probs[target].max(PROB_FLOOR).ln())
}

/// Loss and gradient w.r.t. the logits for softmax followed by cross-entropy.
///
/// d/dlogits is the usual (p - onehot(target)).
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    let probs = softmax(logits)?;
    let loss = cross_entropy(&probs, target)?;
    let mut dlogits = probs;
    dlogits[target] -= 1.0;
    Ok((loss, dlogits))
}

/// Argmax with ties broken by the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_symmetric() {
        let p = softmax(&[0.0, 0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariance() {
        let x = [0.3, -1.2, 2.5];
        let a = softmax(&x).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + 123.456).collect();
        let b = softmax(&shifted).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_large_logit_no_overflow() {
        let p = softmax(&[1000.0, 0.0]).unwrap();
        assert!(p[0] > 1.0 - 1e-12);
        assert!(p[1] < 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1.0, -3.0, 0.5, 7.0]).unwrap();
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn softmax_rejects_nan() {
        assert!(softmax(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn cross_entropy_uniform_is_ln2() {
        let loss = cross_entropy(&[0.5, 0.5], 1).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_perfect_is_zero() {
        assert_eq!(cross_entropy(&[0.0, 1.0], 1).unwrap(), 0.0);
    }

    #[test]
    fn cross_entropy_floor() {
        let loss = cross_entropy(&[1.0, 0.0], 1).unwrap();
        assert!((loss - (-(1e-12f64).ln())).abs() < 1e-9);
        assert!((loss - 27.631).abs() < 1e-2);
    }

    #[test]
    fn cross_entropy_target_out_of_range() {
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn argmax_tie_lowest_index() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
    }
}
