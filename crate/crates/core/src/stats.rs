//! Mean / standard deviation / Student-t confidence intervals for small
//! repetition counts, backed by a bundled quantile table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided levels covered by the bundled table.
pub const SUPPORTED_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

// One-sided quantiles t_{1-(1-level)/2, df} for df 1..=30, columns ordered as
// SUPPORTED_LEVELS.
const T_TABLE: [[f64; 3]; 30] = [
    [6.3138, 12.7062, 63.6567],
    [2.9200, 4.3027, 9.9248],
    [2.3534, 3.1824, 5.8409],
    [2.1318, 2.7764, 4.6041],
    [2.0150, 2.5706, 4.0321],
    [1.9432, 2.4469, 3.7074],
    [1.8946, 2.3646, 3.4995],
    [1.8595, 2.3060, 3.3554],
    [1.8331, 2.2622, 3.2498],
    [1.8125, 2.2281, 3.1693],
    [1.7959, 2.2010, 3.1058],
    [1.7823, 2.1788, 3.0545],
    [1.7709, 2.1604, 3.0123],
    [1.7613, 2.1448, 2.9768],
    [1.7531, 2.1314, 2.9467],
    [1.7459, 2.1199, 2.9208],
    [1.7396, 2.1098, 2.8982],
    [1.7341, 2.1009, 2.8784],
    [1.7291, 2.0930, 2.8609],
    [1.7247, 2.0860, 2.8453],
    [1.7207, 2.0796, 2.8314],
    [1.7171, 2.0739, 2.8188],
    [1.7139, 2.0687, 2.8073],
    [1.7109, 2.0639, 2.7969],
    [1.7081, 2.0595, 2.7874],
    [1.7056, 2.0555, 2.7787],
    [1.7033, 2.0518, 2.7707],
    [1.7011, 2.0484, 2.7633],
    [1.6991, 2.0452, 2.7564],
    [1.6973, 2.0423, 2.7500],
];

/// Table lookup; degrees of freedom beyond 30 fall back to the df=30 row
/// (slightly conservative).
pub fn t_quantile(level: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::invalid("t quantile needs df >= 1"));
    }
    let col = SUPPORTED_LEVELS
        .iter()
        .position(|&l| (l - level).abs() < 1e-12)
        .ok_or_else(|| {
            Error::invalid(format!(
                "confidence level {level} not in bundled table {SUPPORTED_LEVELS:?}"
            ))
        })?;
    Ok(T_TABLE[df.min(30) - 1][col])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator).
    pub std: f64,
    pub half_width: f64,
    pub level: f64,
    pub n: usize,
    /// True when df exceeded the table and the df=30 quantile was used.
    pub df_clamped: bool,
}

impl ConfidenceInterval {
    pub fn low(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn high(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Mean, sample std and t-interval half width over repetitions.
pub fn mean_std_ci(values: &[f64], level: f64) -> Result<ConfidenceInterval> {
    if values.len() < 2 {
        return Err(Error::invalid("confidence interval needs >= 2 values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in confidence interval"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    let df = n - 1;
    let t = t_quantile(level, df)?;
    Ok(ConfidenceInterval {
        mean,
        std,
        half_width: t * std / (n as f64).sqrt(),
        level,
        n,
        df_clamped: df > 30,
    })
}
