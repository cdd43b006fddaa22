//! Confusion-matrix-derived evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-category precision/recall/F1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy plus per-category metrics and raw confusion counts.
/// `confusion[gold][pred]` counts evaluated samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: Vec<Vec<usize>>,
    pub n: usize,
}

impl MetricsReport {
    /// Builds a report from (gold, predicted) index pairs.
    pub fn from_pairs(pairs: &[(usize, usize)], class_names: &[&str]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("metrics over empty evaluation set"));
        }
        let c = class_names.len();
        let mut confusion = vec![vec![0usize; c]; c];
        for &(gold, pred) in pairs {
            if gold >= c || pred >= c {
                return Err(Error::invalid(format!(
                    "class index out of range: gold {gold}, pred {pred}"
                )));
            }
            confusion[gold][pred] += 1;
        }
        let n = pairs.len();
        let correct: usize = (0..c).map(|i| confusion[i][i]).sum();
        let per_class = (0..c)
            .map(|i| {
                let tp = confusion[i][i];
                let pred_i: usize = (0..c).map(|g| confusion[g][i]).sum();
                let gold_i: usize = confusion[i].iter().sum();
                let precision = if pred_i == 0 { 0.0 } else { tp as f64 / pred_i as f64 };
                let recall = if gold_i == 0 { 0.0 } else { tp as f64 / gold_i as f64 };
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                ClassMetrics {
                    class: class_names[i].to_string(),
                    precision,
                    recall,
                    f1,
                }
            })
            .collect();
        Ok(MetricsReport {
            accuracy: correct as f64 / n as f64,
            per_class,
            confusion,
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct_gives_ones() {
        let pairs = vec![(0, 0), (1, 1), (0, 0)];
        let r = MetricsReport::from_pairs(&pairs, &["ham", "spam"]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for c in &r.per_class {
            assert_eq!(c.precision, 1.0);
            assert_eq!(c.recall, 1.0);
            assert_eq!(c.f1, 1.0);
        }
    }

    #[test]
    fn metrics_recomputable_from_confusion_counts() {
        let pairs = vec![(0, 0), (0, 1), (1, 1), (1, 1), (1, 0), (0, 0)];
        let r = MetricsReport::from_pairs(&pairs, &["ham", "spam"]).unwrap();
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!(total, r.n);
        // Recompute from counts, independently.
        let tp_spam = r.confusion[1][1] as f64;
        let pred_spam = (r.confusion[0][1] + r.confusion[1][1]) as f64;
        let gold_spam = (r.confusion[1][0] + r.confusion[1][1]) as f64;
        assert!((r.per_class[1].precision - tp_spam / pred_spam).abs() < 1e-15);
        assert!((r.per_class[1].recall - tp_spam / gold_spam).abs() < 1e-15);
        let acc = (r.confusion[0][0] + r.confusion[1][1]) as f64 / r.n as f64;
        assert!((r.accuracy - acc).abs() < 1e-15);
    }

    #[test]
    fn empty_set_rejected() {
        assert!(MetricsReport::from_pairs(&[], &["a", "b"]).is_err());
    }

    #[test]
    fn metrics_bounded() {
        let pairs = vec![(0, 1), (1, 0)];
        let r = MetricsReport::from_pairs(&pairs, &["ham", "spam"]).unwrap();
        assert_eq!(r.accuracy, 0.0);
        for c in &r.per_class {
            assert!((0.0..=1.0).contains(&c.precision));
            assert!((0.0..=1.0).contains(&c.recall));
            assert!((0.0..=1.0).contains(&c.f1));
        }
    }
}
