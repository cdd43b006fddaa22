//! Continual adversarial retraining: plain fine-tuning or elastic weight
//! consolidation (EWC) with a diagonal empirical Fisher estimate. Each EWC
//! session pins an anchor (parameter snapshot + Fisher diagonal) and later
//! updates are pulled toward every anchor in proportion to its Fisher mass.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, EpochStats};
use crate::corpus::RawDocument;
use crate::error::{Error, Result};
use crate::num::adam::{AdamConfig, OptimizerState};

/// Retraining strategy for a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Finetune,
    Ewc,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Finetune => write!(f, "finetune"),
            Strategy::Ewc => write!(f, "ewc"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finetune" => Ok(Strategy::Finetune),
            "ewc" => Ok(Strategy::Ewc),
            other => Err(Error::invalid(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Parameter snapshot and Fisher diagonal for one consolidated session,
/// stored parallel to the classifier's fixed tensor order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionAnchor {
    pub theta_star: Vec<Vec<f64>>,
    pub fisher: Vec<Vec<f64>>,
    pub lambda: f64,
}

/// Hyperparameters for one retraining session.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrainConfig {
    pub strategy: Strategy,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// EWC penalty strength for the anchor created this session.
    pub lambda: f64,
    /// Documents used for the Fisher estimate (capped at the dataset size).
    pub fisher_sample_count: usize,
    pub seed: u64,
}

impl Default for RetrainConfig {
    fn default() -> Self {
        RetrainConfig {
            strategy: Strategy::Ewc,
            epochs: 1,
            batch_size: 32,
            adam: AdamConfig::default(),
            lambda: 100.0,
            fisher_sample_count: 200,
            seed: 23,
        }
    }
}

/// Diagonal empirical Fisher: the mean over documents of the squared
/// gradient of the log-probability of the model's own predicted label.
pub fn estimate_fisher_diagonal(
    model: &mut Classifier,
    docs: &[RawDocument],
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    if docs.is_empty() || n == 0 {
        return Err(Error::invalid("fisher estimate needs at least one document"));
    }
    let take = n.min(docs.len());
    let mut fisher: Vec<Vec<f64>> = model.tensor_lens().iter().map(|&l| vec![0.0; l]).collect();
    for doc in &docs[..take] {
        let ids = model.seq_ids(doc);
        let (pred, _) = model.predict_ids(&ids);
        // Single-sample batch: gradients of -log p(pred); the square equals
        // the squared gradient of log p(pred).
        model.batch_grads(&[(ids, pred.index())])?;
        for (acc, t) in fisher.iter_mut().zip(model.tensors()) {
            for (a, g) in acc.iter_mut().zip(&t.grad) {
                *a += g * g / take as f64;
            }
        }
    }
    model.zero_grads();
    Ok(fisher)
}

/// Total EWC penalty: sum over anchors of lambda/2 * sum_i F_i (theta_i - theta*_i)^2.
pub fn ewc_penalty(model: &Classifier, anchors: &[SessionAnchor]) -> Result<f64> {
    let mut total = 0.0;
    for anchor in anchors {
        let tensors = model.tensors();
        if anchor.theta_star.len() != tensors.len() {
            return Err(Error::shape("anchor tensor count mismatch"));
        }
        let mut s = 0.0;
        for ((t, star), fisher) in tensors.iter().zip(&anchor.theta_star).zip(&anchor.fisher) {
            if t.values.len() != star.len() || star.len() != fisher.len() {
                return Err(Error::shape("anchor tensor length mismatch"));
            }
            for ((v, sv), f) in t.values.iter().zip(star).zip(fisher) {
                let d = v - sv;
                s += f * d * d;
            }
        }
        total += anchor.lambda / 2.0 * s;
    }
    Ok(total)
}

/// Adds the penalty gradient lambda * F_i (theta_i - theta*_i) for every
/// anchor. Anchors with lambda == 0 are skipped entirely so a zero-strength
/// penalty leaves gradients bit-for-bit untouched.
pub fn add_penalty_grads(model: &mut Classifier, anchors: &[SessionAnchor]) -> Result<()> {
    for anchor in anchors {
        if anchor.lambda == 0.0 {
            continue;
        }
        let mut tensors = model.tensors_mut();
        if anchor.theta_star.len() != tensors.len() {
            return Err(Error::shape("anchor tensor count mismatch"));
        }
        for ((t, star), fisher) in tensors.iter_mut().zip(&anchor.theta_star).zip(&anchor.fisher) {
            for ((g, (v, sv)), f) in t
                .grad
                .iter_mut()
                .zip(t.values.iter().zip(star))
                .zip(fisher)
            {
                *g += anchor.lambda * f * (v - sv);
            }
        }
    }
    Ok(())
}

/// One retraining session over `session_docs`.
///
/// Under [`Strategy::Ewc`] a new anchor is pinned from the pre-session
/// parameters, with its Fisher diagonal estimated on `fisher_docs`
/// (documents representing what the model already knows); training is then
/// penalized toward all anchors, the new one included. Under
/// [`Strategy::Finetune`] the anchors are ignored and left unchanged.
pub fn retrain_session(
    model: &mut Classifier,
    anchors: &mut Vec<SessionAnchor>,
    session_docs: &[RawDocument],
    fisher_docs: &[RawDocument],
    config: &RetrainConfig,
) -> Result<Vec<EpochStats>> {
    if session_docs.is_empty() {
        return Err(Error::invalid("empty retraining session"));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::invalid("retrain epochs/batch_size must be >= 1"));
    }
    if config.strategy == Strategy::Ewc && config.lambda < 0.0 {
        return Err(Error::invalid("lambda must be >= 0"));
    }

    if config.strategy == Strategy::Ewc {
        let fisher = estimate_fisher_diagonal(model, fisher_docs, config.fisher_sample_count)?;
        anchors.push(SessionAnchor {
            theta_star: model.tensors().iter().map(|t| t.values.clone()).collect(),
            fisher,
            lambda: config.lambda,
        });
    }

    let dataset: Vec<(Vec<usize>, usize)> = session_docs
        .iter()
        .map(|d| (model.seq_ids(d), d.label.index()))
        .collect();

    let mut opt = OptimizerState::new(config.adam.clone(), &model.tensor_lens());
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(2);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(Vec<usize>, usize)> =
                chunk.iter().map(|&i| dataset[i].clone()).collect();
            let (loss, c) = model.batch_grads(&batch)?;
            if config.strategy == Strategy::Ewc {
                add_penalty_grads(model, anchors)?;
            }
            opt.step(&mut model.tensors_mut())?;
            total_loss += loss;
            correct += c;
            batches += 1;
        }
        log.push(EpochStats {
            epoch,
            mean_loss: total_loss / batches as f64,
            train_accuracy: correct as f64 / dataset.len() as f64,
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{evaluate_classifier, train_classifier, TrainConfig};
    use crate::corpus::{synthetic_corpus, SyntheticConfig};

    fn tiny_model() -> (Classifier, Vec<RawDocument>) {
        let corpus = synthetic_corpus(&SyntheticConfig {
            n_docs: 60,
            min_tokens: 4,
            max_tokens: 8,
            seed: 5,
        });
        let cfg = TrainConfig {
            hidden: 4,
            embed_dim: 3,
            max_len: 10,
            min_count: 1,
            epochs: 5,
            batch_size: 8,
            seed: 13,
            ..Default::default()
        };
        let out = train_classifier(&corpus, &cfg).unwrap();
        (out.classifier, corpus)
    }

    #[test]
    fn fisher_matches_finite_difference_oracle() {
        let (mut model, corpus) = tiny_model();
        let docs: Vec<RawDocument> = corpus.iter().take(3).cloned().collect();
        let fisher = estimate_fisher_diagonal(&mut model, &docs, 3).unwrap();

        // Oracle: central-difference gradient of log p(predicted label) per
        // document, squared and averaged.
        let eps = 1e-5;
        let n_tensors = model.tensors().len();
        let mut oracle: Vec<Vec<f64>> =
            model.tensor_lens().iter().map(|&l| vec![0.0; l]).collect();
        for doc in &docs {
            let ids = model.seq_ids(doc);
            let (pred, _) = model.predict_ids(&ids);
            let target = pred.index();
            for ti in 0..n_tensors {
                for i in 0..oracle[ti].len() {
                    let orig = model.tensors()[ti].values[i];
                    model.tensors_mut()[ti].values[i] = orig + eps;
                    let lp_plus = model.predict_ids(&ids).1[target].ln();
                    model.tensors_mut()[ti].values[i] = orig - eps;
                    let lp_minus = model.predict_ids(&ids).1[target].ln();
                    model.tensors_mut()[ti].values[i] = orig;
                    let g = (lp_plus - lp_minus) / (2.0 * eps);
                    oracle[ti][i] += g * g / docs.len() as f64;
                }
            }
        }
        let mut max_err: f64 = 0.0;
        for (a, b) in fisher.iter().flatten().zip(oracle.iter().flatten()) {
            let denom = a.abs().max(b.abs()).max(1.0);
            max_err = max_err.max((a - b).abs() / denom);
        }
        assert!(max_err < 1e-6, "fisher oracle mismatch: {max_err:.3e}");
    }

    #[test]
    fn penalty_hand_example() {
        let (mut model, _) = tiny_model();
        // Anchor at current params, then displace two scalars by 0.5 each in
        // a tensor whose fisher entries are 2: penalty = 4/2 * (2*0.25 + 2*0.25) = 2.
        let theta_star: Vec<Vec<f64>> =
            model.tensors().iter().map(|t| t.values.clone()).collect();
        let mut fisher: Vec<Vec<f64>> =
            model.tensor_lens().iter().map(|&l| vec![0.0; l]).collect();
        fisher[0][0] = 2.0;
        fisher[0][1] = 2.0;
        let anchor = SessionAnchor {
            theta_star,
            fisher,
            lambda: 4.0,
        };
        model.tensors_mut()[0].values[0] += 0.5;
        model.tensors_mut()[0].values[1] -= 0.5;
        let p = ewc_penalty(&model, &[anchor]).unwrap();
        assert!((p - 2.0).abs() < 1e-12, "penalty {p}");
    }

    #[test]
    fn penalty_zero_at_anchor() {
        let (model, _) = tiny_model();
        let anchor = SessionAnchor {
            theta_star: model.tensors().iter().map(|t| t.values.clone()).collect(),
            fisher: model.tensor_lens().iter().map(|&l| vec![1.0; l]).collect(),
            lambda: 100.0,
        };
        assert_eq!(ewc_penalty(&model, &[anchor]).unwrap(), 0.0);
    }

    #[test]
    fn penalty_gradient_matches_finite_difference() {
        let (mut model, corpus) = tiny_model();
        let docs: Vec<RawDocument> = corpus.iter().take(2).cloned().collect();
        let fisher = estimate_fisher_diagonal(&mut model, &docs, 2).unwrap();
        let mut anchor = SessionAnchor {
            theta_star: model.tensors().iter().map(|t| t.values.clone()).collect(),
            fisher,
            lambda: 7.0,
        };
        // Displace the anchor so the penalty is nonzero at current params.
        for star in anchor.theta_star.iter_mut() {
            for v in star.iter_mut() {
                *v += 0.01;
            }
        }
        let anchors = vec![anchor];
        model.zero_grads();
        add_penalty_grads(&mut model, &anchors).unwrap();
        let analytic: Vec<Vec<f64>> = model.tensors().iter().map(|t| t.grad.clone()).collect();
        let eps = 1e-6;
        for ti in 0..analytic.len() {
            for i in (0..analytic[ti].len()).step_by(7) {
                let orig = model.tensors()[ti].values[i];
                model.tensors_mut()[ti].values[i] = orig + eps;
                let p_plus = ewc_penalty(&model, &anchors).unwrap();
                model.tensors_mut()[ti].values[i] = orig - eps;
                let p_minus = ewc_penalty(&model, &anchors).unwrap();
                model.tensors_mut()[ti].values[i] = orig;
                let fd = (p_plus - p_minus) / (2.0 * eps);
                assert!(
                    (analytic[ti][i] - fd).abs() < 1e-6,
                    "tensor {ti} index {i}: {} vs {fd}",
                    analytic[ti][i]
                );
            }
        }
    }

    #[test]
    fn zero_lambda_ewc_is_bitwise_finetune() {
        let (model, corpus) = tiny_model();
        let session: Vec<RawDocument> = corpus.iter().take(20).cloned().collect();
        let fisher_docs: Vec<RawDocument> = corpus.iter().skip(20).take(10).cloned().collect();

        let mut a = model.clone();
        let mut anchors_a = Vec::new();
        let cfg_ewc = RetrainConfig {
            strategy: Strategy::Ewc,
            lambda: 0.0,
            epochs: 2,
            ..Default::default()
        };
        retrain_session(&mut a, &mut anchors_a, &session, &fisher_docs, &cfg_ewc).unwrap();

        let mut b = model.clone();
        let mut anchors_b = Vec::new();
        let cfg_ft = RetrainConfig {
            strategy: Strategy::Finetune,
            epochs: 2,
            ..Default::default()
        };
        retrain_session(&mut b, &mut anchors_b, &session, &fisher_docs, &cfg_ft).unwrap();

        for (ta, tb) in a.tensors().iter().zip(b.tensors().iter()) {
            assert_eq!(ta.values, tb.values, "tensor {} diverged", ta.name);
        }
        assert_eq!(anchors_a.len(), 1);
        assert!(anchors_b.is_empty());
    }

    #[test]
    fn huge_lambda_freezes_parameters() {
        let (model, corpus) = tiny_model();
        let session: Vec<RawDocument> = corpus.iter().take(20).cloned().collect();
        let fisher_docs: Vec<RawDocument> = corpus.iter().skip(20).take(10).cloned().collect();
        let before: Vec<Vec<f64>> = model.tensors().iter().map(|t| t.values.clone()).collect();

        let mut frozen = model.clone();
        let mut anchors = Vec::new();
        let cfg = RetrainConfig {
            strategy: Strategy::Ewc,
            lambda: 1e12,
            epochs: 10,
            batch_size: 8,
            ..Default::default()
        };
        retrain_session(&mut frozen, &mut anchors, &session, &fisher_docs, &cfg).unwrap();

        let mut free = model.clone();
        let mut no_anchors = Vec::new();
        let cfg_ft = RetrainConfig {
            strategy: Strategy::Finetune,
            epochs: 10,
            batch_size: 8,
            ..Default::default()
        };
        retrain_session(&mut free, &mut no_anchors, &session, &fisher_docs, &cfg_ft).unwrap();

        // Adam normalizes gradient scale, so measure drift where the penalty
        // actually acts: Fisher-weighted distance from the anchor.
        let fisher = &anchors[0].fisher;
        let drift = |m: &Classifier| -> f64 {
            m.tensors()
                .iter()
                .zip(&before)
                .zip(fisher)
                .flat_map(|((t, b), f)| {
                    t.values
                        .iter()
                        .zip(b)
                        .zip(f)
                        .map(|((v, bv), fv)| fv * (v - bv) * (v - bv))
                })
                .sum()
        };
        assert!(
            drift(&frozen) < 0.1 * drift(&free),
            "frozen drift {} vs free drift {}",
            drift(&frozen),
            drift(&free)
        );
    }

    #[test]
    fn session_adapts_to_new_data() {
        let (model, _) = tiny_model();
        // A fresh topical corpus the model was not trained on.
        let new_data = synthetic_corpus(&SyntheticConfig {
            n_docs: 40,
            min_tokens: 4,
            max_tokens: 8,
            seed: 99,
        });
        let mut m = model.clone();
        let mut anchors = Vec::new();
        let cfg = RetrainConfig {
            strategy: Strategy::Finetune,
            epochs: 40,
            batch_size: 8,
            ..Default::default()
        };
        let before = evaluate_classifier(&m, &new_data).unwrap().accuracy;
        retrain_session(&mut m, &mut anchors, &new_data, &new_data, &cfg).unwrap();
        let after = evaluate_classifier(&m, &new_data).unwrap().accuracy;
        assert!(
            after >= before,
            "accuracy regressed on session data: {before} -> {after}"
        );
        assert!(after > 0.9, "session accuracy only {after}");
    }

    #[test]
    fn anchor_shape_mismatch_rejected() {
        let (model, _) = tiny_model();
        let anchor = SessionAnchor {
            theta_star: vec![vec![0.0; 3]],
            fisher: vec![vec![0.0; 3]],
            lambda: 1.0,
        };
        assert!(ewc_penalty(&model, &[anchor]).is_err());
    }

    #[test]
    fn fisher_entries_nonnegative_and_not_all_zero() {
        let (mut model, corpus) = tiny_model();
        let fisher = estimate_fisher_diagonal(&mut model, &corpus, 10).unwrap();
        assert!(fisher.iter().flatten().all(|&f| f >= 0.0));
        assert!(fisher.iter().flatten().any(|&f| f > 0.0));
    }
}
