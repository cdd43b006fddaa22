//! Black-box word-substitution evasion attack: rank words by deletion
//! importance, substitute embedding-space neighbors greedily, stop when the
//! label flips. The model is accessed only through prediction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::corpus::{Label, RawDocument};
use crate::error::{Error, Result};
use crate::text::{nearest_neighbors, preprocess_trace, PAD};

/// Attack hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Max fraction of tokens substituted, in (0, 1].
    pub budget: f64,
    /// Neighbor candidates per position.
    pub k: usize,
    /// Minimum cosine similarity for a substitution candidate.
    pub min_cosine: f64,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            budget: 0.2,
            k: 50,
            min_cosine: 0.5,
            seed: 0,
        }
    }
}

impl AttackConfig {
    fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget <= 1.0) {
            return Err(Error::invalid("attack budget must be in (0,1]"));
        }
        if self.k == 0 {
            return Err(Error::invalid("attack k must be >= 1"));
        }
        Ok(())
    }
}

/// One committed word substitution at a model-sequence position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Substitution {
    pub position: usize,
    pub old: String,
    pub new: String,
}

/// An original/perturbed document pair. Ground truth is preserved: both
/// documents carry the same gold label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdvPair {
    pub original: RawDocument,
    pub perturbed: RawDocument,
    pub substitutions: Vec<Substitution>,
    pub success: bool,
}

/// Positions of the document's model sequence ordered by descending deletion
/// importance (drop in true-label probability when the token is removed).
/// Ties break toward the lower position.
pub fn rank_word_importance(model: &Classifier, doc: &RawDocument) -> Result<Vec<usize>> {
    let ids = model.seq_ids(doc);
    if !ids.iter().any(|&id| id >= 2) {
        return Err(Error::invalid(format!(
            "document {} has no in-vocabulary tokens",
            doc.id
        )));
    }
    let true_idx = doc.label.index();
    let (_, base_probs) = model.predict_ids(&ids);
    let base = base_probs[true_idx];
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(ids.len());
    for pos in 0..ids.len() {
        let mut deleted: Vec<usize> = Vec::with_capacity(ids.len() - 1);
        deleted.extend_from_slice(&ids[..pos]);
        deleted.extend_from_slice(&ids[pos + 1..]);
        if deleted.is_empty() {
            deleted.push(PAD);
        }
        let (_, probs) = model.predict_ids(&deleted);
        scored.push((pos, base - probs[true_idx]));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(pos, _)| pos).collect())
}

/// Greedy substitution attack on one document.
///
/// Iterates positions by importance; at each, commits the neighbor that most
/// reduces the true-label probability; stops on label flip or budget
/// exhaustion. Success is verified end-to-end by predicting the
/// reconstructed perturbed document.
pub fn greedy_attack(
    model: &Classifier,
    doc: &RawDocument,
    config: &AttackConfig,
) -> Result<AdvPair> {
    config.validate()?;
    let (pred, _) = model.predict(doc);
    if pred != doc.label {
        // Already misclassified: nothing to do, trivially evasive.
        return Ok(AdvPair {
            original: doc.clone(),
            perturbed: doc.clone(),
            substitutions: Vec::new(),
            success: true,
        });
    }

    let order = rank_word_importance(model, doc)?;
    let trace = preprocess_trace(&doc.text, model.max_len);
    let mut current_ids: Vec<usize> = trace
        .kept
        .iter()
        .map(|(_, stem)| model.vocab.id_or_unk(stem))
        .collect();
    let true_idx = doc.label.index();
    let (_, probs) = model.predict_ids(&current_ids);
    let mut current_p = probs[true_idx];

    let budget_count = ((config.budget * current_ids.len() as f64).ceil() as usize).max(1);
    let mut committed: Vec<(usize, usize)> = Vec::new(); // (position, new id)
    let mut flipped = false;

    for &pos in &order {
        if committed.len() >= budget_count || flipped {
            break;
        }
        let orig_id = current_ids[pos];
        if orig_id < 2 {
            continue;
        }
        let neighbors =
            match nearest_neighbors(&model.embedding, orig_id, config.k, config.min_cosine) {
                Ok(n) => n,
                Err(_) => continue, // zero-norm row: no candidates here
            };
        let mut best: Option<(usize, f64, bool)> = None;
        for (cand, _) in neighbors {
            let mut trial = current_ids.clone();
            trial[pos] = cand;
            let (label, probs) = model.predict_ids(&trial);
            let p = probs[true_idx];
            let flips = label != doc.label;
            if best.as_ref().map_or(true, |(_, bp, _)| p < *bp) {
                best = Some((cand, p, flips));
            }
        }
        if let Some((cand, p, flips)) = best {
            if p < current_p {
                current_ids[pos] = cand;
                current_p = p;
                committed.push((pos, cand));
                if flips {
                    flipped = true;
                }
            }
        }
    }

    // Reconstruct the perturbed surface text: replace the cleaned surface
    // word underlying each substituted position with the candidate's
    // representative surface form.
    let mut clean_tokens = trace.clean_tokens.clone();
    let mut substitutions = Vec::with_capacity(committed.len());
    for &(pos, new_id) in &committed {
        let (clean_idx, _) = trace.kept[pos];
        let old = clean_tokens[clean_idx].clone();
        let new = model
            .vocab
            .surface(new_id)
            .unwrap_or_default()
            .to_string();
        clean_tokens[clean_idx] = new.clone();
        substitutions.push(Substitution {
            position: pos,
            old,
            new,
        });
    }
    let perturbed = RawDocument {
        id: format!("{}-adv", doc.id),
        text: clean_tokens.join(" "),
        label: doc.label,
    };
    let success = model.predict(&perturbed).0 != doc.label;

    Ok(AdvPair {
        original: doc.clone(),
        perturbed,
        substitutions,
        success,
    })
}

/// Result of sweeping a corpus for successful evasions.
#[derive(Debug, Clone)]
pub struct AttackCorpus {
    /// Successful pairs only.
    pub pairs: Vec<AdvPair>,
    /// Documents the attack was attempted on (correctly classified ones).
    pub attempted: usize,
    /// Documents skipped because the model already misclassified them.
    pub skipped: usize,
    pub success_rate: f64,
    /// True when the corpus was exhausted before reaching the target.
    pub shortfall: bool,
}

/// Attacks corpus documents in order until `n_target` successful pairs are
/// collected or the corpus is exhausted.
pub fn generate_attack_corpus(
    model: &Classifier,
    corpus: &[RawDocument],
    n_target: usize,
    config: &AttackConfig,
) -> Result<AttackCorpus> {
    config.validate()?;
    let mut pairs = Vec::with_capacity(n_target);
    let mut attempted = 0usize;
    let mut skipped = 0usize;
    for doc in corpus {
        if pairs.len() >= n_target {
            break;
        }
        let (pred, _) = model.predict(doc);
        if pred != doc.label {
            skipped += 1;
            continue;
        }
        if !doc.text.chars().any(|c| c.is_ascii_alphabetic()) {
            skipped += 1;
            continue;
        }
        let ids = model.seq_ids(doc);
        if !ids.iter().any(|&id| id >= 2) {
            skipped += 1;
            continue;
        }
        attempted += 1;
        let pair = greedy_attack(model, doc, config)?;
        if pair.success {
            pairs.push(pair);
        }
    }
    let success_rate = if attempted == 0 {
        0.0
    } else {
        pairs.len() as f64 / attempted as f64
    };
    let shortfall = pairs.len() < n_target;
    Ok(AttackCorpus {
        pairs,
        attempted,
        skipped,
        success_rate,
        shortfall,
    })
}

/// Writes pairs as CSV: `pair_id,role,text,label,n_subs`.
pub fn write_attack_corpus(path: &Path, pairs: &[AdvPair]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Serialization(e.to_string()))?;
    writer
        .write_record(["pair_id", "role", "text", "label", "n_subs"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for (i, pair) in pairs.iter().enumerate() {
        let n_subs = pair.substitutions.len().to_string();
        writer
            .write_record([
                &i.to_string(),
                "original",
                &pair.original.text,
                &pair.original.label.to_string(),
                "0",
            ])
            .map_err(|e| Error::Serialization(e.to_string()))?;
        writer
            .write_record([
                &i.to_string(),
                "perturbed",
                &pair.perturbed.text,
                &pair.perturbed.label.to_string(),
                &n_subs,
            ])
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

/// Reads an attack-corpus CSV back into pairs (texts and labels only).
pub fn read_attack_corpus(path: &Path) -> Result<Vec<AdvPair>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
    let mut originals: Vec<RawDocument> = Vec::new();
    let mut perturbed: Vec<RawDocument> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let record = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 5 fields, got {}", record.len()),
            });
        }
        let label: Label = record[3].parse().map_err(|e: Error| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let doc = RawDocument {
            id: format!("pair{}-{}", &record[0], &record[1]),
            text: record[2].to_string(),
            label,
        };
        match &record[1] {
            "original" => originals.push(doc),
            "perturbed" => perturbed.push(doc),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown role {other:?}"),
                })
            }
        }
    }
    if originals.len() != perturbed.len() {
        return Err(Error::Validation(
            "attack corpus originals and perturbed counts differ".into(),
        ));
    }
    Ok(originals
        .into_iter()
        .zip(perturbed)
        .map(|(original, perturbed)| AdvPair {
            original,
            perturbed,
            substitutions: Vec::new(),
            success: true,
        })
        .collect())
}
