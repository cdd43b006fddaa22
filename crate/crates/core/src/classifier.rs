//! The LSTM spam classifier: embedding lookup -> recurrent layer -> dense
//! head -> softmax, with feature-map extraction for the adversarial detector.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, RawDocument};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::num::{
    lstm_backward, lstm_forward, softmax, softmax_cross_entropy, AdamConfig, DenseParams,
    ForwardCache, LstmParams, OptimizerState, ParamTensor,
};
use crate::text::{load_embedding_file, preprocess, EmbeddingTable, Vocabulary, PAD};

/// Number of output categories (ham, spam).
pub const N_CLASSES: usize = 2;

pub const CLASS_NAMES: [&str; 2] = ["ham", "spam"];

/// Training/architecture configuration for the classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub min_count: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub test_fraction: f64,
    pub freeze_embeddings: bool,
    pub embedding_file: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 64,
            embed_dim: 100,
            max_len: 200,
            min_count: 2,
            epochs: 10,
            batch_size: 32,
            lr: 1e-3,
            seed: 42,
            test_fraction: 0.2,
            freeze_embeddings: false,
            embedding_file: None,
        }
    }
}

/// Probe counters asserting the single-pass and black-box contracts.
#[derive(Debug, Default)]
pub struct ProbeCounters {
    forward_passes: AtomicU64,
    feature_extractions: AtomicU64,
}

/// The trained spam filter. Immutable during inference; training and
/// retraining take exclusive `&mut` access.
#[derive(Debug)]
pub struct Classifier {
    pub vocab: Vocabulary,
    pub embedding: EmbeddingTable,
    pub lstm: LstmParams,
    pub dense: DenseParams,
    pub max_len: usize,
    pub freeze_embeddings: bool,
    counters: ProbeCounters,
}

impl Clone for Classifier {
    fn clone(&self) -> Self {
        Classifier {
            vocab: self.vocab.clone(),
            embedding: self.embedding.clone(),
            lstm: self.lstm.clone(),
            dense: self.dense.clone(),
            max_len: self.max_len,
            freeze_embeddings: self.freeze_embeddings,
            counters: ProbeCounters::default(),
        }
    }
}

/// One forward pass worth of outputs.
#[derive(Debug, Clone)]
pub struct Inference {
    pub label: Label,
    pub probs: Vec<f64>,
    pub feature_map: Vec<f64>,
}

impl Classifier {
    /// Rebuilds a classifier from deserialized parts, validating that the
    /// component shapes agree.
    pub fn from_parts(
        mut vocab: Vocabulary,
        embedding: EmbeddingTable,
        lstm: LstmParams,
        dense: DenseParams,
        max_len: usize,
        freeze_embeddings: bool,
    ) -> Result<Self> {
        vocab.rebuild_index();
        if embedding.rows() != vocab.len() {
            return Err(Error::shape(format!(
                "embedding rows {} != vocabulary size {}",
                embedding.rows(),
                vocab.len()
            )));
        }
        if lstm.input != embedding.dim {
            return Err(Error::shape("lstm input width != embedding dim"));
        }
        if dense.input != lstm.hidden || dense.out != N_CLASSES {
            return Err(Error::shape("dense head shape mismatch"));
        }
        if max_len == 0 {
            return Err(Error::invalid("max_len must be >= 1"));
        }
        Ok(Classifier {
            vocab,
            embedding,
            lstm,
            dense,
            max_len,
            freeze_embeddings,
            counters: ProbeCounters::default(),
        })
    }

    pub fn hidden(&self) -> usize {
        self.lstm.hidden
    }

    /// Feature-map width: final hidden state plus pre-softmax logits.
    pub fn feature_width(&self) -> usize {
        self.lstm.hidden + N_CLASSES
    }

    pub fn forward_pass_count(&self) -> u64 {
        self.counters.forward_passes.load(Ordering::Relaxed)
    }

    pub fn feature_extraction_count(&self) -> u64 {
        self.counters.feature_extractions.load(Ordering::Relaxed)
    }

    /// Unpadded vocabulary ids for a document; an all-padding document maps
    /// to a single pad token so the recurrence always has one step.
    pub fn seq_ids(&self, doc: &RawDocument) -> Vec<usize> {
        let seq = preprocess(doc, &self.vocab, self.max_len);
        if seq.ids.is_empty() {
            vec![PAD]
        } else {
            seq.ids
        }
    }

    fn embed_ids(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter()
            .map(|&id| self.embedding.row(id).expect("id within table").to_vec())
            .collect()
    }

    fn forward_cached(&self, ids: &[usize]) -> (ForwardCache, Vec<f64>, Vec<f64>, Vec<f64>) {
        self.counters.forward_passes.fetch_add(1, Ordering::Relaxed);
        let inputs = self.embed_ids(ids);
        let h = self.lstm.hidden;
        let (_, final_hidden, cache) =
            lstm_forward(&self.lstm, &inputs, (&vec![0.0; h], &vec![0.0; h]))
                .expect("non-empty id sequence");
        let logits = self.dense.forward(&final_hidden).expect("consistent widths");
        let probs = softmax(&logits).expect("finite logits");
        (cache, final_hidden, logits, probs)
    }

    /// Black-box prediction over a preprocessed id sequence. This is the only
    /// model access the evasion attack is allowed.
    pub fn predict_ids(&self, ids: &[usize]) -> (Label, Vec<f64>) {
        let ids = if ids.is_empty() { &[PAD][..] } else { ids };
        let (_, _, _, probs) = self.forward_cached(ids);
        let label = Label::from_index(crate::num::argmax(&probs)).expect("two classes");
        (label, probs)
    }

    pub fn predict(&self, doc: &RawDocument) -> (Label, Vec<f64>) {
        self.predict_ids(&self.seq_ids(doc))
    }

    /// Feature map (final hidden state ++ logits) in its own forward pass.
    pub fn extract_feature_map(&self, doc: &RawDocument) -> Vec<f64> {
        self.counters
            .feature_extractions
            .fetch_add(1, Ordering::Relaxed);
        let ids = self.seq_ids(doc);
        let (_, hidden, logits, _) = self.forward_cached(&ids);
        let mut fm = hidden;
        fm.extend_from_slice(&logits);
        fm
    }

    /// Label, probabilities and feature map from a single forward pass.
    pub fn infer(&self, doc: &RawDocument) -> Inference {
        let ids = self.seq_ids(doc);
        let (_, hidden, logits, probs) = self.forward_cached(&ids);
        let label = Label::from_index(crate::num::argmax(&probs)).expect("two classes");
        let mut feature_map = hidden;
        feature_map.extend_from_slice(&logits);
        Inference {
            label,
            probs,
            feature_map,
        }
    }

    /// All trainable tensors in the fixed serialization/optimizer order:
    /// embedding, 12 LSTM tensors, dense weight, dense bias.
    pub fn tensors_mut(&mut self) -> Vec<&mut ParamTensor> {
        let mut out = Vec::with_capacity(15);
        out.push(&mut self.embedding.tensor);
        out.extend(self.lstm.tensors_mut());
        out.extend(self.dense.tensors_mut());
        out
    }

    pub fn tensors(&self) -> Vec<&ParamTensor> {
        let mut out = Vec::with_capacity(15);
        out.push(&self.embedding.tensor);
        out.extend(self.lstm.tensors());
        out.extend(self.dense.tensors());
        out
    }

    pub fn tensor_lens(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    pub fn zero_grads(&mut self) {
        for t in self.tensors_mut() {
            t.zero_grad();
        }
    }

    /// Mean cross-entropy over a batch, accumulating parameter gradients
    /// (scaled by 1/batch). Returns (mean loss, correct predictions).
    pub fn batch_grads(&mut self, batch: &[(Vec<usize>, usize)]) -> Result<(f64, usize)> {
        if batch.is_empty() {
            return Err(Error::invalid("empty training batch"));
        }
        self.zero_grads();
        let scale = 1.0 / batch.len() as f64;
        let mut total_loss = 0.0;
        let mut correct = 0;
        let freeze = self.freeze_embeddings;
        for (ids, target) in batch {
            let (cache, hidden, logits, probs) = self.forward_cached(ids);
            let (loss, mut dlogits) = softmax_cross_entropy(&logits, *target)?;
            total_loss += loss * scale;
            if crate::num::argmax(&probs) == *target {
                correct += 1;
            }
            for d in dlogits.iter_mut() {
                *d *= scale;
            }
            let dh = self.dense.backward(&hidden, &dlogits)?;
            let dx = lstm_backward(&mut self.lstm, &cache, &dh)?;
            if !freeze {
                let dim = self.embedding.dim;
                for (t, &id) in ids.iter().enumerate() {
                    let grad_row = &mut self.embedding.tensor.grad[id * dim..(id + 1) * dim];
                    for (g, d) in grad_row.iter_mut().zip(&dx[t]) {
                        *g += d;
                    }
                }
            }
        }
        Ok((total_loss, correct))
    }
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

/// Result of [`train_classifier`]: the model, the per-epoch log, and the
/// deterministic held-out split (indices into the input corpus).
#[derive(Debug)]
pub struct TrainOutcome {
    pub classifier: Classifier,
    pub log: Vec<EpochStats>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Deterministic stratified split; returns (train, test) indices.
pub fn stratified_split(
    labels: &[Label],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test_fraction must be in (0,1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in Label::ALL {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64) * test_fraction).round() as usize;
        test.extend(idx.drain(..n_test.min(idx.len())));
        train.extend(idx);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Trains the classifier on a deterministic stratified split of the corpus.
pub fn train_classifier(corpus: &[RawDocument], config: &TrainConfig) -> Result<TrainOutcome> {
    let labels: Vec<Label> = corpus.iter().map(|d| d.label).collect();
    let has_both = labels.contains(&Label::Ham) && labels.contains(&Label::Spam);
    if !has_both {
        return Err(Error::invalid(
            "training corpus must contain both ham and spam",
        ));
    }
    let (train_indices, test_indices) =
        stratified_split(&labels, config.test_fraction, config.seed)?;
    let train_docs: Vec<&RawDocument> = train_indices.iter().map(|&i| &corpus[i]).collect();

    // Vocabulary comes from the training portion only.
    let owned: Vec<RawDocument> = train_docs.iter().map(|d| (*d).clone()).collect();
    let mut vocab = crate::text::build_vocab(&owned, config.min_count)?;

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(1);
    let embedding = match &config.embedding_file {
        Some(path) => load_embedding_file(path, &mut vocab, config.seed)?,
        None => EmbeddingTable::random(vocab.len(), config.embed_dim, config.seed ^ 0x9e3779b9),
    };
    let embed_dim = embedding.dim;
    let lstm = LstmParams::init(config.hidden, embed_dim, 0.1, &mut init_rng);
    let dense = DenseParams::init("output", N_CLASSES, config.hidden, 0.1, &mut init_rng);

    let mut model = Classifier {
        vocab,
        embedding,
        lstm,
        dense,
        max_len: config.max_len,
        freeze_embeddings: config.freeze_embeddings,
        counters: ProbeCounters::default(),
    };

    let examples: Vec<(Vec<usize>, usize)> = train_docs
        .iter()
        .map(|d| (model.seq_ids(d), d.label.index()))
        .collect();

    let mut opt = OptimizerState::new(
        AdamConfig {
            lr: config.lr,
            ..AdamConfig::default()
        },
        &model.tensor_lens(),
    );

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(2);
    let mut log = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size.max(1)) {
            let batch: Vec<(Vec<usize>, usize)> =
                chunk.iter().map(|&i| examples[i].clone()).collect();
            let (loss, n_correct) = model.batch_grads(&batch)?;
            opt.step(&mut model.tensors_mut())?;
            loss_sum += loss;
            correct += n_correct;
            batches += 1;
        }
        log.push(EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / batches.max(1) as f64,
            train_accuracy: correct as f64 / examples.len() as f64,
        });
    }

    Ok(TrainOutcome {
        classifier: model,
        log,
        train_indices,
        test_indices,
    })
}

/// Standard confusion-matrix evaluation over a document set.
pub fn evaluate_classifier(model: &Classifier, docs: &[RawDocument]) -> Result<MetricsReport> {
    if docs.is_empty() {
        return Err(Error::invalid("evaluate_classifier on empty dataset"));
    }
    let pairs: Vec<(usize, usize)> = docs
        .iter()
        .map(|d| (d.label.index(), model.predict(d).0.index()))
        .collect();
    MetricsReport::from_pairs(&pairs, &CLASS_NAMES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthetic_corpus, SyntheticConfig};

    fn toy_corpus() -> Vec<RawDocument> {
        let ham = [
            "meeting agenda for the budget review today",
            "please send the quarterly report",
            "team lunch at the office",
            "schedule the project review",
            "travel notes attached for the conference",
        ];
        let spam = [
            "win free cash prize now",
            "claim your lottery bonus today",
            "cheap loan guarantee instant cash",
            "urgent winner claim your million",
            "exclusive discount pills free",
        ];
        let mut docs = Vec::new();
        for (i, t) in ham.iter().enumerate() {
            docs.push(RawDocument {
                id: format!("h{i}"),
                text: t.to_string(),
                label: Label::Ham,
            });
        }
        for (i, t) in spam.iter().enumerate() {
            docs.push(RawDocument {
                id: format!("s{i}"),
                text: t.to_string(),
                label: Label::Spam,
            });
        }
        docs
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            hidden: 8,
            embed_dim: 6,
            max_len: 12,
            min_count: 1,
            epochs: 200,
            batch_size: 4,
            seed: 5,
            test_fraction: 0.2,
            ..Default::default()
        }
    }

    #[test]
    fn overfits_toy_corpus() {
        let corpus = toy_corpus();
        let out = train_classifier(&corpus, &small_config()).unwrap();
        let last = out.log.last().unwrap();
        assert_eq!(last.train_accuracy, 1.0, "failed to overfit: {last:?}");
        // Evaluating on the training set after overfitting gives accuracy 1.
        let train_docs: Vec<RawDocument> = out
            .train_indices
            .iter()
            .map(|&i| corpus[i].clone())
            .collect();
        let report = evaluate_classifier(&out.classifier, &train_docs).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = toy_corpus();
        let mut cfg = small_config();
        cfg.epochs = 20;
        let a = train_classifier(&corpus, &cfg).unwrap();
        let b = train_classifier(&corpus, &cfg).unwrap();
        for (ta, tb) in a.classifier.tensors().iter().zip(b.classifier.tensors()) {
            assert_eq!(ta.values, tb.values, "tensor {} differs", ta.name);
        }
        assert_eq!(a.train_indices, b.train_indices);
    }

    #[test]
    fn single_category_corpus_rejected() {
        let corpus: Vec<RawDocument> = toy_corpus()
            .into_iter()
            .filter(|d| d.label == Label::Ham)
            .collect();
        assert!(train_classifier(&corpus, &small_config()).is_err());
    }

    #[test]
    fn predict_consistent_with_probabilities() {
        let corpus = toy_corpus();
        let mut cfg = small_config();
        cfg.epochs = 30;
        let out = train_classifier(&corpus, &cfg).unwrap();
        for doc in &corpus {
            let (label, probs) = out.classifier.predict(doc);
            assert_eq!(label.index(), crate::num::argmax(&probs));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tie_breaks_to_ham() {
        // A fresh zero-weight model produces exactly tied logits.
        let corpus = toy_corpus();
        let vocab = crate::text::build_vocab(&corpus, 1).unwrap();
        let embedding = EmbeddingTable::random(vocab.len(), 4, 1);
        let model = Classifier {
            vocab,
            embedding,
            lstm: LstmParams::zeros(4, 4),
            dense: DenseParams::zeros("output", N_CLASSES, 4),
            max_len: 10,
            freeze_embeddings: false,
            counters: ProbeCounters::default(),
        };
        let (label, probs) = model.predict(&corpus[0]);
        assert_eq!(label, Label::Ham);
        assert!((probs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn feature_map_shape_and_determinism() {
        let corpus = toy_corpus();
        let mut cfg = small_config();
        cfg.epochs = 10;
        let out = train_classifier(&corpus, &cfg).unwrap();
        let model = &out.classifier;
        let fm1 = model.extract_feature_map(&corpus[0]);
        let fm2 = model.extract_feature_map(&corpus[0]);
        assert_eq!(fm1.len(), model.feature_width());
        assert_eq!(fm1, fm2);
    }

    #[test]
    fn infer_matches_predict_and_counts_one_pass() {
        let corpus = toy_corpus();
        let mut cfg = small_config();
        cfg.epochs = 10;
        let out = train_classifier(&corpus, &cfg).unwrap();
        let model = out.classifier.clone(); // fresh counters
        let before = model.forward_pass_count();
        let inference = model.infer(&corpus[3]);
        assert_eq!(model.forward_pass_count(), before + 1);
        let (label, probs) = model.predict(&corpus[3]);
        assert_eq!(inference.label, label);
        assert_eq!(inference.probs, probs);
        assert_eq!(inference.feature_map.len(), model.feature_width());
    }

    #[test]
    fn logit_scaling_preserves_label() {
        let corpus = toy_corpus();
        let mut cfg = small_config();
        cfg.epochs = 30;
        let mut out = train_classifier(&corpus, &cfg).unwrap();
        let labels_before: Vec<Label> =
            corpus.iter().map(|d| out.classifier.predict(d).0).collect();
        // Scale the output layer by a positive constant.
        for t in out.classifier.dense.tensors_mut() {
            for v in t.values.iter_mut() {
                *v *= 3.5;
            }
        }
        let labels_after: Vec<Label> =
            corpus.iter().map(|d| out.classifier.predict(d).0).collect();
        assert_eq!(labels_before, labels_after);
    }

    #[test]
    fn stratified_split_is_stratified_and_seeded() {
        let corpus = synthetic_corpus(&SyntheticConfig {
            n_docs: 100,
            ..Default::default()
        });
        let labels: Vec<Label> = corpus.iter().map(|d| d.label).collect();
        let (train, test) = stratified_split(&labels, 0.2, 9).unwrap();
        assert_eq!(train.len() + test.len(), 100);
        let test_spam = test.iter().filter(|&&i| labels[i] == Label::Spam).count();
        assert_eq!(test_spam, 10);
        let (train2, test2) = stratified_split(&labels, 0.2, 9).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }
}
