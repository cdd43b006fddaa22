//! Versioned JSON containers for trained models. Serialization is
//! deterministic: saving the same model twice yields byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::continual::SessionAnchor;
use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::num::{DenseParams, LstmParams, ParamTensor};
use crate::text::{EmbeddingTable, Vocabulary};

pub const FORMAT_VERSION: u32 = 1;

/// One named parameter tensor with its shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl TensorRecord {
    fn from_tensor(t: &ParamTensor) -> Self {
        TensorRecord {
            name: t.name.clone(),
            shape: t.shape.clone(),
            values: t.values.clone(),
        }
    }

    /// Copies values into `target`, insisting on matching name and shape.
    fn restore_into(&self, target: &mut ParamTensor) -> Result<()> {
        if self.name != target.name {
            return Err(Error::Validation(format!(
                "tensor name mismatch: file has {:?}, expected {:?}",
                self.name, target.name
            )));
        }
        if self.shape != target.shape || self.values.len() != target.values.len() {
            return Err(Error::shape(format!(
                "tensor {} shape mismatch: file {:?}, expected {:?}",
                self.name, self.shape, target.shape
            )));
        }
        target.values.copy_from_slice(&self.values);
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifierContainer {
    format_version: u32,
    kind: String,
    metadata: BTreeMap<String, String>,
    max_len: usize,
    freeze_embeddings: bool,
    hidden: usize,
    embed_dim: usize,
    vocab: Vocabulary,
    tensors: Vec<TensorRecord>,
    anchors: Vec<SessionAnchor>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DetectorContainer {
    format_version: u32,
    kind: String,
    metadata: BTreeMap<String, String>,
    input: usize,
    hidden: usize,
    threshold: f64,
    mean: Vec<f64>,
    std: Vec<f64>,
    tensors: Vec<TensorRecord>,
}

fn check_header(version: u32, kind: &str, expected: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported container version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if kind != expected {
        return Err(Error::Validation(format!(
            "container kind {kind:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec(value).map_err(|e| Error::Serialization(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// Saves the classifier, its consolidation anchors and free-form metadata.
pub fn save_classifier(
    path: &Path,
    model: &Classifier,
    anchors: &[SessionAnchor],
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let container = ClassifierContainer {
        format_version: FORMAT_VERSION,
        kind: "classifier".into(),
        metadata: metadata.clone(),
        max_len: model.max_len,
        freeze_embeddings: model.freeze_embeddings,
        hidden: model.hidden(),
        embed_dim: model.embedding.dim,
        vocab: model.vocab.clone(),
        tensors: model.tensors().iter().map(|t| TensorRecord::from_tensor(t)).collect(),
        anchors: anchors.to_vec(),
    };
    write_json(path, &container)
}

/// Loads a classifier container saved by [`save_classifier`].
pub fn load_classifier(
    path: &Path,
) -> Result<(Classifier, Vec<SessionAnchor>, BTreeMap<String, String>)> {
    let c: ClassifierContainer = read_json(path)?;
    check_header(c.format_version, &c.kind, "classifier")?;
    let expected = 1 + 12 + 2;
    if c.tensors.len() != expected {
        return Err(Error::Validation(format!(
            "classifier container has {} tensors, expected {expected}",
            c.tensors.len()
        )));
    }
    let vocab_size = c.vocab.len();
    let mut embedding = EmbeddingTable {
        tensor: ParamTensor::zeros("embedding", &[vocab_size, c.embed_dim]),
        dim: c.embed_dim,
    };
    let mut lstm = LstmParams::zeros(c.hidden, c.embed_dim);
    let mut dense = DenseParams::zeros("output", crate::classifier::N_CLASSES, c.hidden);

    let mut records = c.tensors.iter();
    records
        .next()
        .unwrap()
        .restore_into(&mut embedding.tensor)?;
    for target in lstm.tensors_mut() {
        records.next().unwrap().restore_into(target)?;
    }
    for target in dense.tensors_mut() {
        records.next().unwrap().restore_into(target)?;
    }

    let model = Classifier::from_parts(
        c.vocab,
        embedding,
        lstm,
        dense,
        c.max_len,
        c.freeze_embeddings,
    )?;
    Ok((model, c.anchors, c.metadata))
}

/// Saves the detector in the same container format.
pub fn save_detector(
    path: &Path,
    detector: &Detector,
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    let container = DetectorContainer {
        format_version: FORMAT_VERSION,
        kind: "detector".into(),
        metadata: metadata.clone(),
        input: detector.input,
        hidden: detector.layer1.out,
        threshold: detector.threshold,
        mean: detector.mean.clone(),
        std: detector.std.clone(),
        tensors: detector
            .layer1
            .tensors()
            .iter()
            .chain(detector.layer2.tensors().iter())
            .map(|t| TensorRecord::from_tensor(t))
            .collect(),
    };
    write_json(path, &container)
}

/// Loads a detector container saved by [`save_detector`].
pub fn load_detector(path: &Path) -> Result<(Detector, BTreeMap<String, String>)> {
    let c: DetectorContainer = read_json(path)?;
    check_header(c.format_version, &c.kind, "detector")?;
    if c.tensors.len() != 4 {
        return Err(Error::Validation(format!(
            "detector container has {} tensors, expected 4",
            c.tensors.len()
        )));
    }
    if c.mean.len() != c.input || c.std.len() != c.input {
        return Err(Error::shape("detector standardization width mismatch"));
    }
    let mut layer1 = DenseParams::zeros("detector.layer1", c.hidden, c.input);
    let mut layer2 = DenseParams::zeros("detector.layer2", 2, c.hidden);
    let mut records = c.tensors.iter();
    for target in layer1.tensors_mut() {
        records.next().unwrap().restore_into(target)?;
    }
    for target in layer2.tensors_mut() {
        records.next().unwrap().restore_into(target)?;
    }
    let detector = Detector {
        layer1,
        layer2,
        mean: c.mean,
        std: c.std,
        threshold: c.threshold,
        input: c.input,
    };
    Ok((detector, c.metadata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train_classifier, TrainConfig};
    use crate::continual::{estimate_fisher_diagonal, SessionAnchor};
    use crate::corpus::{synthetic_corpus, SyntheticConfig};
    use crate::detector::{train_detector, DetectorConfig, DetectorSample};
    use crate::corpus::Label;

    fn small_model() -> (Classifier, Vec<crate::corpus::RawDocument>) {
        let corpus = synthetic_corpus(&SyntheticConfig {
            n_docs: 40,
            min_tokens: 4,
            max_tokens: 8,
            seed: 77,
        });
        let out = train_classifier(
            &corpus,
            &TrainConfig {
                hidden: 5,
                embed_dim: 4,
                max_len: 10,
                min_count: 1,
                epochs: 2,
                batch_size: 8,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        (out.classifier, corpus)
    }

    #[test]
    fn classifier_roundtrip_preserves_everything() {
        let (mut model, corpus) = small_model();
        let fisher = estimate_fisher_diagonal(&mut model, &corpus, 5).unwrap();
        let anchors = vec![SessionAnchor {
            theta_star: model.tensors().iter().map(|t| t.values.clone()).collect(),
            fisher,
            lambda: 10.0,
        }];
        let mut metadata = BTreeMap::new();
        metadata.insert("note".to_string(), "roundtrip".to_string());

        let f = tempfile::NamedTempFile::new().unwrap();
        save_classifier(f.path(), &model, &anchors, &metadata).unwrap();
        let (loaded, loaded_anchors, loaded_meta) = load_classifier(f.path()).unwrap();

        for (a, b) in model.tensors().iter().zip(loaded.tensors().iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.values, b.values);
        }
        assert_eq!(loaded_anchors.len(), 1);
        assert_eq!(loaded_anchors[0].lambda, 10.0);
        assert_eq!(loaded_anchors[0].fisher, anchors[0].fisher);
        assert_eq!(loaded_meta, metadata);
        // Behavior identical, including vocabulary lookups.
        for doc in corpus.iter().take(10) {
            assert_eq!(model.predict(doc).0, loaded.predict(doc).0);
            assert_eq!(model.predict(doc).1, loaded.predict(doc).1);
        }
    }

    #[test]
    fn serialization_is_byte_identical() {
        let (model, _) = small_model();
        let f1 = tempfile::NamedTempFile::new().unwrap();
        let f2 = tempfile::NamedTempFile::new().unwrap();
        let meta = BTreeMap::new();
        save_classifier(f1.path(), &model, &[], &meta).unwrap();
        save_classifier(f2.path(), &model, &[], &meta).unwrap();
        let a = std::fs::read(f1.path()).unwrap();
        let b = std::fs::read(f2.path()).unwrap();
        assert_eq!(a, b);
        // And a load/save cycle reproduces the same bytes.
        let (loaded, anchors, meta) = load_classifier(f1.path()).unwrap();
        let f3 = tempfile::NamedTempFile::new().unwrap();
        save_classifier(f3.path(), &loaded, &anchors, &meta).unwrap();
        assert_eq!(a, std::fs::read(f3.path()).unwrap());
    }

    #[test]
    fn detector_roundtrip() {
        let mut rng_val = 0.0;
        let samples: Vec<DetectorSample> = (0..40)
            .map(|i| {
                rng_val += 0.37;
                let adversarial = i % 2 == 0;
                let base = if adversarial { 1.5 } else { -1.5 };
                DetectorSample {
                    features: vec![base + (rng_val % 1.0), base, base * 0.5],
                    adversarial,
                    source_label: Label::Ham,
                }
            })
            .collect();
        let out = train_detector(
            &samples,
            &DetectorConfig {
                hidden: 6,
                epochs: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_detector(f.path(), &out.detector, &BTreeMap::new()).unwrap();
        let (loaded, _) = load_detector(f.path()).unwrap();
        for s in &samples {
            assert_eq!(
                out.detector.score(&s.features).unwrap(),
                loaded.score(&s.features).unwrap()
            );
        }
    }

    #[test]
    fn wrong_kind_and_version_rejected() {
        let (model, _) = small_model();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_classifier(f.path(), &model, &[], &BTreeMap::new()).unwrap();
        assert!(load_detector(f.path()).is_err());

        let text = std::fs::read_to_string(f.path()).unwrap();
        let bumped = text.replace("\"format_version\":1", "\"format_version\":99");
        let f2 = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f2.path(), bumped).unwrap();
        assert!(load_classifier(f2.path()).is_err());
    }

    #[test]
    fn corrupted_tensor_shape_rejected() {
        let (model, _) = small_model();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_classifier(f.path(), &model, &[], &BTreeMap::new()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        // Rename a tensor so restoration cannot match it.
        let corrupted = text.replace("\"name\":\"lstm.w_i\"", "\"name\":\"lstm.w_q\"");
        assert_ne!(text, corrupted);
        let f2 = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f2.path(), corrupted).unwrap();
        assert!(load_classifier(f2.path()).is_err());
    }
}
