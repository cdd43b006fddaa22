//! Adversarial-input detector: a small MLP over the classifier's feature map
//! (final hidden state ++ logits) that flags inputs as normal or adversarial.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attack::AdvPair;
use crate::classifier::Classifier;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::num::{adam::AdamConfig, adam::OptimizerState, dense::DenseParams, softmax, softmax_cross_entropy};

pub const DETECTOR_CLASS_NAMES: [&str; 2] = ["normal", "adversarial"];

/// One labelled feature map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorSample {
    pub features: Vec<f64>,
    pub adversarial: bool,
    /// Gold label of the document the feature map came from.
    pub source_label: Label,
}

/// Detector training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub test_fraction: f64,
    /// Adversarial-probability decision threshold; scores at or above it are
    /// flagged adversarial.
    pub threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            hidden: 32,
            epochs: 40,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 17,
            test_fraction: 0.2,
            threshold: 0.5,
        }
    }
}

/// Trained detector: input standardization followed by a tanh MLP with a
/// two-way softmax head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detector {
    pub layer1: DenseParams,
    pub layer2: DenseParams,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub threshold: f64,
    pub input: usize,
}

impl Detector {
    fn standardize(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.input {
            return Err(Error::shape(format!(
                "detector input width {} != {}",
                features.len(),
                self.input
            )));
        }
        Ok(features
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }

    /// Probabilities [normal, adversarial].
    pub fn score(&self, features: &[f64]) -> Result<Vec<f64>> {
        let x = self.standardize(features)?;
        let h: Vec<f64> = self.layer1.forward(&x)?.iter().map(|z| z.tanh()).collect();
        softmax(&self.layer2.forward(&h)?)
    }

    /// True when the adversarial probability reaches the threshold.
    pub fn detect(&self, features: &[f64]) -> Result<bool> {
        Ok(self.score(features)?[1] >= self.threshold)
    }
}

/// Upsamples every group (keyed by `key`) with replacement to the size of the
/// largest group. All originals are kept; extras are drawn seeded.
pub fn oversample_with_replacement<T: Clone, K: Ord>(
    samples: &[T],
    key: impl Fn(&T) -> K,
    seed: u64,
) -> Vec<T> {
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        groups.entry(key(s)).or_default().push(i);
    }
    let target = groups.values().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for idx in groups.values() {
        out.extend(idx.iter().map(|&i| samples[i].clone()));
        for _ in idx.len()..target {
            out.push(samples[idx[rng.gen_range(0..idx.len())]].clone());
        }
    }
    out
}

/// Extracts feature maps from attack pairs and balances the four cells
/// (adversarial x source label) by oversampling.
pub fn build_detector_dataset(
    model: &Classifier,
    pairs: &[AdvPair],
    seed: u64,
) -> Result<Vec<DetectorSample>> {
    if pairs.is_empty() {
        return Err(Error::invalid("detector dataset from zero attack pairs"));
    }
    let mut samples = Vec::with_capacity(pairs.len() * 2);
    for pair in pairs {
        samples.push(DetectorSample {
            features: model.extract_feature_map(&pair.original),
            adversarial: false,
            source_label: pair.original.label,
        });
        samples.push(DetectorSample {
            features: model.extract_feature_map(&pair.perturbed),
            adversarial: true,
            source_label: pair.perturbed.label,
        });
    }
    Ok(oversample_with_replacement(
        &samples,
        |s| (s.adversarial, s.source_label.index()),
        seed,
    ))
}

/// Per-epoch detector training statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorEpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug)]
pub struct DetectorTrainOutcome {
    pub detector: Detector,
    /// Held-out metrics, classes [normal, adversarial].
    pub report: MetricsReport,
    pub log: Vec<DetectorEpochStats>,
}

fn detector_split(
    samples: &[DetectorSample],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test_fraction must be in (0,1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for adversarial in [false, true] {
        let mut idx: Vec<usize> = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.adversarial == adversarial)
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

/// Trains the detector on a stratified split of the samples; standardization
/// statistics come from the training portion only.
pub fn train_detector(
    samples: &[DetectorSample],
    config: &DetectorConfig,
) -> Result<DetectorTrainOutcome> {
    if samples.is_empty() {
        return Err(Error::invalid("empty detector dataset"));
    }
    let width = samples[0].features.len();
    if samples.iter().any(|s| s.features.len() != width) {
        return Err(Error::shape("inconsistent detector feature widths"));
    }
    if !samples.iter().any(|s| s.adversarial) || !samples.iter().any(|s| !s.adversarial) {
        return Err(Error::invalid(
            "detector training needs both normal and adversarial samples",
        ));
    }
    if config.hidden == 0 || config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::invalid("detector hidden/epochs/batch_size must be >= 1"));
    }

    let (train_idx, test_idx) = detector_split(samples, config.test_fraction, config.seed)?;
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::invalid("detector split left an empty side"));
    }

    // Standardization from the training portion; degenerate features get a
    // unit scale so they pass through as zeros.
    let n_train = train_idx.len() as f64;
    let mut mean = vec![0.0; width];
    for &i in &train_idx {
        for (m, x) in mean.iter_mut().zip(&samples[i].features) {
            *m += x / n_train;
        }
    }
    let mut std = vec![0.0; width];
    for &i in &train_idx {
        for (s, (x, m)) in std.iter_mut().zip(samples[i].features.iter().zip(&mean)) {
            *s += (x - m) * (x - m) / n_train;
        }
    }
    for s in std.iter_mut() {
        *s = s.sqrt();
        if *s < 1e-8 {
            *s = 1.0;
        }
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(1);
    let mut detector = Detector {
        layer1: DenseParams::init("detector.layer1", config.hidden, width, 0.1, &mut init_rng),
        layer2: DenseParams::init("detector.layer2", 2, config.hidden, 0.1, &mut init_rng),
        mean,
        std,
        threshold: config.threshold,
        input: width,
    };

    let lens: Vec<usize> = detector
        .layer1
        .tensors()
        .iter()
        .chain(detector.layer2.tensors().iter())
        .map(|t| t.len())
        .collect();
    let mut opt = OptimizerState::new(config.adam.clone(), &lens);

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(2);
    let mut order = train_idx.clone();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            for t in detector.layer1.tensors_mut() {
                t.zero_grad();
            }
            for t in detector.layer2.tensors_mut() {
                t.zero_grad();
            }
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let sample = &samples[i];
                let target = sample.adversarial as usize;
                let x = detector.standardize(&sample.features)?;
                let z: Vec<f64> = detector.layer1.forward(&x)?;
                let h: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
                let logits = detector.layer2.forward(&h)?;
                let (loss, mut dlogits) = softmax_cross_entropy(&logits, target)?;
                total_loss += loss * scale;
                if crate::num::argmax(&logits) == target {
                    correct += 1;
                }
                for d in dlogits.iter_mut() {
                    *d *= scale;
                }
                let dh = detector.layer2.backward(&h, &dlogits)?;
                let dz: Vec<f64> = dh
                    .iter()
                    .zip(&h)
                    .map(|(d, hv)| d * (1.0 - hv * hv))
                    .collect();
                detector.layer1.backward(&x, &dz)?;
            }
            let mut tensors = detector.layer1.tensors_mut();
            tensors.extend(detector.layer2.tensors_mut());
            opt.step(&mut tensors)?;
        }
        log.push(DetectorEpochStats {
            epoch,
            mean_loss: total_loss / (order.len() as f64 / config.batch_size as f64).max(1.0),
            train_accuracy: correct as f64 / order.len() as f64,
        });
    }

    let pairs: Vec<(usize, usize)> = test_idx
        .iter()
        .map(|&i| {
            let gold = samples[i].adversarial as usize;
            let pred = detector.detect(&samples[i].features).map(usize::from)?;
            Ok((gold, pred))
        })
        .collect::<Result<_>>()?;
    let report = MetricsReport::from_pairs(&pairs, &DETECTOR_CLASS_NAMES)?;

    Ok(DetectorTrainOutcome {
        detector,
        report,
        log,
    })
}

/// Writes samples as CSV: `adversarial,source_label,f0..f{n-1}`.
pub fn write_detector_dataset(path: &Path, samples: &[DetectorSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("no detector samples to write"));
    }
    let width = samples[0].features.len();
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Serialization(e.to_string()))?;
    let mut header = vec!["adversarial".to_string(), "source_label".to_string()];
    header.extend((0..width).map(|i| format!("f{i}")));
    writer
        .write_record(&header)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for s in samples {
        let mut row = vec![
            (s.adversarial as usize).to_string(),
            s.source_label.to_string(),
        ];
        row.extend(s.features.iter().map(|v| format!("{v:?}")));
        writer
            .write_record(&row)
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}
