//! Shared fixture construction for the pipeline benchmarks.

use spamlab_core::attack::{generate_attack_corpus, AttackConfig};
use spamlab_core::classifier::{train_classifier, Classifier, TrainConfig};
use spamlab_core::corpus::{synthetic_corpus, RawDocument, SyntheticConfig};
use spamlab_core::detector::{build_detector_dataset, train_detector, Detector, DetectorConfig};

/// Trains a small classifier and detector over a synthetic corpus, returning
/// both models and the documents to use as the benchmark workload.
pub fn benchmark_fixture() -> (Classifier, Detector, Vec<RawDocument>) {
    let corpus = synthetic_corpus(&SyntheticConfig {
        n_docs: 200,
        min_tokens: 10,
        max_tokens: 20,
        seed: 31,
    });
    let model = train_classifier(
        &corpus,
        &TrainConfig {
            hidden: 32,
            embed_dim: 16,
            max_len: 24,
            min_count: 1,
            epochs: 8,
            batch_size: 16,
            seed: 19,
            ..Default::default()
        },
    )
    .expect("training the benchmark classifier")
    .classifier;
    let attack = AttackConfig {
        budget: 0.6,
        k: 80,
        min_cosine: -1.0,
        seed: 0,
    };
    let pairs = generate_attack_corpus(&model, &corpus, 40, &attack)
        .expect("attacking the benchmark classifier")
        .pairs;
    let dataset = build_detector_dataset(&model, &pairs, 3).expect("detector dataset");
    let detector = train_detector(
        &dataset,
        &DetectorConfig {
            epochs: 15,
            ..Default::default()
        },
    )
    .expect("training the benchmark detector")
    .detector;
    (model, detector, corpus)
}
