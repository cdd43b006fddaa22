//! Drives the binary through the full stage chain against temp directories.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_spamlab"))
        .args(args)
        .status()
        .expect("spawn spamlab");
    assert!(status.success(), "spamlab {args:?} failed");
}

fn assert_file(dir: &Path, name: &str) {
    let path = dir.join(name);
    assert!(path.is_file(), "missing artifact {}", path.display());
    assert!(
        path.metadata().unwrap().len() > 0,
        "empty artifact {}",
        path.display()
    );
}

#[test]
fn stage_chain_produces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let model = dir.path().join("model.json");
    let model = model.to_str().unwrap();
    let pairs = dir.path().join("attack_corpus.csv");
    let pairs = pairs.to_str().unwrap();
    let detector = dir.path().join("detector.json");
    let detector = detector.to_str().unwrap();
    let corpus = dir.path().join("corpus.csv");
    let corpus = corpus.to_str().unwrap();
    // The spec-default cosine gate finds no successful substitutions on the
    // synthetic corpus, so widen the attack for the smoke chain.
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "[corpus]\nn_docs = 200\n\n[train]\nepochs = 4\nhidden = 8\n\n[attack]\nbudget = 0.6\nk = 80\nmin_cosine = -1.0\n",
    )
    .unwrap();
    let config = config.to_str().unwrap();

    run(&["train", "--seed", "7", "--config", config, "--out", out]);
    assert_file(dir.path(), "corpus.csv");
    assert_file(dir.path(), "model.json");
    assert_file(dir.path(), "train_metrics.json");

    run(&[
        "attack", "--seed", "7", "--config", config, "--model", model, "--n-pairs", "30", "--out", out,
    ]);
    assert_file(dir.path(), "attack_corpus.csv");

    run(&[
        "build-detector", "--seed", "7", "--config", config, "--model", model, "--pairs", pairs, "--out", out,
    ]);
    assert_file(dir.path(), "detector.json");
    assert_file(dir.path(), "detector_metrics.json");

    run(&[
        "retrain", "--seed", "7", "--config", config, "--model", model, "--pairs", pairs, "--strategy", "ewc",
        "--out", out,
    ]);
    assert_file(dir.path(), "retrain_log.json");

    run(&[
        "benchmark", "--seed", "7", "--model", model, "--detector", detector, "--sizes",
        "1,50", "--repetitions", "2", "--out", out,
    ]);
    assert_file(dir.path(), "benchmark.csv");
    let csv = std::fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    assert!(csv.starts_with("pipeline,n_samples,median_seconds,repetitions"));

    run(&[
        "eval", "--seed", "7", "--model", model, "--corpus", corpus, "--out", out,
    ]);
    assert_file(dir.path(), "eval_metrics.json");
}

#[test]
fn experiment_runs_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "repetitions = 2\nsessions = 2\nn_attack_pairs = 20\n\n[corpus]\nn_docs = 120\n\n[train]\nepochs = 3\nhidden = 8\n\n[attack]\nbudget = 0.6\nk = 80\nmin_cosine = -1.0\n",
    )
    .unwrap();
    run(&[
        "experiment",
        "--seed",
        "3",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_file(dir.path(), "report.json");
    assert_file(dir.path(), "report.txt");
}
