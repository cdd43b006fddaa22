//! `spamlab`: train the spam filter, attack it, build the adversarial
//! detector, retrain continually, benchmark the deployment pipelines and run
//! the full experiment from one binary.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spamlab_core::attack::{generate_attack_corpus, read_attack_corpus, write_attack_corpus};
use spamlab_core::classifier::{evaluate_classifier, train_classifier};
use spamlab_core::continual::{retrain_session, Strategy};
use spamlab_core::corpus::{ingest_corpus, synthetic_corpus, write_corpus, RawDocument};
use spamlab_core::detector::{build_detector_dataset, train_detector, write_detector_dataset};
use spamlab_core::experiment::{
    load_experiment_config, run_full_experiment, run_lambda_sweep, run_metadata, write_report,
    ExperimentConfig,
};
use spamlab_core::pipeline::{run_timing_benchmark, write_benchmark_csv, write_plot_data};
use spamlab_core::serialize::{load_classifier, load_detector, save_classifier, save_detector};
use spamlab_core::{Error, Result};

#[derive(Parser)]
#[command(name = "spamlab", version, about = "Spam-filter robustness laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Seed overriding every configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Experiment configuration (TOML); defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train the classifier and save it with its held-out metrics.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Generate an evasion attack corpus against a trained model.
    Attack {
        #[command(flatten)]
        common: Common,
        /// Saved classifier container.
        #[arg(long)]
        model: PathBuf,
        /// Successful pairs to collect.
        #[arg(long, default_value_t = 100)]
        n_pairs: usize,
    },
    /// Train the adversarial detector from an attack corpus.
    BuildDetector {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Attack corpus CSV produced by `attack`.
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Run one continual retraining session and save the updated model.
    Retrain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// Retraining strategy: finetune or ewc.
        #[arg(long)]
        strategy: Option<Strategy>,
    },
    /// Time the single-pass and two-stage pipelines.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        detector: PathBuf,
        /// Comma-separated workload sizes.
        #[arg(long, default_value = "1,100,10000", value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
    },
    /// Run the full multi-repetition experiment.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Comma-separated lambda grid; when given, runs the EWC
        /// sensitivity sweep instead of the main experiment.
        #[arg(long, value_delimiter = ',')]
        lambda_sweep: Option<Vec<f64>>,
    },
    /// Evaluate a saved model on a corpus.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Corpus CSV; falls back to the configured corpus.
        #[arg(long)]
        corpus: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => load_experiment_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
        config.train.seed = seed;
        config.attack.seed = seed;
        config.detector.seed = seed;
        config.retrain.seed = seed;
        config.corpus.seed = seed;
    }
    Ok(config)
}

fn load_docs(config: &ExperimentConfig) -> Result<Vec<RawDocument>> {
    match &config.corpus_file {
        Some(path) => ingest_corpus(path),
        None => Ok(synthetic_corpus(&config.corpus)),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn cmd_train(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    let corpus = load_docs(&config)?;
    write_corpus(&common.out.join("corpus.csv"), &corpus)?;
    let outcome = train_classifier(&corpus, &config.train)?;
    let test_docs: Vec<RawDocument> = outcome
        .test_indices
        .iter()
        .map(|&i| corpus[i].clone())
        .collect();
    let report = evaluate_classifier(&outcome.classifier, &test_docs)?;
    save_classifier(
        &common.out.join("model.json"),
        &outcome.classifier,
        &[],
        &run_metadata(&config),
    )?;
    write_json(&common.out.join("train_metrics.json"), &report)?;
    write_json(&common.out.join("train_log.json"), &outcome.log)?;
    println!(
        "trained on {} documents; held-out accuracy {:.4}",
        corpus.len(),
        report.accuracy
    );
    println!("model saved to {}", common.out.join("model.json").display());
    Ok(())
}

fn cmd_attack(common: &Common, model_path: &Path, n_pairs: usize) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    let (model, _, _) = load_classifier(model_path)?;
    let corpus = load_docs(&config)?;
    let result = generate_attack_corpus(&model, &corpus, n_pairs, &config.attack)?;
    let out_csv = common.out.join("attack_corpus.csv");
    write_attack_corpus(&out_csv, &result.pairs)?;
    println!(
        "attacked {} documents: {} evasions (success rate {:.4})",
        result.attempted,
        result.pairs.len(),
        result.success_rate
    );
    if result.shortfall {
        eprintln!(
            "warning: corpus exhausted before reaching {n_pairs} pairs ({} collected)",
            result.pairs.len()
        );
    }
    println!("attack corpus saved to {}", out_csv.display());
    Ok(())
}

fn cmd_build_detector(common: &Common, model_path: &Path, pairs_path: &Path) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    let (model, _, _) = load_classifier(model_path)?;
    let pairs = read_attack_corpus(pairs_path)?;
    let dataset = build_detector_dataset(&model, &pairs, config.seed)?;
    write_detector_dataset(&common.out.join("detector_dataset.csv"), &dataset)?;
    let outcome = train_detector(&dataset, &config.detector)?;
    save_detector(
        &common.out.join("detector.json"),
        &outcome.detector,
        &run_metadata(&config),
    )?;
    write_json(&common.out.join("detector_metrics.json"), &outcome.report)?;
    println!(
        "detector trained on {} samples; held-out accuracy {:.4}",
        dataset.len(),
        outcome.report.accuracy
    );
    println!(
        "detector saved to {}",
        common.out.join("detector.json").display()
    );
    Ok(())
}

fn cmd_retrain(
    common: &Common,
    model_path: &Path,
    pairs_path: &Path,
    strategy: Option<Strategy>,
) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    let (mut model, mut anchors, metadata) = load_classifier(model_path)?;
    let pairs = read_attack_corpus(pairs_path)?;
    let corpus = load_docs(&config)?;

    let mut session: Vec<RawDocument> = pairs.iter().map(|p| p.perturbed.clone()).collect();
    let n_replay = ((session.len() as f64) * config.replay_fraction).round() as usize;
    session.extend(corpus.iter().take(n_replay).cloned());

    let mut retrain_cfg = config.retrain.clone();
    if let Some(s) = strategy {
        retrain_cfg.strategy = s;
    }
    let log = retrain_session(&mut model, &mut anchors, &session, &corpus, &retrain_cfg)?;
    save_classifier(&common.out.join("model.json"), &model, &anchors, &metadata)?;
    write_json(&common.out.join("retrain_log.json"), &log)?;
    let last = log.last().expect("at least one epoch");
    println!(
        "retrained ({}) on {} documents; final session accuracy {:.4}",
        retrain_cfg.strategy,
        session.len(),
        last.train_accuracy
    );
    println!(
        "updated model saved to {}",
        common.out.join("model.json").display()
    );
    Ok(())
}

fn cmd_benchmark(
    common: &Common,
    model_path: &Path,
    detector_path: &Path,
    sizes: &[usize],
    repetitions: usize,
) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    let (model, _, _) = load_classifier(model_path)?;
    let (detector, _) = load_detector(detector_path)?;
    let corpus = load_docs(&config)?;
    let rows = run_timing_benchmark(&model, &detector, &corpus, sizes, repetitions)?;
    write_benchmark_csv(&common.out.join("benchmark.csv"), &rows)?;
    write_plot_data(&common.out.join("benchmark.dat"), &rows)?;
    for row in &rows {
        println!(
            "{:<12} n={:<7} median {:.6}s over {} repetitions",
            row.pipeline, row.n_samples, row.median_seconds, row.repetitions
        );
    }
    println!(
        "benchmark written to {}",
        common.out.join("benchmark.csv").display()
    );
    Ok(())
}

fn cmd_experiment(common: &Common, lambda_sweep: Option<&[f64]>) -> Result<()> {
    let config = load_config(common)?;
    ensure_out(&common.out)?;
    match lambda_sweep {
        Some(grid) => {
            let points = run_lambda_sweep(&config, grid)?;
            write_json(&common.out.join("lambda_sweep.json"), &points)?;
            for p in &points {
                let fmt = |v: Option<f64>| match v {
                    Some(v) => format!("{:+.4}", v),
                    None => "no data".to_string(),
                };
                println!(
                    "lambda {:>8}: recovery {} forgetting {}",
                    p.lambda,
                    fmt(p.recovery_mean),
                    fmt(p.forgetting_mean)
                );
            }
        }
        None => {
            let report = run_full_experiment(&config)?;
            write_report(&common.out, &report)?;
            print!("{}", spamlab_core::experiment::report_text(&report));
            println!("report written to {}", common.out.display());
        }
    }
    Ok(())
}

fn cmd_eval(common: &Common, model_path: &Path, corpus_path: &Path) -> Result<()> {
    ensure_out(&common.out)?;
    let (model, _, _) = load_classifier(model_path)?;
    let corpus = ingest_corpus(corpus_path)?;
    let report = evaluate_classifier(&model, &corpus)?;
    write_json(&common.out.join("eval_metrics.json"), &report)?;
    println!("accuracy {:.4} over {} documents", report.accuracy, report.n);
    for class in &report.per_class {
        println!(
            "{:<6} precision {:.4} recall {:.4} f1 {:.4}",
            class.class, class.precision, class.recall, class.f1
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train { common } => cmd_train(common),
        Command::Attack {
            common,
            model,
            n_pairs,
        } => cmd_attack(common, model, *n_pairs),
        Command::BuildDetector {
            common,
            model,
            pairs,
        } => cmd_build_detector(common, model, pairs),
        Command::Retrain {
            common,
            model,
            pairs,
            strategy,
        } => cmd_retrain(common, model, pairs, *strategy),
        Command::Benchmark {
            common,
            model,
            detector,
            sizes,
            repetitions,
        } => cmd_benchmark(common, model, detector, sizes, *repetitions),
        Command::Experiment {
            common,
            lambda_sweep,
        } => cmd_experiment(common, lambda_sweep.as_deref()),
        Command::Eval {
            common,
            model,
            corpus,
        } => cmd_eval(common, model, corpus),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
