//! Deployment pipelines. The single-pass pipeline classifies in one forward
//! pass and buffers the feature map for offline detection; the conventional
//! two-stage pipeline re-runs the network to extract features and consults
//! the detector inline on every message.

use std::collections::VecDeque;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, Inference};
use crate::corpus::{Label, RawDocument};
use crate::detector::Detector;
use crate::error::{Error, Result};

pub const DEFAULT_BUFFER_CAPACITY: usize = 100_000;

/// A buffered feature map tagged with a strictly increasing sequence number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BufferedFeature {
    pub seq: u64,
    pub features: Vec<f64>,
}

/// Bounded FIFO buffer of feature maps; when full, the oldest entry is
/// evicted.
#[derive(Debug)]
pub struct FeatureBuffer {
    capacity: usize,
    next_seq: u64,
    evicted: u64,
    entries: VecDeque<BufferedFeature>,
}

impl FeatureBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("feature buffer capacity must be >= 1"));
        }
        Ok(FeatureBuffer {
            capacity,
            next_seq: 0,
            evicted: 0,
            entries: VecDeque::new(),
        })
    }

    pub fn push(&mut self, features: Vec<f64>) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
            self.evicted += 1;
        }
        self.entries.push_back(BufferedFeature { seq, features });
        seq
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total entries ever pushed.
    pub fn pushed(&self) -> u64 {
        self.next_seq
    }

    /// Entries dropped to make room.
    pub fn evicted(&self) -> u64 {
        self.evicted
    }

    /// Removes and returns all buffered entries, oldest first.
    pub fn drain(&mut self) -> Vec<BufferedFeature> {
        self.entries.drain(..).collect()
    }
}

/// Single-pass inference: classify in one forward pass and buffer the
/// feature map. The detector is not consulted.
pub fn single_pass_infer(
    model: &Classifier,
    buffer: &mut FeatureBuffer,
    doc: &RawDocument,
) -> Inference {
    let inference = model.infer(doc);
    buffer.push(inference.feature_map.clone());
    inference
}

/// One offline detection verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub seq: u64,
    pub adversarial: bool,
}

/// Runs the detector over everything buffered, emptying the buffer.
pub fn offline_detection_sweep(
    detector: &Detector,
    buffer: &mut FeatureBuffer,
) -> Result<Vec<SweepVerdict>> {
    buffer
        .drain()
        .into_iter()
        .map(|entry| {
            Ok(SweepVerdict {
                seq: entry.seq,
                adversarial: detector.detect(&entry.features)?,
            })
        })
        .collect()
}

/// Result of conventional two-stage inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStageOutcome {
    pub label: Label,
    pub probs: Vec<f64>,
    pub adversarial: bool,
}

/// Two-stage inference: a prediction pass, then a separate feature-extraction
/// pass feeding the detector inline.
pub fn two_stage_infer(
    model: &Classifier,
    detector: &Detector,
    doc: &RawDocument,
) -> Result<TwoStageOutcome> {
    let (label, probs) = model.predict(doc);
    let features = model.extract_feature_map(doc);
    let adversarial = detector.detect(&features)?;
    Ok(TwoStageOutcome {
        label,
        probs,
        adversarial,
    })
}

/// One benchmark measurement row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub pipeline: String,
    pub n_samples: usize,
    pub median_seconds: f64,
    pub repetitions: usize,
}

fn median(durations: &mut [f64]) -> f64 {
    durations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = durations.len();
    if n % 2 == 1 {
        durations[n / 2]
    } else {
        (durations[n / 2 - 1] + durations[n / 2]) / 2.0
    }
}

/// Times both pipelines over workloads of each requested size, cycling
/// `docs` to fill the workload. Each (pipeline, size) cell gets one untimed
/// warmup run and `repetitions` timed runs on the monotonic clock; the
/// median is reported.
pub fn run_timing_benchmark(
    model: &Classifier,
    detector: &Detector,
    docs: &[RawDocument],
    sizes: &[usize],
    repetitions: usize,
) -> Result<Vec<BenchRow>> {
    if repetitions == 0 {
        return Err(Error::invalid("benchmark repetitions must be >= 1"));
    }
    if docs.is_empty() || sizes.is_empty() {
        return Err(Error::invalid("benchmark needs documents and sizes"));
    }
    if sizes.iter().any(|&n| n == 0) {
        return Err(Error::invalid("benchmark sizes must be >= 1"));
    }
    let mut rows = Vec::with_capacity(sizes.len() * 2);
    for &n in sizes {
        let workload: Vec<&RawDocument> = (0..n).map(|i| &docs[i % docs.len()]).collect();

        let run_single = |buffer: &mut FeatureBuffer| -> Result<()> {
            for doc in &workload {
                let _ = single_pass_infer(model, buffer, doc);
            }
            let _ = offline_detection_sweep(detector, buffer)?;
            Ok(())
        };
        let mut buffer = FeatureBuffer::new(DEFAULT_BUFFER_CAPACITY)?;
        run_single(&mut buffer)?; // warmup
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            run_single(&mut buffer)?;
            times.push(start.elapsed().as_secs_f64());
        }
        rows.push(BenchRow {
            pipeline: "single_pass".into(),
            n_samples: n,
            median_seconds: median(&mut times),
            repetitions,
        });

        let run_two = || -> Result<()> {
            for doc in &workload {
                let _ = two_stage_infer(model, detector, doc)?;
            }
            Ok(())
        };
        run_two()?; // warmup
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            run_two()?;
            times.push(start.elapsed().as_secs_f64());
        }
        rows.push(BenchRow {
            pipeline: "two_stage".into(),
            n_samples: n,
            median_seconds: median(&mut times),
            repetitions,
        });
    }
    Ok(rows)
}

/// Writes benchmark rows as CSV: `pipeline,n_samples,median_seconds,repetitions`.
pub fn write_benchmark_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Serialization(e.to_string()))?;
    writer
        .write_record(["pipeline", "n_samples", "median_seconds", "repetitions"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.pipeline.as_str(),
                &row.n_samples.to_string(),
                &format!("{:?}", row.median_seconds),
                &row.repetitions.to_string(),
            ])
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

/// Writes whitespace-separated plot data: one line per workload size with
/// the single-pass and two-stage medians side by side.
pub fn write_plot_data(path: &Path, rows: &[BenchRow]) -> Result<()> {
    use std::collections::BTreeMap;
    let mut by_size: BTreeMap<usize, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for row in rows {
        let cell = by_size.entry(row.n_samples).or_default();
        match row.pipeline.as_str() {
            "single_pass" => cell.0 = Some(row.median_seconds),
            "two_stage" => cell.1 = Some(row.median_seconds),
            other => return Err(Error::invalid(format!("unknown pipeline {other:?}"))),
        }
    }
    let mut out = String::from("# n_samples single_pass_s two_stage_s\n");
    for (n, (s, t)) in by_size {
        let (s, t) = (
            s.ok_or_else(|| Error::invalid("missing single_pass row"))?,
            t.ok_or_else(|| Error::invalid("missing two_stage row"))?,
        );
        out.push_str(&format!("{n} {s:?} {t:?}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}
