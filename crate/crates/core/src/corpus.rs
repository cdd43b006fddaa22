//! Document types, CSV corpus ingestion, and the synthetic fixture corpus.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Document category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Ham,
    Spam,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::Ham => 0,
            Label::Spam => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Label::Ham),
            1 => Ok(Label::Spam),
            _ => Err(Error::invalid(format!("label index {i} out of range"))),
        }
    }

    pub const ALL: [Label; 2] = [Label::Ham, Label::Spam];
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Ham => write!(f, "ham"),
            Label::Spam => write!(f, "spam"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ham" => Ok(Label::Ham),
            "spam" => Ok(Label::Spam),
            other => Err(Error::Validation(format!(
                "label must be 'ham' or 'spam', got {other:?}"
            ))),
        }
    }
}

/// One email with its gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub label: Label,
}

/// Reads a corpus CSV (`id,text,label` with header). Rejects malformed rows
/// and duplicate ids.
pub fn ingest_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let id = record[0].to_string();
        let label = Label::from_str(&record[2]).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate document id {id:?} at line {line}"
            )));
        }
        docs.push(RawDocument {
            id,
            text: record[1].to_string(),
            label,
        });
    }
    Ok(docs)
}

/// Writes documents in the corpus CSV format.
pub fn write_corpus(path: &Path, docs: &[RawDocument]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Serialization(e.to_string()))?;
    writer
        .write_record(["id", "text", "label"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for doc in docs {
        writer
            .write_record([doc.id.as_str(), doc.text.as_str(), &doc.label.to_string()])
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

// Word pools for the synthetic fixture corpus. Ham and spam have disjoint
// topic vocabularies plus shared filler words, with enough punctuation and
// numerals mixed in to exercise the cleaning stage.
const HAM_WORDS: &[&str] = &[
    "meeting", "schedule", "report", "project", "budget", "review", "team", "agenda", "notes",
    "lunch", "office", "deadline", "quarterly", "presentation", "conference", "travel",
    "contract", "attached", "forecast", "staffing",
];
const SPAM_WORDS: &[&str] = &[
    "winner", "prize", "free", "cash", "claim", "bonus", "lottery", "urgent", "guarantee",
    "cheap", "credit", "loan", "rich", "million", "discount", "pills", "investment", "instant",
    "exclusive", "jackpot",
];
const FILLER_WORDS: &[&str] = &[
    "please", "today", "time", "email", "send", "new", "get", "good", "day", "week", "message",
    "reply", "call", "know", "make", "need", "look", "best", "thanks", "regards",
];

/// Parameters for the synthetic fixture corpus generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_docs: 1000,
            min_tokens: 12,
            max_tokens: 28,
            seed: 7,
        }
    }
}

/// Generates a deterministic labeled ham/spam corpus.
///
/// Each document mixes topic words of its class with shared filler words;
/// some stop words, numbers and punctuation are sprinkled in so the full
/// preprocessing chain is exercised.
pub fn synthetic_corpus(config: &SyntheticConfig) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut docs = Vec::with_capacity(config.n_docs);
    for i in 0..config.n_docs {
        let label = if i % 2 == 0 { Label::Ham } else { Label::Spam };
        let topic: &[&str] = match label {
            Label::Ham => HAM_WORDS,
            Label::Spam => SPAM_WORDS,
        };
        let n = rng.gen_range(config.min_tokens..=config.max_tokens);
        let mut words = Vec::with_capacity(n + 4);
        for _ in 0..n {
            let roll: f64 = rng.gen();
            let w = if roll < 0.55 {
                *topic.choose(&mut rng).unwrap()
            } else if roll < 0.9 {
                *FILLER_WORDS.choose(&mut rng).unwrap()
            } else {
                // Noise: stop words and numerals that cleaning removes.
                match rng.gen_range(0..4) {
                    0 => "the",
                    1 => "and",
                    2 => "1000",
                    _ => "at",
                }
            };
            words.push(w.to_string());
        }
        if rng.gen_bool(0.3) {
            words.push("NOW!!".to_string());
        }
        let text = words.join(" ");
        docs.push(RawDocument {
            id: format!("doc-{i:05}"),
            text,
            label,
        });
    }
    docs
}
