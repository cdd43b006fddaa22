use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::ParamTensor;
use crate::text::vocab::{Vocabulary, PAD, UNK};

/// Dense V x D embedding matrix; row i is the vector of vocabulary index i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub tensor: ParamTensor,
    pub dim: usize,
}

impl EmbeddingTable {
    /// Random table in [-0.05, 0.05] for every row except pad (zeros).
    pub fn random(vocab_size: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tensor = ParamTensor::zeros("embedding", &[vocab_size, dim]);
        for row in 1..vocab_size {
            for j in 0..dim {
                tensor.values[row * dim + j] = rng.gen_range(-0.05..=0.05);
            }
        }
        EmbeddingTable { tensor, dim }
    }

    pub fn rows(&self) -> usize {
        self.tensor.values.len() / self.dim
    }

    pub fn row(&self, id: usize) -> Result<&[f64]> {
        if id >= self.rows() {
            return Err(Error::invalid(format!(
                "embedding row {id} out of range ({} rows)",
                self.rows()
            )));
        }
        Ok(&self.tensor.values[id * self.dim..(id + 1) * self.dim])
    }
}

/// Parses a word-embedding text file (`token v1 .. vD` per line) and builds
/// a table covering `vocab`.
///
/// File tokens absent from the vocabulary are appended to it; vocabulary
/// tokens absent from the file get uniform random vectors in [-0.05, 0.05]
/// from the seeded generator. The pad row is zero.
pub fn load_embedding_file(
    path: &Path,
    vocab: &mut Vocabulary,
    seed: u64,
) -> Result<EmbeddingTable> {
    let reader = BufReader::new(File::open(path)?);
    let mut dim: Option<usize> = None;
    let mut loaded: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "missing token".into(),
            })?
            .to_string();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("unparsable float {f:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => {
                if values.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "no vector components".into(),
                    });
                }
                dim = Some(values.len());
            }
            Some(d) if values.len() != d => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {d} floats, got {}", values.len()),
                });
            }
            _ => {}
        }
        loaded.push((token, values));
    }
    let dim = dim.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "embedding file has no rows".into(),
    })?;

    for (token, _) in &loaded {
        vocab.insert(token, token);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = vocab.len();
    let mut tensor = ParamTensor::zeros("embedding", &[rows, dim]);
    let by_token: std::collections::HashMap<&str, &Vec<f64>> =
        loaded.iter().map(|(t, v)| (t.as_str(), v)).collect();
    for id in 1..rows {
        let from_file = vocab.token(id).and_then(|t| by_token.get(t));
        match from_file {
            Some(v) => tensor.values[id * dim..(id + 1) * dim].copy_from_slice(v),
            None => {
                for j in 0..dim {
                    tensor.values[id * dim + j] = rng.gen_range(-0.05..=0.05);
                }
            }
        }
    }
    Ok(EmbeddingTable { tensor, dim })
}

/// Embedding-space neighbors of `token_id` by cosine similarity.
///
/// Excludes the query, pad and unk rows; keeps cosines >= `min_cosine`;
/// returns at most k results sorted descending, ties by lower id.
pub fn nearest_neighbors(
    table: &EmbeddingTable,
    token_id: usize,
    k: usize,
    min_cosine: f64,
) -> Result<Vec<(usize, f64)>> {
    if k == 0 {
        return Err(Error::invalid("nearest_neighbors requires k >= 1"));
    }
    let query = table.row(token_id)?;
    let qnorm = norm(query);
    if qnorm == 0.0 {
        return Err(Error::invalid(format!(
            "zero-norm query vector for token id {token_id}"
        )));
    }
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for id in 0..table.rows() {
        if id == token_id || id == PAD || id == UNK {
            continue;
        }
        let row = table.row(id)?;
        let rnorm = norm(row);
        if rnorm == 0.0 {
            continue;
        }
        let cos = dot(query, row) / (qnorm * rnorm);
        if cos >= min_cosine {
            scored.push((id, cos));
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
