use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::RawDocument;
use crate::error::{Error, Result};
use crate::text::{clean_text, porter, stopwords};

/// Reserved index for sequence padding.
pub const PAD: usize = 0;
/// Reserved index for out-of-vocabulary tokens.
pub const UNK: usize = 1;

/// Token-to-index map with reserved pad/unk slots. Each vocabulary entry is
/// a stem; a representative surface form (the most frequent pre-stemming
/// spelling) is kept so perturbed text can be reconstructed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    surfaces: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_entries(entries: Vec<(String, String)>) -> Self {
        let mut tokens = vec!["<pad>".to_string(), "<unk>".to_string()];
        let mut surfaces = vec![String::new(), String::new()];
        for (token, surface) in entries {
            tokens.push(token);
            surfaces.push(surface);
        }
        let mut v = Vocabulary {
            tokens,
            surfaces,
            index: HashMap::new(),
        };
        v.rebuild_index();
        v
    }

    /// Rebuilds the token->index map (needed after deserialization).
    pub fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index for a token, falling back to the unknown slot.
    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id_of(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Representative surface form for a vocabulary index.
    pub fn surface(&self, id: usize) -> Option<&str> {
        self.surfaces.get(id).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Appends a token if absent; returns its index.
    pub fn insert(&mut self, token: &str, surface: &str) -> usize {
        if let Some(id) = self.id_of(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.surfaces.push(surface.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    /// Iterates (id, token) over real entries (skipping pad/unk).
    pub fn entries(&self) -> impl Iterator<Item = (usize, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, t)| (i, t.as_str()))
    }
}

/// Builds a vocabulary from the post-preprocessing token stream of a corpus.
///
/// Ordering is frequency descending, ties lexicographic, so two builds on
/// the same corpus assign identical indices.
pub fn build_vocab(corpus: &[RawDocument], min_count: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::invalid("build_vocab on empty corpus"));
    }
    // stem -> (count, surface form counts)
    let mut counts: BTreeMap<String, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
    for doc in corpus {
        let cleaned = clean_text(&doc.text);
        for surface in cleaned.split_whitespace() {
            if stopwords::is_stop_word(surface) {
                continue;
            }
            let stem = porter::stem(surface)?;
            let entry = counts.entry(stem).or_default();
            entry.0 += 1;
            *entry.1.entry(surface.to_string()).or_default() += 1;
        }
    }

    let mut ranked: Vec<(String, usize, String)> = counts
        .into_iter()
        .filter(|(_, (count, _))| *count >= min_count)
        .map(|(stem, (count, surfaces))| {
            // Most frequent surface form; ties lexicographic (BTreeMap order).
            let surface = surfaces
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(s, _)| s.clone())
                .unwrap_or_else(|| stem.clone());
            (stem, count, surface)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    Ok(Vocabulary::from_entries(
        ranked.into_iter().map(|(t, _, s)| (t, s)).collect(),
    ))
}
