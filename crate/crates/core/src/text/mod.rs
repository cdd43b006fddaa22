//! Preprocessing chain (clean -> tokenize -> stop words -> stem), vocabulary
//! construction, embedding-table loading, and nearest-neighbor search.

pub mod embedding;
pub mod porter;
pub mod stopwords;
pub mod vocab;

pub use embedding::{load_embedding_file, nearest_neighbors, EmbeddingTable};
pub use porter::stem;
pub use stopwords::{is_stop_word, remove_stopwords, STOP_WORDS};
pub use vocab::{build_vocab, Vocabulary, PAD, UNK};

use crate::corpus::RawDocument;

/// Lowercases and strips everything but ASCII letters; non-letters become
/// spaces and whitespace is collapsed to single spaces.
pub fn clean_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_ascii_alphabetic() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// A preprocessed document: stemmed in-vocabulary token stream (truncated to
/// `max_len`) with parallel vocabulary indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub ids: Vec<usize>,
    pub max_len: usize,
}

impl TokenSeq {
    /// Indices padded (with the pad id) or truncated to exactly `max_len`.
    pub fn padded_ids(&self) -> Vec<usize> {
        let mut ids = self.ids.clone();
        ids.resize(self.max_len, PAD);
        ids
    }

    pub fn is_all_padding(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Alignment info from cleaning through stemming, used by the attack to map
/// model-sequence positions back onto surface words.
#[derive(Debug, Clone)]
pub struct PreprocessTrace {
    /// All cleaned surface tokens (before stop-word removal).
    pub clean_tokens: Vec<String>,
    /// For each kept (non-stop) token, its index into `clean_tokens` and its
    /// stem. Truncated to the model's max_len.
    pub kept: Vec<(usize, String)>,
}

/// Full chain: clean -> whitespace tokenize -> stop-word removal -> stem ->
/// map to ids (unknown -> UNK), truncating to `max_len`.
pub fn preprocess(doc: &RawDocument, vocab: &Vocabulary, max_len: usize) -> TokenSeq {
    let trace = preprocess_trace(&doc.text, max_len);
    let tokens: Vec<String> = trace.kept.into_iter().map(|(_, stem)| stem).collect();
    let ids = tokens.iter().map(|t| vocab.id_or_unk(t)).collect();
    TokenSeq {
        tokens,
        ids,
        max_len,
    }
}

/// Like [`preprocess`] but keeps the surface-alignment information.
pub fn preprocess_trace(text: &str, max_len: usize) -> PreprocessTrace {
    let cleaned = clean_text(text);
    let clean_tokens: Vec<String> = cleaned.split_whitespace().map(String::from).collect();
    let mut kept = Vec::new();
    for (i, tok) in clean_tokens.iter().enumerate() {
        if kept.len() >= max_len {
            break;
        }
        if is_stop_word(tok) {
            continue;
        }
        // Cleaned tokens are guaranteed [a-z]+ so stemming cannot fail.
        let stem = porter::stem(tok).expect("cleaned token is always stemmable");
        kept.push((i, stem));
    }
    PreprocessTrace { clean_tokens, kept }
}
