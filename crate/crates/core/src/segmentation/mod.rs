//! Word- and character-level tokenization of Chinese text.
//!
//! Word segmentation builds the graph of every lexicon match over a run of
//! non-whitespace characters and picks the route with the largest summed
//! `ln(freq / total)`, computed right to left. A character with no
//! single-character entry is scored at the floor `ln(1 / total)`, so every
//! input has at least one complete route. Among equally scored routes the one
//! with the longer leading token wins.

mod lexicon;
mod variant;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use lexicon::{Lexicon, LexiconError};
pub use variant::{detect_traditional, is_han, TraditionalScan, VariantTable, VariantTableError};

/// Default fraction of Han characters that may be traditional-only before a
/// text is flagged.
pub const DEFAULT_TRADITIONAL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Word,
    #[serde(rename = "char", alias = "character")]
    Character,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Word => f.write_str("word"),
            Level::Character => f.write_str("char"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub tokens: Vec<String>,
    pub level: Level,
}

impl TokenList {
    pub fn new(tokens: Vec<String>, level: Level) -> Self {
        Self { tokens, level }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn join(&self, sep: &str) -> String {
        self.tokens.join(sep)
    }
}

/// Segments `text` with `lexicon`; whitespace separates runs and is dropped.
pub fn segment_words(text: &str, lexicon: &Lexicon) -> TokenList {
    let mut tokens = Vec::new();
    for run in text.split(char::is_whitespace).filter(|r| !r.is_empty()) {
        segment_run(run, lexicon, &mut tokens);
    }
    TokenList::new(tokens, Level::Word)
}

/// Score of the route [`segment_words`] picks. Exposed for optimality checks.
pub fn route_log_prob(tokens: &[String], lexicon: &Lexicon) -> f64 {
    tokens.iter().map(|t| token_log_prob(t, lexicon)).sum()
}

/// Log-probability of one token under the segmentation model, or negative
/// infinity for a multi-character token the lexicon does not contain.
pub fn token_log_prob(token: &str, lexicon: &Lexicon) -> f64 {
    match lexicon.log_prob(token) {
        Some(lp) => lp,
        None if token.chars().count() == 1 => lexicon.floor_log_prob(),
        None => f64::NEG_INFINITY,
    }
}

fn segment_run(run: &str, lexicon: &Lexicon, out: &mut Vec<String>) {
    let offsets: Vec<usize> = run
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(run.len()))
        .collect();
    let n = offsets.len() - 1;

    // best[i] = (score of best route over chars i.., end of its first token)
    let mut best: Vec<(f64, usize)> = vec![(0.0, n); n + 1];
    for i in (0..n).rev() {
        let single = &run[offsets[i]..offsets[i + 1]];
        let mut choice = (token_log_prob(single, lexicon) + best[i + 1].0, i + 1);
        let mut j = i + 2;
        while j <= n {
            let frag = &run[offsets[i]..offsets[j]];
            if !lexicon.is_prefix(frag) {
                break;
            }
            if let Some(lp) = lexicon.log_prob(frag) {
                let score = lp + best[j].0;
                if score >= choice.0 {
                    choice = (score, j);
                }
            }
            j += 1;
        }
        best[i] = choice;
    }

    let mut i = 0;
    while i < n {
        let end = best[i].1;
        out.push(run[offsets[i]..offsets[end]].to_owned());
        i = end;
    }
}

/// One token per Unicode scalar value, whitespace dropped.
pub fn segment_chars(text: &str) -> TokenList {
    TokenList::new(
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
        Level::Character,
    )
}

pub fn segment(text: &str, level: Level, lexicon: &Lexicon) -> TokenList {
    match level {
        Level::Word => segment_words(text, lexicon),
        Level::Character => segment_chars(text),
    }
}

/// Multiset of contiguous `n`-token windows.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}
