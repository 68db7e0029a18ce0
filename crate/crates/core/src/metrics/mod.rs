//! Pairwise scores of an original text against its back-translation.
//!
//! All five scores share one tokenization per text: word-BLEU with weights
//! (0.5, 0.5, 0, 0), BLEU-Unif with uniform weights over 1..4-grams, chrF on
//! the raw characters, TER over tokens and TF-IDF cosine similarity.

mod bleu;
mod chrf;
mod ter;
mod tfidf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{
    bleu, brevity_penalty, modified_precision, BleuConfig, Smoothing, BIGRAM_WEIGHTS,
    UNIFORM_WEIGHTS,
};
pub use chrf::{chrf, DEFAULT_BETA, DEFAULT_MAX_N};
pub use ter::{edit_distance, ter};
pub use tfidf::{fit_idf, semantic_similarity, IdfModel};

use crate::segmentation::{segment, Lexicon, Level, TokenList};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("BLEU weights must be 4 non-negative values summing to 1, got {0:?}")]
    InvalidWeights([f64; 4]),
    #[error("IDF needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("{0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bleu,
    BleuUnif,
    Chrf,
    Ter,
    SemanticSimilarity,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Bleu,
        Metric::BleuUnif,
        Metric::Chrf,
        Metric::Ter,
        Metric::SemanticSimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::BleuUnif => "bleu_unif",
            Metric::Chrf => "chrf",
            Metric::Ter => "ter",
            Metric::SemanticSimilarity => "semantic_similarity",
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Ter)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub bleu: f64,
    pub bleu_unif: f64,
    pub chrf: f64,
    pub ter: f64,
    pub semantic_similarity: f64,
}

impl MetricVector {
    pub const PERFECT: MetricVector = MetricVector {
        bleu: 1.0,
        bleu_unif: 1.0,
        chrf: 1.0,
        ter: 0.0,
        semantic_similarity: 1.0,
    };

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Bleu => self.bleu,
            Metric::BleuUnif => self.bleu_unif,
            Metric::Chrf => self.chrf,
            Metric::Ter => self.ter,
            Metric::SemanticSimilarity => self.semantic_similarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub level: Level,
    pub bleu_weights: [f64; 4],
    pub bleu_unif_weights: [f64; 4],
    pub smoothing: Smoothing,
    pub chrf_max_n: usize,
    pub chrf_beta: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            level: Level::Word,
            bleu_weights: BIGRAM_WEIGHTS,
            bleu_unif_weights: UNIFORM_WEIGHTS,
            smoothing: Smoothing::None,
            chrf_max_n: DEFAULT_MAX_N,
            chrf_beta: DEFAULT_BETA,
        }
    }
}

impl ScoringConfig {
    pub fn bleu_config(&self) -> BleuConfig {
        BleuConfig {
            weights: self.bleu_weights,
            smoothing: self.smoothing,
        }
    }

    pub fn bleu_unif_config(&self) -> BleuConfig {
        BleuConfig {
            weights: self.bleu_unif_weights,
            smoothing: self.smoothing,
        }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        self.bleu_config().validate()?;
        self.bleu_unif_config().validate()?;
        if self.chrf_max_n == 0 || !(self.chrf_beta.is_finite() && self.chrf_beta > 0.0) {
            return Err(MetricError::InvalidParameter(
                "chrf_max_n must be >= 1 and chrf_beta > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Tokenizes and scores text pairs with a fixed lexicon and configuration.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    lexicon: &'a Lexicon,
    config: &'a ScoringConfig,
}

impl<'a> Scorer<'a> {
    pub fn new(lexicon: &'a Lexicon, config: &'a ScoringConfig) -> Self {
        Self { lexicon, config }
    }

    pub fn config(&self) -> &ScoringConfig {
        self.config
    }

    pub fn tokenize(&self, text: &str) -> TokenList {
        segment(text, self.config.level, self.lexicon)
    }

    /// Scores already-tokenized texts against a fitted IDF model.
    pub fn score_tokens(
        &self,
        original: &str,
        original_tokens: &TokenList,
        backtranslation: &str,
        back_tokens: &TokenList,
        idf: &IdfModel,
    ) -> Result<MetricVector, MetricError> {
        if original_tokens.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        let (cand, refr) = (back_tokens.as_slice(), original_tokens.as_slice());
        Ok(MetricVector {
            bleu: bleu(cand, refr, &self.config.bleu_config())?,
            bleu_unif: bleu(cand, refr, &self.config.bleu_unif_config())?,
            chrf: chrf(
                backtranslation,
                original,
                self.config.chrf_max_n,
                self.config.chrf_beta,
            )?,
            ter: ter(cand, refr)?,
            semantic_similarity: semantic_similarity(cand, refr, idf),
        })
    }

    pub fn score_with_idf(
        &self,
        original: &str,
        backtranslation: &str,
        idf: &IdfModel,
    ) -> Result<MetricVector, MetricError> {
        let orig = self.tokenize(original);
        let back = self.tokenize(backtranslation);
        self.score_tokens(original, &orig, backtranslation, &back, idf)
    }

    /// Scores one pair, fitting the IDF model on the pair itself.
    pub fn score(&self, original: &str, backtranslation: &str) -> Result<MetricVector, MetricError> {
        let orig = self.tokenize(original);
        let back = self.tokenize(backtranslation);
        let idf = fit_idf([&orig, &back])?;
        self.score_tokens(original, &orig, backtranslation, &back, &idf)
    }
}

/// Scores `backtranslation` against `original` with an IDF model fitted on
/// just these two texts. Batch runs should fit one model over the whole batch
/// and call [`Scorer::score_with_idf`].
pub fn score_pair(
    original: &str,
    backtranslation: &str,
    lexicon: &Lexicon,
    config: &ScoringConfig,
) -> Result<MetricVector, MetricError> {
    config.validate()?;
    Scorer::new(lexicon, config).score(original, backtranslation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> Lexicon {
        Lexicon::from_entries([("化学", 10), ("工程", 8), ("领域", 5), ("计算", 6)]).unwrap()
    }

    #[test]
    fn perfect_round_trip() {
        let lex = lexicon();
        for level in [Level::Word, Level::Character] {
            let config = ScoringConfig {
                level,
                ..ScoringConfig::default()
            };
            for text in ["化学工程领域的计算", "铁", "化学 工程"] {
                let v = score_pair(text, text, &lex, &config).unwrap();
                assert_eq!(v, MetricVector::PERFECT, "{text} at {level}");
            }
        }
    }

    #[test]
    fn empty_original_is_rejected() {
        let lex = lexicon();
        assert_eq!(
            score_pair("  ", "化学", &lex, &ScoringConfig::default()),
            Err(MetricError::EmptyReference)
        );
    }

    #[test]
    fn ranges_on_a_partial_match() {
        let lex = lexicon();
        let v = score_pair("化学工程领域的计算", "化学领域计算很难", &lex, &ScoringConfig::default())
            .unwrap();
        for m in [Metric::Bleu, Metric::BleuUnif, Metric::Chrf, Metric::SemanticSimilarity] {
            assert!((0.0..=1.0).contains(&v.get(m)), "{m} = {}", v.get(m));
        }
        assert!(v.ter > 0.0);
        assert!(v.bleu_unif <= v.bleu);
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = ScoringConfig {
            smoothing: Smoothing::AddEpsilon(1.0),
            level: Level::Character,
            ..ScoringConfig::default()
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: ScoringConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
        let partial: ScoringConfig = serde_json::from_str(r#"{"chrf_max_n": 4}"#).unwrap();
        assert_eq!(partial.chrf_max_n, 4);
        assert_eq!(partial.level, Level::Word);
    }

    #[test]
    fn metric_names_parse() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("bogus".parse::<Metric>().is_err());
    }
}
