use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::segmentation::ngrams;

/// Weights over 1..=2-grams, the primary BLEU scheme.
pub const BIGRAM_WEIGHTS: [f64; 4] = [0.5, 0.5, 0.0, 0.0];
/// Uniform weights over 1..=4-grams ("BLEU-Unif").
pub const UNIFORM_WEIGHTS: [f64; 4] = [0.25, 0.25, 0.25, 0.25];

/// How zero or tiny n-gram precisions are treated.
///
/// `AddEpsilon(e)` adds `e` to both the clipped match count and the candidate
/// n-gram count of every order above 1 (with `e = 1` this is the add-one
/// scheme of Lin & Och). Unigram precision is never smoothed, so a candidate
/// sharing no token with the reference still scores 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    AddEpsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub weights: [f64; 4],
    #[serde(default)]
    pub smoothing: Smoothing,
}

impl BleuConfig {
    pub fn bigram() -> Self {
        Self {
            weights: BIGRAM_WEIGHTS,
            smoothing: Smoothing::None,
        }
    }

    pub fn uniform() -> Self {
        Self {
            weights: UNIFORM_WEIGHTS,
            smoothing: Smoothing::None,
        }
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let sum: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(MetricError::InvalidWeights(self.weights));
        }
        if let Smoothing::AddEpsilon(e) = self.smoothing {
            if !(e.is_finite() && e > 0.0) {
                return Err(MetricError::InvalidParameter(format!(
                    "smoothing epsilon must be positive, got {e}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self::bigram()
    }
}

/// Clipped n-gram matches and the candidate's n-gram total.
pub fn modified_precision(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    let total = cand.values().sum();
    let matched = cand
        .iter()
        .map(|(gram, &count)| count.min(refs.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, total)
}

pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len == 0 {
        0.0
    } else if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

/// Single-reference sentence BLEU.
///
/// An order the candidate and the reference are both too short to contain
/// is left out of the product (it contributes a factor of 1). Any other order
/// with positive weight and no clipped match makes the unsmoothed score 0.
pub fn bleu(candidate: &[String], reference: &[String], config: &BleuConfig) -> Result<f64, MetricError> {
    config.validate()?;
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for (idx, &weight) in config.weights.iter().enumerate() {
        let n = idx + 1;
        if weight == 0.0 {
            continue;
        }
        let (matched, total) = modified_precision(candidate, reference, n);
        if total == 0 && reference.len() < n {
            continue;
        }
        let precision = match config.smoothing {
            Smoothing::AddEpsilon(e) if n > 1 => (matched as f64 + e) / (total as f64 + e),
            _ if matched == 0 => return Ok(0.0),
            _ => matched as f64 / total as f64,
        };
        log_sum += weight * precision.ln();
    }
    let score = brevity_penalty(candidate.len(), reference.len()) * log_sum.exp();
    Ok(score.clamp(0.0, 1.0))
}
