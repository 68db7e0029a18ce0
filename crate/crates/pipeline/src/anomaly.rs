//! Per-record anomaly flags: verbatim back-translation and unrequested
//! traditional-script output.

use serde::{Deserialize, Serialize};
use zhbt_core::metrics::{bleu, BleuConfig, MetricError};
use zhbt_core::segmentation::{detect_traditional, segment_words, Lexicon, VariantTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerbatimCheck {
    pub similarity: f64,
    pub flagged: bool,
}

/// Unsmoothed word-level BLEU with weights (0.5, 0.5, 0, 0) of `zhy`
/// against `zhx`, flagged at or above `threshold`.
pub fn detect_verbatim(
    zhx: &str,
    zhy: &str,
    lexicon: &Lexicon,
    threshold: f64,
) -> Result<VerbatimCheck, MetricError> {
    let reference = segment_words(zhx, lexicon);
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let candidate = segment_words(zhy, lexicon);
    let similarity = bleu(candidate.as_slice(), reference.as_slice(), &BleuConfig::bigram())?;
    Ok(VerbatimCheck {
        similarity,
        flagged: similarity >= threshold || zhx == zhy,
    })
}

/// Both detectors with their thresholds.
#[derive(Debug, Clone, Copy)]
pub struct Detectors<'a> {
    pub lexicon: &'a Lexicon,
    pub variants: &'a VariantTable,
    pub verbatim_threshold: f64,
    pub traditional_threshold: f64,
}

impl Detectors<'_> {
    pub fn verbatim(&self, zhx: &str, zhy: &str) -> Result<VerbatimCheck, MetricError> {
        detect_verbatim(zhx, zhy, self.lexicon, self.verbatim_threshold)
    }

    pub fn traditional(&self, zhy: &str) -> bool {
        detect_traditional(zhy, self.variants, self.traditional_threshold).flagged
    }
}
