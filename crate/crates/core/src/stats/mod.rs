//! Rank-based significance testing over score matrices.
//!
//! Repetitions collapse to per-cell means, blocks are ranked, and treatments
//! are compared with a Friedman omnibus test followed by Dunn's pairwise test
//! under a multiple-comparison correction. Tail probabilities come from the
//! in-crate [`special`] functions.

mod correction;
mod correlation;
mod descriptive;
mod friedman;
mod matrix;
mod normality;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use correction::{benjamini_hochberg, bonferroni, Correction};
pub use correlation::{spearman, Correlation};
pub use descriptive::{descriptive_stats, quantile_sorted, Descriptive};
pub use friedman::{dunn_posthoc, friedman, mean_ranks, PairwiseComparison};
pub use matrix::{
    balanced_grid, cell_means, rank_with_ties, BalancedGrid, ExperimentDesign, ImputedCell,
    MissingPolicy, RepetitionMode, ScoreMatrix,
};
pub use normality::{levene, shapiro_wilk};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("design dimensions must be positive (got n={n}, k={k}, r={r})")]
    InvalidDesign { n: usize, k: usize, r: usize },
    #[error("{blocks} block labels and {treatments} treatment labels do not fit a {}x{} design", design.n, design.k)]
    LabelMismatch {
        blocks: usize,
        treatments: usize,
        design: ExperimentDesign,
    },
    #[error("rows have unequal lengths")]
    Ragged,
    #[error("grid must be at least 2x2, got {n}x{k}")]
    TooSmallGrid { n: usize, k: usize },
    #[error("only {0} complete blocks remain")]
    TooFewBlocks(usize),
    #[error("cell ({block}, {treatment}) has no observations")]
    EmptyCell { block: String, treatment: String },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("p-value {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("sample size must be in {min}..={max}, got {got}")]
    SampleSize { min: usize, max: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test_name: String,
    pub statistic: f64,
    /// Degrees of freedom; two entries for F-based tests, none for W.
    pub df: Vec<f64>,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<Vec<PairwiseComparison>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub correction: Correction,
    pub alpha: f64,
    pub missing: MissingPolicy,
    pub repetitions: RepetitionMode,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            correction: Correction::BenjaminiHochberg,
            alpha: DEFAULT_ALPHA,
            missing: MissingPolicy::ImputeBlockMean,
            repetitions: RepetitionMode::CellMeans,
        }
    }
}

/// One pairwise row with its significance verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    #[serde(flatten)]
    pub comparison: PairwiseComparison,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAnalysis {
    pub metric: String,
    pub blocks: usize,
    pub friedman: StatTestResult,
    pub pairwise: Vec<PairwiseRow>,
    pub imputed: Vec<ImputedCell>,
    pub dropped_blocks: Vec<String>,
}

impl MetricAnalysis {
    pub fn significant_pairs(&self) -> impl Iterator<Item = &PairwiseRow> {
        self.pairwise.iter().filter(|p| p.significant)
    }
}

/// Friedman followed by Dunn on one metric. A pair is significant when the
/// omnibus test and its own adjusted p are both below `alpha`.
pub fn analyze(matrix: &ScoreMatrix, options: &AnalysisOptions) -> Result<MetricAnalysis, StatsError> {
    let grid = balanced_grid(matrix, options.repetitions, options.missing)?;
    let omnibus = friedman(&grid.values)?;
    let gate = omnibus.p_value < options.alpha;
    let pairwise = dunn_posthoc(&grid.values, &grid.treatment_ids, options.correction)?
        .into_iter()
        .map(|comparison| PairwiseRow {
            significant: gate && comparison.adjusted_p < options.alpha,
            comparison,
        })
        .collect();
    Ok(MetricAnalysis {
        metric: matrix.metric.clone(),
        blocks: grid.values.len(),
        friedman: omnibus,
        pairwise,
        imputed: grid.imputed,
        dropped_blocks: grid.dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matrix_has_no_significant_pairs() {
        let m = ScoreMatrix::from_nested("ter", &vec![vec![vec![0.3; 2]; 4]; 5]).unwrap();
        let a = analyze(&m, &AnalysisOptions::default()).unwrap();
        assert_eq!(a.friedman.p_value, 1.0);
        assert_eq!(a.pairwise.len(), 6);
        assert_eq!(a.significant_pairs().count(), 0);
    }

    #[test]
    fn result_json_shape() {
        let m = ScoreMatrix::from_nested("bleu", &vec![vec![vec![0.1], vec![0.2], vec![0.3]]; 4]).unwrap();
        let a = analyze(&m, &AnalysisOptions::default()).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["friedman"]["test_name"], "friedman");
        assert_eq!(v["pairwise"][0]["treatment_a"], "T1");
        assert!(v["pairwise"][0]["significant"].is_boolean());
        assert!(v["friedman"].get("pairwise").is_none());
    }
}
