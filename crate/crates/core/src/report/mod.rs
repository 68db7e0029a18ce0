//! Tables, test results and plot data derived from a set of score matrices.
//!
//! A run produces one [`ScoreMatrix`] per metric over the same blocks,
//! treatments and repetitions. [`build_report`] turns that set into
//! descriptive summaries, per-metric Friedman/Dunn analyses, the metric
//! correlation matrix and a [`PlotBundle`]; [`Report::emit`] writes them out.
//!
//! Output files and columns:
//!
//! | file | columns |
//! |---|---|
//! | `summaries.csv` | scope, model, metric, count, mean, std, min, q25, median, q75, max |
//! | `friedman.csv` | metric, blocks, statistic, df, p_value, imputed_cells, dropped_blocks |
//! | `pairwise_tests.csv` | metric, model_a, model_b, mean_difference, adjusted_p, significant, z, raw_p |
//! | `significant_pairs.csv` | as `pairwise_tests.csv`, significant rows only |
//! | `correlations.csv` | metric_a, metric_b, n, rho, p_value, adjusted_p |
//! | `report.json` | options plus one `{metric, friedman, pairwise, ...}` object per metric |
//! | `plot_bundle.json` | see [`PlotBundle`] |
//!
//! CSV numbers are rounded to 4 decimals; `scores.csv` (see [`write_scores_csv`])
//! keeps full precision so it can be re-analysed without drift.

mod emit;
mod plot;
mod scores;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{
    analyze, benjamini_hochberg, descriptive_stats, spearman, AnalysisOptions, Descriptive,
    MetricAnalysis, ScoreMatrix, StatsError,
};

pub use emit::{format_float, render_correlations, render_friedman, render_pairwise, render_summaries};
pub use plot::{build_plot_bundle, BoxplotSeries, PlotBundle, ScatterPoint, ScatterSeries};
pub use scores::{parse_scores_csv, read_scores_csv, render_scores_csv, write_scores_csv};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("no score matrices")]
    Empty,
    #[error("score matrices disagree: {0}")]
    Inconsistent(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptive {
    pub metric: String,
    #[serde(flatten)]
    pub stats: Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub backend_id: String,
    pub metrics: Vec<MetricDescriptive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Over every observation of each metric.
    pub global: Vec<MetricDescriptive>,
    pub models: Vec<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric_a: String,
    pub metric_b: String,
    pub n: usize,
    /// `None` when either metric is constant over the paired observations.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub adjusted_p: Option<f64>,
}

/// Checks that every matrix shares the first one's design and labels.
pub fn check_consistent(matrices: &[ScoreMatrix]) -> Result<(), ReportError> {
    let first = matrices.first().ok_or(ReportError::Empty)?;
    for m in &matrices[1..] {
        if m.design != first.design {
            return Err(ReportError::Inconsistent(format!(
                "{} has design {:?}, {} has {:?}",
                first.metric, first.design, m.metric, m.design
            )));
        }
        if m.block_ids != first.block_ids || m.treatment_ids != first.treatment_ids {
            return Err(ReportError::Inconsistent(format!(
                "{} and {} have different labels",
                first.metric, m.metric
            )));
        }
    }
    Ok(())
}

/// Descriptive statistics at repetition level: one global row per metric
/// and one summary per treatment. A metric with no observations for a
/// treatment is left out of that treatment's summary.
pub fn summarize(matrices: &[ScoreMatrix]) -> Result<Summary, ReportError> {
    check_consistent(matrices)?;
    let mut global = Vec::with_capacity(matrices.len());
    for m in matrices {
        let values: Vec<f64> = m.observations().collect();
        global.push(MetricDescriptive {
            metric: m.metric.clone(),
            stats: descriptive_stats(&values)?,
        });
    }
    let mut models = Vec::new();
    for (t, id) in matrices[0].treatment_ids.iter().enumerate() {
        let mut metrics = Vec::with_capacity(matrices.len());
        for m in matrices {
            let values = m.treatment_values(t);
            if values.is_empty() {
                continue;
            }
            metrics.push(MetricDescriptive {
                metric: m.metric.clone(),
                stats: descriptive_stats(&values)?,
            });
        }
        models.push(ModelSummary {
            backend_id: id.clone(),
            metrics,
        });
    }
    Ok(Summary { global, models })
}

/// Observations of two metrics taken from the same (block, treatment,
/// repetition) cells, skipping cells missing in either.
pub fn paired_observations(a: &ScoreMatrix, b: &ScoreMatrix) -> Vec<(usize, f64, f64)> {
    let d = a.design;
    let mut out = Vec::new();
    for block in 0..d.n {
        for t in 0..d.k {
            for rep in 0..d.r {
                if let (Some(x), Some(y)) = (a.get(block, t, rep), b.get(block, t, rep)) {
                    out.push((t, x, y));
                }
            }
        }
    }
    out
}

/// Spearman correlation for every unordered metric pair, BH-adjusted over
/// the pairs where ρ is defined.
pub fn metric_correlations(matrices: &[ScoreMatrix]) -> Result<Vec<CorrelationRow>, ReportError> {
    check_consistent(matrices)?;
    let mut rows = Vec::new();
    for (i, a) in matrices.iter().enumerate() {
        for b in &matrices[i + 1..] {
            let pairs = paired_observations(a, b);
            let xs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            let (rho, p_value) = match spearman(&xs, &ys) {
                Ok(c) => (Some(c.rho), Some(c.p_value)),
                Err(StatsError::ZeroVariance | StatsError::TooFewValues { .. }) => (None, None),
                Err(e) => return Err(e.into()),
            };
            rows.push(CorrelationRow {
                metric_a: a.metric.clone(),
                metric_b: b.metric.clone(),
                n: pairs.len(),
                rho,
                p_value,
                adjusted_p: None,
            });
        }
    }
    let defined: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].p_value.is_some()).collect();
    let raw: Vec<f64> = defined.iter().filter_map(|&i| rows[i].p_value).collect();
    for (&i, adj) in defined.iter().zip(benjamini_hochberg(&raw)?) {
        rows[i].adjusted_p = Some(adj);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub options: AnalysisOptions,
    pub summary: Summary,
    pub analyses: Vec<MetricAnalysis>,
    pub correlations: Vec<CorrelationRow>,
    pub plot: PlotBundle,
}

pub fn build_report(matrices: &[ScoreMatrix], options: &AnalysisOptions) -> Result<Report, ReportError> {
    let summary = summarize(matrices)?;
    let analyses = matrices
        .iter()
        .map(|m| analyze(m, options))
        .collect::<Result<Vec<_>, _>>()?;
    let correlations = metric_correlations(matrices)?;
    let plot = build_plot_bundle(matrices, &correlations)?;
    Ok(Report {
        options: *options,
        summary,
        analyses,
        correlations,
        plot,
    })
}

#[derive(Serialize)]
struct ReportJson<'a> {
    options: &'a AnalysisOptions,
    metrics: &'a [MetricAnalysis],
}

impl Report {
    pub fn render_report_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(&ReportJson {
            options: &self.options,
            metrics: &self.analyses,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn render_plot_bundle(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(&self.plot)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes every report file into `dir`, creating it if needed. Returns
    /// the paths written.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let files = [
            ("summaries.csv", render_summaries(&self.summary)?),
            ("friedman.csv", render_friedman(&self.analyses)?),
            ("pairwise_tests.csv", render_pairwise(&self.analyses, false)?),
            ("significant_pairs.csv", render_pairwise(&self.analyses, true)?),
            ("correlations.csv", render_correlations(&self.correlations)?),
            ("report.json", self.render_report_json()?),
            ("plot_bundle.json", self.render_plot_bundle()?),
        ];
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io_err(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}
