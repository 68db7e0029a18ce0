use serde::{Deserialize, Serialize};

use super::{check_consistent, paired_observations, CorrelationRow, ReportError};
use crate::stats::{descriptive_stats, ScoreMatrix};

/// Plot-ready data: box plots per metric and model, and one scatter series
/// per unordered metric pair. Carries numbers only, no styling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotBundle {
    pub metrics: Vec<String>,
    pub models: Vec<String>,
    pub boxplots: Vec<BoxplotSeries>,
    pub scatter: Vec<ScatterSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSeries {
    pub metric: String,
    pub model: String,
    pub count: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Most extreme values still inside the 1.5×IQR fences.
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Values outside `[q25 − 1.5·IQR, q75 + 1.5·IQR]`, ascending.
    pub outliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub model: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSeries {
    pub metric_x: String,
    pub metric_y: String,
    pub rho: Option<f64>,
    pub adjusted_p: Option<f64>,
    pub points: Vec<ScatterPoint>,
}

fn boxplot(metric: &str, model: &str, values: &[f64]) -> Result<BoxplotSeries, ReportError> {
    let d = descriptive_stats(values)?;
    let iqr = d.q75 - d.q25;
    let (lo, hi) = (d.q25 - 1.5 * iqr, d.q75 + 1.5 * iqr);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
    let outliers = sorted.iter().copied().filter(|v| !(lo..=hi).contains(v)).collect();
    Ok(BoxplotSeries {
        metric: metric.to_string(),
        model: model.to_string(),
        count: d.count,
        min: d.min,
        q25: d.q25,
        median: d.median,
        q75: d.q75,
        max: d.max,
        // the quartiles always lie inside the fences, so `inside` is non-empty
        whisker_low: inside[0],
        whisker_high: inside[inside.len() - 1],
        outliers,
    })
}

pub fn build_plot_bundle(
    matrices: &[ScoreMatrix],
    correlations: &[CorrelationRow],
) -> Result<PlotBundle, ReportError> {
    check_consistent(matrices)?;
    let models = matrices[0].treatment_ids.clone();
    let mut boxplots = Vec::new();
    for m in matrices {
        for (t, model) in models.iter().enumerate() {
            let values = m.treatment_values(t);
            if !values.is_empty() {
                boxplots.push(boxplot(&m.metric, model, &values)?);
            }
        }
    }
    let mut scatter = Vec::new();
    for (i, a) in matrices.iter().enumerate() {
        for b in &matrices[i + 1..] {
            let corr = correlations
                .iter()
                .find(|c| c.metric_a == a.metric && c.metric_b == b.metric);
            scatter.push(ScatterSeries {
                metric_x: a.metric.clone(),
                metric_y: b.metric.clone(),
                rho: corr.and_then(|c| c.rho),
                adjusted_p: corr.and_then(|c| c.adjusted_p),
                points: paired_observations(a, b)
                    .into_iter()
                    .map(|(t, x, y)| ScatterPoint {
                        model: models[t].clone(),
                        x,
                        y,
                    })
                    .collect(),
            });
        }
    }
    Ok(PlotBundle {
        metrics: matrices.iter().map(|m| m.metric.clone()).collect(),
        models,
        boxplots,
        scatter,
    })
}
