use csv::Writer;

use super::{CorrelationRow, ReportError, Summary};
use crate::stats::{Descriptive, MetricAnalysis};

/// Four-decimal rendering used in every report CSV. Ties round to even on
/// the exact binary value, and negative zero prints as `0.0000`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn finish(w: Writer<Vec<u8>>) -> Result<String, ReportError> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn writer() -> Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn stats_fields(d: &Descriptive) -> [String; 8] {
    [
        d.count.to_string(),
        format_float(d.mean),
        format_float(d.std),
        format_float(d.min),
        format_float(d.q25),
        format_float(d.median),
        format_float(d.q75),
        format_float(d.max),
    ]
}

pub fn render_summaries(summary: &Summary) -> Result<String, ReportError> {
    let mut w = writer();
    w.write_record([
        "scope", "model", "metric", "count", "mean", "std", "min", "q25", "median", "q75", "max",
    ])?;
    for row in &summary.global {
        let mut rec = vec!["global".to_string(), String::new(), row.metric.clone()];
        rec.extend(stats_fields(&row.stats));
        w.write_record(&rec)?;
    }
    for model in &summary.models {
        for row in &model.metrics {
            let mut rec = vec!["model".to_string(), model.backend_id.clone(), row.metric.clone()];
            rec.extend(stats_fields(&row.stats));
            w.write_record(&rec)?;
        }
    }
    finish(w)
}

pub fn render_friedman(analyses: &[MetricAnalysis]) -> Result<String, ReportError> {
    let mut w = writer();
    w.write_record([
        "metric",
        "blocks",
        "statistic",
        "df",
        "p_value",
        "imputed_cells",
        "dropped_blocks",
    ])?;
    for a in analyses {
        let df = a.friedman.df.first().copied().unwrap_or(f64::NAN);
        w.write_record([
            a.metric.clone(),
            a.blocks.to_string(),
            format_float(a.friedman.statistic),
            format!("{df}"),
            format_float(a.friedman.p_value),
            a.imputed.len().to_string(),
            a.dropped_blocks.len().to_string(),
        ])?;
    }
    finish(w)
}

/// Pairwise rows for every metric; with `significant_only`, just the
/// significant ones (header-only when there are none).
pub fn render_pairwise(analyses: &[MetricAnalysis], significant_only: bool) -> Result<String, ReportError> {
    let mut w = writer();
    w.write_record([
        "metric",
        "model_a",
        "model_b",
        "mean_difference",
        "adjusted_p",
        "significant",
        "z",
        "raw_p",
    ])?;
    for a in analyses {
        for row in a.pairwise.iter().filter(|r| r.significant || !significant_only) {
            let c = &row.comparison;
            w.write_record([
                a.metric.clone(),
                c.treatment_a.clone(),
                c.treatment_b.clone(),
                format_float(c.mean_difference),
                format_float(c.adjusted_p),
                row.significant.to_string(),
                format_float(c.statistic),
                format_float(c.raw_p),
            ])?;
        }
    }
    finish(w)
}

pub fn render_correlations(rows: &[CorrelationRow]) -> Result<String, ReportError> {
    let mut w = writer();
    w.write_record(["metric_a", "metric_b", "n", "rho", "p_value", "adjusted_p"])?;
    for r in rows {
        w.write_record([
            r.metric_a.clone(),
            r.metric_b.clone(),
            r.n.to_string(),
            opt(r.rho),
            opt(r.p_value),
            opt(r.adjusted_p),
        ])?;
    }
    finish(w)
}
