use std::collections::HashMap;
use std::path::Path;

use super::{check_consistent, io_err, ReportError};
use crate::stats::{ExperimentDesign, ScoreMatrix};

const KEY_COLUMNS: [&str; 3] = ["block_id", "treatment_id", "repetition"];

/// Long-format scores: `block_id,treatment_id,repetition,<metric>...`, one
/// row per observation in block/treatment/repetition order, repetitions
/// counted from 1. Missing values are empty fields. Numbers use the
/// shortest representation that reads back to the same `f64`.
pub fn render_scores_csv(matrices: &[ScoreMatrix]) -> Result<String, ReportError> {
    check_consistent(matrices)?;
    let first = &matrices[0];
    let d = first.design;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
    header.extend(matrices.iter().map(|m| m.metric.as_str()));
    w.write_record(&header)?;
    for b in 0..d.n {
        for t in 0..d.k {
            for rep in 0..d.r {
                let mut rec = vec![
                    first.block_ids[b].clone(),
                    first.treatment_ids[t].clone(),
                    (rep + 1).to_string(),
                ];
                rec.extend(
                    matrices
                        .iter()
                        .map(|m| m.get(b, t, rep).map(|v| v.to_string()).unwrap_or_default()),
                );
                w.write_record(&rec)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_scores_csv(matrices: &[ScoreMatrix], path: &Path) -> Result<(), ReportError> {
    let body = render_scores_csv(matrices)?;
    std::fs::write(path, body).map_err(io_err(path))
}

pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreMatrix>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_scores_csv(&text)
}

fn index_of(ids: &mut Vec<String>, lookup: &mut HashMap<String, usize>, id: &str) -> usize {
    *lookup.entry(id.to_string()).or_insert_with(|| {
        ids.push(id.to_string());
        ids.len() - 1
    })
}

/// Inverse of [`render_scores_csv`]. Block and treatment order follow first
/// appearance; absent rows become missing observations.
pub fn parse_scores_csv(text: &str) -> Result<Vec<ScoreMatrix>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.len() <= KEY_COLUMNS.len() || header.iter().take(3).ne(KEY_COLUMNS) {
        return Err(ReportError::Parse {
            line: 1,
            message: format!("header must start with {} and name at least one metric", KEY_COLUMNS.join(",")),
        });
    }
    let metrics: Vec<String> = header.iter().skip(3).map(str::to_string).collect();

    let (mut blocks, mut block_lookup) = (Vec::new(), HashMap::new());
    let (mut treatments, mut treatment_lookup) = (Vec::new(), HashMap::new());
    let mut max_rep = 0usize;
    let mut cells: Vec<(usize, usize, usize, Vec<Option<f64>>)> = Vec::new();
    let mut seen = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(ReportError::Parse {
                line,
                message: format!("expected {} fields, got {}", header.len(), record.len()),
            });
        }
        let b = index_of(&mut blocks, &mut block_lookup, &record[0]);
        let t = index_of(&mut treatments, &mut treatment_lookup, &record[1]);
        let rep: usize = record[2]
            .parse()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| ReportError::Parse {
                line,
                message: format!("bad repetition `{}`", &record[2]),
            })?;
        if let Some(prev) = seen.insert((b, t, rep), line) {
            return Err(ReportError::Parse {
                line,
                message: format!("duplicate observation (first on line {prev})"),
            });
        }
        max_rep = max_rep.max(rep);
        let mut values = Vec::with_capacity(metrics.len());
        for field in record.iter().skip(3) {
            if field.is_empty() {
                values.push(None);
            } else {
                let v: f64 = field.parse().map_err(|_| ReportError::Parse {
                    line,
                    message: format!("bad number `{field}`"),
                })?;
                values.push(Some(v));
            }
        }
        cells.push((b, t, rep - 1, values));
    }
    let design = ExperimentDesign::new(blocks.len(), treatments.len(), max_rep)?;
    let mut matrices = metrics
        .iter()
        .map(|m| ScoreMatrix::new(design, m.clone(), blocks.clone(), treatments.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    for (b, t, rep, values) in cells {
        for (m, v) in matrices.iter_mut().zip(values) {
            m.set(b, t, rep, v);
        }
    }
    Ok(matrices)
}
