use serde::{Deserialize, Serialize};

use super::matrix::{rank_with_ties, tie_groups};
use super::special::{chi_square_sf, normal_sf};
use super::{Correction, StatTestResult, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub treatment_a: String,
    pub treatment_b: String,
    /// Dunn z for `a` minus `b`.
    pub statistic: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    /// Mean of `a` minus mean of `b`, in metric units.
    pub mean_difference: f64,
}

fn check_grid(grid: &[Vec<f64>]) -> Result<(usize, usize), StatsError> {
    let n = grid.len();
    let k = grid.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(StatsError::TooSmallGrid { n, k });
    }
    if grid.iter().any(|row| row.len() != k) {
        return Err(StatsError::Ragged);
    }
    if let Some(v) = grid.iter().flatten().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(*v));
    }
    Ok((n, k))
}

/// Mean within-block rank of each treatment.
pub fn mean_ranks(grid: &[Vec<f64>]) -> Result<Vec<f64>, StatsError> {
    let (n, k) = check_grid(grid)?;
    let mut sums = vec![0.0; k];
    for row in grid {
        for (s, r) in sums.iter_mut().zip(rank_with_ties(row)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / n as f64).collect())
}

/// Friedman rank test over an n × k grid (rows are blocks), with the usual
/// correction for tied ranks. A grid whose every row is constant gives
/// statistic 0 and p = 1.
pub fn friedman(grid: &[Vec<f64>]) -> Result<StatTestResult, StatsError> {
    let (n, k) = check_grid(grid)?;
    let (nf, kf) = (n as f64, k as f64);
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in grid {
        for (s, r) in rank_sums.iter_mut().zip(rank_with_ties(row)) {
            *s += r;
        }
        tie_term += tie_groups(row)
            .into_iter()
            .map(|t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>();
    }
    let divisor = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    let df = kf - 1.0;
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0);
    let (statistic, p_value) = if divisor <= 1e-12 {
        (0.0, 1.0)
    } else {
        let stat = (raw / divisor).max(0.0);
        (stat, chi_square_sf(stat, df).clamp(0.0, 1.0))
    };
    Ok(StatTestResult {
        test_name: "friedman".into(),
        statistic,
        df: vec![df],
        p_value,
        pairwise: None,
    })
}

/// Dunn's pairwise comparison of mean within-block ranks after a Friedman
/// test: `z = (R̄a − R̄b) / sqrt(k(k+1) / (6n))`, two-sided normal p. Pairs
/// come out as (0,1), (0,2), …, (k−2,k−1).
pub fn dunn_posthoc(
    grid: &[Vec<f64>],
    treatment_ids: &[String],
    correction: Correction,
) -> Result<Vec<PairwiseComparison>, StatsError> {
    let (n, k) = check_grid(grid)?;
    if treatment_ids.len() != k {
        return Err(StatsError::Ragged);
    }
    let ranks = mean_ranks(grid)?;
    let means: Vec<f64> = (0..k)
        .map(|t| grid.iter().map(|row| row[t]).sum::<f64>() / n as f64)
        .collect();
    let se = ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt();
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let z = (ranks[a] - ranks[b]) / se;
            let raw_p = (2.0 * normal_sf(z.abs())).min(1.0);
            pairs.push(PairwiseComparison {
                treatment_a: treatment_ids[a].clone(),
                treatment_b: treatment_ids[b].clone(),
                statistic: z,
                raw_p,
                adjusted_p: raw_p,
                mean_difference: means[a] - means[b],
            });
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|p| p.raw_p).collect();
    for (pair, adj) in pairs.iter_mut().zip(correction.apply(&raw)?) {
        pair.adjusted_p = adj.max(pair.raw_p);
    }
    Ok(pairs)
}
