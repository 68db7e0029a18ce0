use std::collections::HashMap;

use super::MetricError;

pub const DEFAULT_MAX_N: usize = 6;
pub const DEFAULT_BETA: f64 = 2.0;

/// Character n-gram F-score averaged over orders `1..=max_n`.
///
/// Whitespace is removed before extracting n-grams. Orders for which neither
/// string has an n-gram are left out of the average, so identical strings
/// shorter than `max_n` still score 1.
pub fn chrf(candidate: &str, reference: &str, max_n: usize, beta: f64) -> Result<f64, MetricError> {
    if max_n == 0 || !(beta.is_finite() && beta > 0.0) {
        return Err(MetricError::InvalidParameter(format!(
            "chrF needs max_n >= 1 and beta > 0, got max_n={max_n} beta={beta}"
        )));
    }
    let cand: Vec<char> = candidate.chars().filter(|c| !c.is_whitespace()).collect();
    let refr: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if refr.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let beta2 = beta * beta;
    let mut sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=max_n {
        let cand_grams = char_ngrams(&cand, n);
        let ref_grams = char_ngrams(&refr, n);
        let cand_total: usize = cand_grams.values().sum();
        let ref_total: usize = ref_grams.values().sum();
        if cand_total == 0 && ref_total == 0 {
            continue;
        }
        let matched: usize = cand_grams
            .iter()
            .map(|(g, &c)| c.min(ref_grams.get(g).copied().unwrap_or(0)))
            .sum();
        let precision = ratio(matched, cand_total);
        let recall = ratio(matched, ref_total);
        sum += f_beta(precision, recall, beta2);
        orders += 1;
    }
    Ok(sum / orders as f64)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_beta(precision: f64, recall: f64, beta2: f64) -> f64 {
    if precision == 0.0 && recall == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / (beta2 * precision + recall)
    }
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}
