use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    BenjaminiHochberg,
    Bonferroni,
    None,
}

impl Correction {
    pub fn apply(self, p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
        match self {
            Correction::BenjaminiHochberg => benjamini_hochberg(p_values),
            Correction::Bonferroni => bonferroni(p_values),
            Correction::None => {
                check(p_values)?;
                Ok(p_values.to_vec())
            }
        }
    }
}

impl std::str::FromStr for Correction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "benjamini_hochberg" | "bh" => Ok(Correction::BenjaminiHochberg),
            "bonferroni" => Ok(Correction::Bonferroni),
            "none" => Ok(Correction::None),
            other => Err(format!("unknown correction `{other}`")),
        }
    }
}

fn check(p_values: &[f64]) -> Result<(), StatsError> {
    match p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(StatsError::InvalidProbability(p)),
        None => Ok(()),
    }
}

/// Benjamini–Hochberg step-up adjustment, returned in input order.
pub fn benjamini_hochberg(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    check(p_values)?;
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let scaled = (m as f64 * p_values[idx] / (pos + 1) as f64).min(1.0);
        running = running.min(scaled);
        // m/j >= 1, so only rounding could take the value below p
        adjusted[idx] = running.max(p_values[idx]);
    }
    Ok(adjusted)
}

pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    check(p_values)?;
    let m = p_values.len() as f64;
    Ok(p_values.iter().map(|p| (p * m).min(1.0)).collect())
}
