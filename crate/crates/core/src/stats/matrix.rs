use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    /// Blocks (source texts).
    pub n: usize,
    /// Treatments (translation systems).
    pub k: usize,
    /// Repetitions per cell.
    pub r: usize,
}

impl ExperimentDesign {
    pub fn new(n: usize, k: usize, r: usize) -> Result<Self, StatsError> {
        if n == 0 || k == 0 || r == 0 {
            return Err(StatsError::InvalidDesign { n, k, r });
        }
        Ok(Self { n, k, r })
    }

    pub fn observations(&self) -> usize {
        self.n * self.k * self.r
    }
}

/// Scores for one metric over a blocks × treatments × repetitions grid.
/// Indices are zero-based; `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub design: ExperimentDesign,
    pub metric: String,
    pub block_ids: Vec<String>,
    pub treatment_ids: Vec<String>,
    values: Vec<Option<f64>>,
}

impl ScoreMatrix {
    /// An all-missing matrix.
    pub fn new(
        design: ExperimentDesign,
        metric: impl Into<String>,
        block_ids: Vec<String>,
        treatment_ids: Vec<String>,
    ) -> Result<Self, StatsError> {
        if block_ids.len() != design.n || treatment_ids.len() != design.k {
            return Err(StatsError::LabelMismatch {
                blocks: block_ids.len(),
                treatments: treatment_ids.len(),
                design,
            });
        }
        Ok(Self {
            design,
            metric: metric.into(),
            block_ids,
            treatment_ids,
            values: vec![None; design.observations()],
        })
    }

    /// Builds a fully populated matrix from `values[block][treatment][rep]`,
    /// labelling blocks `B1..` and treatments `T1..`.
    pub fn from_nested(metric: impl Into<String>, values: &[Vec<Vec<f64>>]) -> Result<Self, StatsError> {
        let n = values.len();
        let k = values.first().map_or(0, Vec::len);
        let r = values.first().and_then(|b| b.first()).map_or(0, Vec::len);
        let design = ExperimentDesign::new(n, k, r)?;
        let mut m = Self::new(
            design,
            metric,
            (1..=n).map(|i| format!("B{i}")).collect(),
            (1..=k).map(|j| format!("T{j}")).collect(),
        )?;
        for (b, block) in values.iter().enumerate() {
            if block.len() != k {
                return Err(StatsError::Ragged);
            }
            for (t, cell) in block.iter().enumerate() {
                if cell.len() != r {
                    return Err(StatsError::Ragged);
                }
                for (rep, &v) in cell.iter().enumerate() {
                    m.set(b, t, rep, Some(v));
                }
            }
        }
        Ok(m)
    }

    fn index(&self, block: usize, treatment: usize, rep: usize) -> usize {
        let d = self.design;
        assert!(
            block < d.n && treatment < d.k && rep < d.r,
            "index ({block}, {treatment}, {rep}) outside {}x{}x{}",
            d.n,
            d.k,
            d.r
        );
        (block * d.k + treatment) * d.r + rep
    }

    pub fn get(&self, block: usize, treatment: usize, rep: usize) -> Option<f64> {
        self.values[self.index(block, treatment, rep)]
    }

    pub fn set(&mut self, block: usize, treatment: usize, rep: usize, value: Option<f64>) {
        let i = self.index(block, treatment, rep);
        self.values[i] = value;
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Every present observation, in block/treatment/repetition order.
    pub fn observations(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    /// Present observations for one treatment.
    pub fn treatment_values(&self, treatment: usize) -> Vec<f64> {
        let d = self.design;
        (0..d.n)
            .flat_map(|b| (0..d.r).map(move |rep| (b, rep)))
            .filter_map(|(b, rep)| self.get(b, treatment, rep))
            .collect()
    }

    fn cell_mean(&self, block: usize, treatment: usize) -> Option<f64> {
        let present: Vec<f64> = (0..self.design.r)
            .filter_map(|rep| self.get(block, treatment, rep))
            .collect();
        if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        }
    }
}

/// Per-cell means over repetitions, skipping missing values. Rows are blocks.
/// Fails on a cell whose repetitions are all missing.
pub fn cell_means(matrix: &ScoreMatrix) -> Result<Vec<Vec<f64>>, StatsError> {
    let d = matrix.design;
    (0..d.n)
        .map(|b| {
            (0..d.k)
                .map(|t| {
                    matrix.cell_mean(b, t).ok_or_else(|| StatsError::EmptyCell {
                        block: matrix.block_ids[b].clone(),
                        treatment: matrix.treatment_ids[t].clone(),
                    })
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Fill an empty cell with the mean of the other cells in its row.
    #[default]
    ImputeBlockMean,
    /// Drop every row that has an empty cell.
    DropBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepetitionMode {
    /// One row per block, cells averaged over repetitions.
    #[default]
    CellMeans,
    /// One row per (block, repetition).
    PerRepetition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedCell {
    pub block: String,
    pub treatment: String,
    pub value: f64,
}

/// A complete rows × treatments grid ready for rank tests, with an audit
/// trail of what was imputed or dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedGrid {
    pub row_ids: Vec<String>,
    pub treatment_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub imputed: Vec<ImputedCell>,
    pub dropped: Vec<String>,
}

/// Collapses `matrix` into a complete grid under the given policies.
/// A row with no observed cell at all is always dropped.
pub fn balanced_grid(
    matrix: &ScoreMatrix,
    mode: RepetitionMode,
    policy: MissingPolicy,
) -> Result<BalancedGrid, StatsError> {
    let d = matrix.design;
    let mut rows: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    match mode {
        RepetitionMode::CellMeans => {
            for b in 0..d.n {
                let cells = (0..d.k).map(|t| matrix.cell_mean(b, t)).collect();
                rows.push((matrix.block_ids[b].clone(), cells));
            }
        }
        RepetitionMode::PerRepetition => {
            for b in 0..d.n {
                for rep in 0..d.r {
                    let cells = (0..d.k).map(|t| matrix.get(b, t, rep)).collect();
                    rows.push((format!("{}#{}", matrix.block_ids[b], rep + 1), cells));
                }
            }
        }
    }

    let mut grid = BalancedGrid {
        row_ids: Vec::new(),
        treatment_ids: matrix.treatment_ids.clone(),
        values: Vec::new(),
        imputed: Vec::new(),
        dropped: Vec::new(),
    };
    for (id, cells) in rows {
        let present: Vec<f64> = cells.iter().flatten().copied().collect();
        let complete = present.len() == cells.len();
        if present.is_empty() || (!complete && policy == MissingPolicy::DropBlock) {
            grid.dropped.push(id);
            continue;
        }
        let fill = present.iter().sum::<f64>() / present.len() as f64;
        let mut row = Vec::with_capacity(cells.len());
        for (t, cell) in cells.into_iter().enumerate() {
            match cell {
                Some(v) => row.push(v),
                None => {
                    grid.imputed.push(ImputedCell {
                        block: id.clone(),
                        treatment: matrix.treatment_ids[t].clone(),
                        value: fill,
                    });
                    row.push(fill);
                }
            }
        }
        grid.row_ids.push(id);
        grid.values.push(row);
    }
    if grid.values.len() < 2 {
        return Err(StatsError::TooFewBlocks(grid.values.len()));
    }
    Ok(grid)
}

/// Average ranks, ascending from 1; ties share the mean of their positions.
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share their mean
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Sizes of the tie groups in `values`, singletons included.
pub(crate) fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}
