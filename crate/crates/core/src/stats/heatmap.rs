use serde::{Deserialize, Serialize};

use super::correlation::{spearman, CorrelationMethod, CorrelationResult};
use super::StatsError;

/// One cell of a pairwise Spearman matrix. `None` marks a pair involving a
/// constant column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub names: Vec<String>,
    pub cells: Vec<Vec<Option<CorrelationResult>>>,
}

impl Heatmap {
    pub fn get(&self, a: &str, b: &str) -> Option<&CorrelationResult> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.cells[i][j].as_ref()
    }

    pub fn degenerate(&self) -> Vec<&str> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| self.cells[*i][*i].is_none())
            .map(|(_, n)| n.as_str())
            .collect()
    }
}

/// Symmetric matrix of pairwise Spearman correlations over complete rows.
pub fn correlation_heatmap(columns: &[(String, Vec<f64>)]) -> Result<Heatmap, StatsError> {
    if columns.len() < 2 {
        return Err(StatsError::TooFewPredictors { needed: 2, got: columns.len() });
    }
    let n = columns[0].1.len();
    for (_, c) in columns {
        if c.len() != n {
            return Err(StatsError::LengthMismatch { left: n, right: c.len() });
        }
    }
    let k = columns.len();
    let constant: Vec<bool> = columns.iter().map(|(_, c)| c.windows(2).all(|w| w[0] == w[1])).collect();
    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        if constant[i] {
            continue;
        }
        cells[i][i] = Some(CorrelationResult {
            rho: 1.0,
            p_value: 0.0,
            n,
            method: CorrelationMethod::Spearman,
            controls: Vec::new(),
        });
        for j in (i + 1)..k {
            if constant[j] {
                continue;
            }
            let r = match spearman(&columns[i].1, &columns[j].1) {
                Ok(r) => Some(r),
                Err(StatsError::Degenerate(_)) => None,
                Err(e) => return Err(e),
            };
            cells[j][i] = r.clone();
            cells[i][j] = r;
        }
    }
    Ok(Heatmap { names: columns.iter().map(|(n, _)| n.clone()).collect(), cells })
}
