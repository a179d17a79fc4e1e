use serde::{Deserialize, Serialize};

use super::EvalError;

/// Square count matrix; rows are true labels, columns predicted labels,
/// both `1..=classes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    rows: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            rows: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(EvalError::BadShape);
        }
        Ok(Self { rows })
    }

    pub fn classes(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Records one prediction (1-based labels).
    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.rows[truth - 1][predicted - 1] += 1;
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.rows[truth - 1][predicted - 1]
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.rows[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.classes())
            .map(|j| self.rows.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Element-wise sum; matrices must have the same size.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), EvalError> {
        if other.classes() != self.classes() {
            return Err(EvalError::BadShape);
        }
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    /// Relabels classes: new class `perm[c - 1]` takes the row and column
    /// of old class `c`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.classes();
        let mut rows = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[perm[i] - 1][perm[j] - 1] = self.rows[i][j];
            }
        }
        Self { rows }
    }

    /// CSV laid out like a printed confusion table: a header of predicted
    /// labels, then one row per true label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for j in 1..=self.classes() {
            out.push_str(&format!(",{j}"));
        }
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&(i + 1).to_string());
            for v in r {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Overall accuracy: trace over total.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)` with chance agreement `p_e`
/// from the row and column marginals.
pub fn kappa(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let n = total as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e: f64 = cm
        .row_sums()
        .iter()
        .zip(cm.col_sums())
        .map(|(&r, c)| (r as f64 / n) * (c as f64 / n))
        .sum();
    if p_e >= 1.0 {
        // only reachable when every sample sits in one diagonal cell
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
