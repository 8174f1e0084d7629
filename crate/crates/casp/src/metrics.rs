//! Accuracy-matrix bookkeeping and the end-of-run metrics.
//!
//! Row `i` of the matrix holds the held-out accuracy on every task seen so
//! far, measured right after training task `i`, so the matrix is lower
//! triangular. Average end accuracy is the mean of the final row; average
//! end forgetting is the mean drop from each task's historical best to its
//! final accuracy (negative values mean backward transfer).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Lower-triangular record of per-task accuracies across the run.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMatrix {
    task_count: usize,
    rows: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn new(task_count: usize) -> Result<Self> {
        if task_count == 0 {
            return Err(Error::invalid("accuracy matrix needs at least one task"));
        }
        Ok(AccuracyMatrix { task_count, rows: Vec::with_capacity(task_count) })
    }

    /// Appends the accuracies measured after training the next task.
    /// Row `i` (0-based) must hold exactly `i + 1` entries in [0, 1].
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if self.rows.len() == self.task_count {
            return Err(Error::invalid("matrix already complete"));
        }
        if row.len() != self.rows.len() + 1 {
            return Err(Error::invalid(format!(
                "row {} must have {} entries, got {}",
                self.rows.len(),
                self.rows.len() + 1,
                row.len()
            )));
        }
        if row.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::invalid("accuracies must lie in [0, 1]"));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn task_count(&self) -> usize {
        self.task_count
    }

    pub fn recorded_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.task_count
    }

    /// Accuracy on task `j` after training task `i` (defined for `j <= i`).
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rows.len() || j > i {
            return Err(Error::invalid(format!("cell ({i}, {j}) is not defined")));
        }
        Ok(self.rows[i][j])
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Mean of the final row: overall accuracy once every task has been trained.
pub fn average_end_accuracy(m: &AccuracyMatrix) -> Result<f64> {
    if !m.is_complete() {
        return Err(Error::invalid(format!(
            "final row missing: {} of {} rows recorded",
            m.recorded_rows(),
            m.task_count()
        )));
    }
    let last = &m.rows()[m.task_count() - 1];
    Ok(last.iter().sum::<f64>() / last.len() as f64)
}

/// Mean over the first T-1 tasks of (best accuracy before the final task)
/// minus (final accuracy). The best ranges over the rows where the cell is
/// defined, i.e. from the task's own row through the second-to-last row.
pub fn average_end_forgetting(m: &AccuracyMatrix) -> Result<f64> {
    if m.task_count() < 2 {
        return Err(Error::invalid("forgetting needs at least 2 tasks"));
    }
    if !m.is_complete() {
        return Err(Error::invalid("matrix is incomplete"));
    }
    let t = m.task_count();
    let mut total = 0.0;
    for j in 0..t - 1 {
        let mut best = f64::NEG_INFINITY;
        for i in j..t - 1 {
            best = best.max(m.get(i, j)?);
        }
        total += best - m.get(t - 1, j)?;
    }
    Ok(total / (t - 1) as f64)
}

/// Per-class forgetting: the class's best accuracy over its history minus
/// its final accuracy.
pub fn per_class_forgetting(
    history: &BTreeMap<usize, Vec<f64>>,
) -> Result<BTreeMap<usize, f64>> {
    if history.is_empty() {
        return Err(Error::invalid("empty accuracy history"));
    }
    let mut out = BTreeMap::new();
    for (&class, series) in history {
        if series.is_empty() {
            return Err(Error::invalid(format!("class {class}: empty accuracy history")));
        }
        let best = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.insert(class, best - series[series.len() - 1]);
    }
    Ok(out)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::invalid("pearson needs at least 2 points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson inputs must be finite"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined(
            "pearson correlation is undefined for zero variance".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
