//! Confidence traces and vulnerability scoring.
//!
//! While the surrogate trains on a task, the probability it assigns to each
//! sample's own class is recorded once per epoch. A class's confidence at an
//! epoch is the mean over its samples; its vulnerability is the population
//! standard deviation of that confidence across epochs. Sample scores are the
//! per-row analogues. High vulnerability marks the classes and samples the
//! policy treats as challenging.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::stream::Sample;

/// Per-sample target-class probabilities, one column per recorded epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceTrace {
    sample_ids: Vec<usize>,
    labels: Vec<usize>,
    /// Row-major: `values[i][e]` is sample `i`'s confidence after epoch `e`.
    values: Vec<Vec<f64>>,
    capacity: usize,
}

impl ConfidenceTrace {
    /// Empty trace over the given samples with room for `capacity` epochs.
    pub fn new(samples: &[Sample], capacity: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("trace needs at least one sample"));
        }
        if capacity == 0 {
            return Err(Error::invalid("trace capacity must be >= 1"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in samples {
            if !seen.insert(s.id) {
                return Err(Error::invalid(format!("duplicate sample id {}", s.id)));
            }
        }
        Ok(ConfidenceTrace {
            sample_ids: samples.iter().map(|s| s.id).collect(),
            labels: samples.iter().map(|s| s.label).collect(),
            values: vec![Vec::with_capacity(capacity); samples.len()],
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_ids.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn recorded_epochs(&self) -> usize {
        self.values[0].len()
    }

    pub fn sample_ids(&self) -> &[usize] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn value(&self, i: usize, epoch: usize) -> f64 {
        self.values[i][epoch]
    }

    /// Distinct class ids present, ascending.
    pub fn classes(&self) -> Vec<usize> {
        let mut cs: Vec<usize> = self.labels.clone();
        cs.sort_unstable();
        cs.dedup();
        cs
    }

    /// Appends one column of raw confidence values (must match sample order).
    pub fn record_values(&mut self, column: &[f64]) -> Result<()> {
        if column.len() != self.len() {
            return Err(Error::invalid(format!(
                "column has {} values for {} samples",
                column.len(),
                self.len()
            )));
        }
        if self.recorded_epochs() >= self.capacity {
            return Err(Error::invalid(format!(
                "trace already holds {} epochs",
                self.capacity
            )));
        }
        if column.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("confidence values must lie in [0, 1]"));
        }
        for (row, &v) in self.values.iter_mut().zip(column) {
            row.push(v);
        }
        Ok(())
    }

    /// Appends one column of target-class confidences under `params`.
    ///
    /// `samples` must be the trace's samples in the same order; their labels
    /// index the model head (callers may pass remapped clones when the head
    /// uses task-local classes).
    pub fn record_epoch(&mut self, params: &ModelParams, samples: &[Sample]) -> Result<()> {
        if samples.len() != self.len()
            || samples.iter().zip(&self.sample_ids).any(|(s, &id)| s.id != id)
        {
            return Err(Error::invalid("samples do not match trace ordering"));
        }
        let column = samples
            .iter()
            .map(|s| model::target_confidence(params, s))
            .collect::<Result<Vec<f64>>>()?;
        self.record_values(&column)
    }

    /// One row per sample: `id,label,<confidences...>` at 6 decimal digits.
    pub fn write_delimited<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            write!(w, "{},{}", self.sample_ids[i], self.labels[i])?;
            for v in &self.values[i] {
                write!(w, ",{v:.6}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Mean confidence and vulnerability of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub class_id: usize,
    pub mean_confidence: f64,
    pub vulnerability: f64,
}

/// Mean confidence and vulnerability of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleScore {
    pub sample_id: usize,
    pub mean_confidence: f64,
    pub vulnerability: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divide by n, not n-1).
fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

fn require_recorded(trace: &ConfidenceTrace) -> Result<()> {
    if trace.recorded_epochs() == 0 {
        return Err(Error::invalid("trace has no recorded epochs"));
    }
    Ok(())
}

/// Mean confidence of one class at one epoch.
pub fn class_confidence(trace: &ConfidenceTrace, class_id: usize, epoch: usize) -> Result<f64> {
    if epoch >= trace.recorded_epochs() {
        return Err(Error::invalid(format!("epoch {epoch} not recorded")));
    }
    let values: Vec<f64> = trace
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == class_id)
        .map(|(i, _)| trace.value(i, epoch))
        .collect();
    if values.is_empty() {
        return Err(Error::invalid(format!("class {class_id} not present in trace")));
    }
    Ok(mean(&values))
}

/// Per-class mean confidence across epochs and its population std
/// (the class vulnerability). Sorted by ascending class id.
pub fn class_scores(trace: &ConfidenceTrace) -> Result<Vec<ClassScore>> {
    require_recorded(trace)?;
    let epochs = trace.recorded_epochs();
    let mut out = Vec::new();
    for class_id in trace.classes() {
        let series: Vec<f64> = (0..epochs)
            .map(|e| class_confidence(trace, class_id, e))
            .collect::<Result<_>>()?;
        out.push(ClassScore {
            class_id,
            mean_confidence: mean(&series),
            vulnerability: population_std(&series),
        });
    }
    Ok(out)
}

/// Per-sample mean confidence and population std across epochs, in trace
/// row order.
pub fn sample_scores(trace: &ConfidenceTrace) -> Result<Vec<SampleScore>> {
    require_recorded(trace)?;
    Ok((0..trace.len())
        .map(|i| {
            let row = trace.row(i);
            SampleScore {
                sample_id: trace.sample_ids()[i],
                mean_confidence: mean(row),
                vulnerability: population_std(row),
            }
        })
        .collect())
}

/// The three behavioral groups, each holding exactly ceil(q*n) sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Categories {
    /// Highest mean confidence.
    pub simple: Vec<usize>,
    /// Lowest mean confidence.
    pub hard: Vec<usize>,
    /// Highest vulnerability.
    pub challenging: Vec<usize>,
}

/// ceil(fraction * n) with a nudge against float dust (0.1 * 30 must be 3).
pub(crate) fn ceil_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize
}

/// Splits samples into simple / hard / challenging groups of ceil(q*n) ids
/// each (the groups may overlap). Ties break toward the lower sample id.
pub fn categorize_samples(scores: &[SampleScore], fraction: f64) -> Result<Categories> {
    if scores.is_empty() {
        return Err(Error::invalid("no scores to categorize"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("fraction must lie strictly inside (0, 1)"));
    }
    let take = ceil_count(fraction, scores.len()).min(scores.len());

    let pick = |key: &dyn Fn(&SampleScore) -> f64, descending: bool| -> Vec<usize> {
        let mut order: Vec<&SampleScore> = scores.iter().collect();
        order.sort_by(|a, b| {
            let cmp = key(a).total_cmp(&key(b));
            let cmp = if descending { cmp.reverse() } else { cmp };
            cmp.then(a.sample_id.cmp(&b.sample_id))
        });
        order[..take].iter().map(|s| s.sample_id).collect()
    };

    Ok(Categories {
        simple: pick(&|s| s.mean_confidence, true),
        hard: pick(&|s| s.mean_confidence, false),
        challenging: pick(&|s| s.vulnerability, true),
    })
}
