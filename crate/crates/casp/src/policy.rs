//! The class-adaptive sampling policy.
//!
//! After a task finishes streaming, a fresh surrogate model trains on that
//! task alone for a few epochs while its per-epoch confidences are traced.
//! Class vulnerabilities turn the task's buffer share into per-class quotas,
//! a sample strategy fills the quotas, and the task's slots are rewritten.
//! The main model is never touched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::analytics::{self, ClassScore, ConfidenceTrace, SampleScore};
use crate::buffer::{self, AllocationPlan, Buffer};
use crate::error::{Error, Result};
use crate::model::{self, ModelParams, SgdConfig};
use crate::rng::{combine, sub_rng, sub_seed};
use crate::stream::{Sample, Task};

/// How buffer space is divided among a task's classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassStrategy {
    /// Weight by vulnerability (confidence std across epochs).
    Challenging,
    /// Weight by 1 - mean confidence.
    Hard,
    /// Weight by mean confidence.
    Simple,
    /// Equal split.
    Balanced,
    /// Keep whatever the reservoir left; no rewrite at all.
    NoPolicy,
}

impl fmt::Display for ClassStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassStrategy::Challenging => "challenging",
            ClassStrategy::Hard => "hard",
            ClassStrategy::Simple => "simple",
            ClassStrategy::Balanced => "balanced",
            ClassStrategy::NoPolicy => "nopolicy",
        };
        f.write_str(s)
    }
}

impl FromStr for ClassStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "challenging" => Ok(ClassStrategy::Challenging),
            "hard" => Ok(ClassStrategy::Hard),
            "simple" => Ok(ClassStrategy::Simple),
            "balanced" => Ok(ClassStrategy::Balanced),
            "nopolicy" | "no-policy" | "none" => Ok(ClassStrategy::NoPolicy),
            other => Err(Error::invalid(format!("unknown class strategy: {other:?}"))),
        }
    }
}

/// How samples are picked inside one class's quota.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStrategy {
    /// Highest vulnerability first.
    Challenging,
    /// Lowest mean confidence first.
    Hard,
    /// Highest mean confidence first.
    Simple,
    /// Uniform without replacement.
    Random,
}

impl fmt::Display for SampleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SampleStrategy::Challenging => "challenging",
            SampleStrategy::Hard => "hard",
            SampleStrategy::Simple => "simple",
            SampleStrategy::Random => "random",
        };
        f.write_str(s)
    }
}

impl FromStr for SampleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "challenging" => Ok(SampleStrategy::Challenging),
            "hard" => Ok(SampleStrategy::Hard),
            "simple" => Ok(SampleStrategy::Simple),
            "random" => Ok(SampleStrategy::Random),
            other => Err(Error::invalid(format!("unknown sample strategy: {other:?}"))),
        }
    }
}

/// Surrogate training and strategy choices for one policy application.
#[derive(Debug, Clone, PartialEq)]
pub struct CaspConfig {
    /// Surrogate optimizer; `epochs` is the trace length E.
    pub sgd: SgdConfig,
    pub hidden_dim: usize,
    pub batch_size: usize,
    pub class_strategy: ClassStrategy,
    pub sample_strategy: SampleStrategy,
    /// Also record the untrained model's confidences as a leading column.
    pub include_epoch0: bool,
    pub seed: u64,
}

impl Default for CaspConfig {
    fn default() -> Self {
        CaspConfig {
            sgd: SgdConfig {
                learning_rate: 0.1,
                momentum: 0.9,
                weight_decay: 5e-4,
                epochs: 8,
                cosine_annealing: false,
            },
            hidden_dim: 32,
            batch_size: 10,
            class_strategy: ClassStrategy::Challenging,
            sample_strategy: SampleStrategy::Challenging,
            include_epoch0: false,
            seed: 0,
        }
    }
}

impl CaspConfig {
    pub fn validate(&self) -> Result<()> {
        self.sgd.validate()?;
        if self.hidden_dim == 0 {
            return Err(Error::invalid("surrogate hidden width must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("surrogate batch size must be >= 1"));
        }
        Ok(())
    }
}

/// Everything one policy application produced.
#[derive(Debug, Clone)]
pub struct CaspRun {
    pub plan: AllocationPlan,
    pub buffer: Buffer,
    /// Surrogate trace (absent under `NoPolicy`, which trains nothing).
    pub trace: Option<ConfidenceTrace>,
    pub class_scores: Vec<ClassScore>,
    pub sample_scores: Vec<SampleScore>,
}

/// Nonnegative class weights implementing the chosen strategy.
pub fn class_weights(scores: &[ClassScore], strategy: ClassStrategy) -> Vec<(usize, f64)> {
    scores
        .iter()
        .map(|s| {
            let w = match strategy {
                ClassStrategy::Challenging => s.vulnerability,
                ClassStrategy::Hard => 1.0 - s.mean_confidence,
                ClassStrategy::Simple => s.mean_confidence,
                ClassStrategy::Balanced | ClassStrategy::NoPolicy => 1.0,
            };
            (s.class_id, w)
        })
        .collect()
}

/// Task samples with labels remapped to positions in `task.classes`, so a
/// K-way surrogate head can train on them. Ids are preserved.
fn localized_train(task: &Task) -> Result<Vec<Sample>> {
    let index: BTreeMap<usize, usize> =
        task.classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    task.train
        .iter()
        .map(|s| {
            let &local = index
                .get(&s.label)
                .ok_or_else(|| Error::invalid(format!("label {} not in task classes", s.label)))?;
            Ok(Sample { id: s.id, features: s.features.clone(), label: local, task: s.task })
        })
        .collect()
}

/// Trains a fresh surrogate on the task's train split and returns its
/// confidence trace (global ids and labels, one column per epoch, plus a
/// leading untrained column when configured).
///
/// A single-class task needs no training: the probability of its only class
/// is 1 by definition, so the trace is constant.
pub fn fit_surrogate(task: &Task, cfg: &CaspConfig) -> Result<ConfidenceTrace> {
    cfg.validate()?;
    if task.train.is_empty() {
        return Err(Error::invalid("task has no training data"));
    }
    let columns = cfg.sgd.epochs + usize::from(cfg.include_epoch0);
    let mut trace = ConfidenceTrace::new(&task.train, columns)?;

    if task.classes.len() < 2 {
        let ones = vec![1.0; task.train.len()];
        for _ in 0..columns {
            trace.record_values(&ones)?;
        }
        return Ok(trace);
    }

    let task_root = combine(cfg.seed, task.index as u64);
    let locals = localized_train(task)?;
    let dim = locals[0].features.len();
    let params = ModelParams::init(
        dim,
        cfg.hidden_dim,
        task.classes.len(),
        sub_seed(task_root, "surrogate-init"),
    )?;
    if cfg.include_epoch0 {
        trace.record_epoch(&params, &locals)?;
    }
    model::train_epochs(
        &params,
        &locals,
        &cfg.sgd,
        cfg.batch_size,
        sub_seed(task_root, "surrogate-order"),
        |_, p| trace.record_epoch(p, &locals),
    )?;
    Ok(trace)
}

/// Applies the policy to one finished task: trace the surrogate, weight the
/// classes, allocate the task's current buffer share, select samples, and
/// rewrite that share. Deterministic given `cfg.seed`; slots of other tasks
/// are never touched.
pub fn run_casp(task: &Task, buffer: &Buffer, cfg: &CaspConfig) -> Result<CaspRun> {
    cfg.validate()?;
    if task.train.is_empty() {
        return Err(Error::invalid("task has no training data"));
    }
    let share = buffer.task_share(task.index);

    if cfg.class_strategy == ClassStrategy::NoPolicy {
        // Keep the reservoir contents; report the composition as the plan.
        let quotas = buffer.task_class_counts(task.index);
        return Ok(CaspRun {
            plan: AllocationPlan { task: task.index, quotas, total: share },
            buffer: buffer.clone(),
            trace: None,
            class_scores: Vec::new(),
            sample_scores: Vec::new(),
        });
    }

    let trace = fit_surrogate(task, cfg)?;
    let class_scores = analytics::class_scores(&trace)?;
    let sample_scores = analytics::sample_scores(&trace)?;

    let mut class_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &task.train {
        *class_counts.entry(s.label).or_insert(0) += 1;
    }
    let weights = class_weights(&class_scores, cfg.class_strategy);
    let plan = buffer::allocate_quota_weighted(task.index, &weights, share, &class_counts)?;

    let task_root = combine(cfg.seed, task.index as u64);
    let mut select_rng = sub_rng(task_root, "select");
    let chosen = buffer::select_samples(
        &task.train,
        &sample_scores,
        &plan,
        cfg.sample_strategy,
        &mut select_rng,
    )?;

    let mut rewritten = buffer.clone();
    rewritten.casp_rewrite(task.index, chosen)?;
    Ok(CaspRun { plan, buffer: rewritten, trace: Some(trace), class_scores, sample_scores })
}
