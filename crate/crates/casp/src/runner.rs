//! End-to-end experiment driver.
//!
//! The streaming protocol per task: minibatches arrive in a seeded order;
//! every step trains on the current batch joined with a uniformly retrieved
//! replay batch; each datum is offered to the reservoir exactly once (on the
//! first pass, regardless of how many passes the task gets). When the policy
//! is enabled it rewrites the finished task's buffer share before evaluation.
//! After each task the model is scored on every seen task's test set, filling
//! one row of the accuracy matrix.
//!
//! Every public run is a pure function of (config, seed): all randomness
//! flows through named child generators of the run seed.

use std::collections::BTreeMap;

use crate::analytics::{self, ConfidenceTrace};
use crate::buffer::Buffer;
use crate::config::{ExperimentConfig, Method, SubsetCategory};
use crate::error::{Error, Result};
use crate::metrics::{self, AccuracyMatrix};
use crate::model::{self, ModelParams, SgdState};
use crate::policy::{self, ClassStrategy, SampleStrategy};
use crate::report::ResultRow;
use crate::rng::{combine, sub_rng, sub_seed};
use crate::stream::{self, DatasetSchema, Sample, Task};

/// Everything a single run produces (the row plus inspection artifacts).
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub matrix: AccuracyMatrix,
    pub row: ResultRow,
    pub buffer: Buffer,
    /// Surrogate traces per task index (policy runs only).
    pub traces: Vec<(usize, ConfidenceTrace)>,
    /// Per-class test accuracy after each task, from the class's task onward.
    pub per_class_history: BTreeMap<usize, Vec<f64>>,
}

/// Builds the task stream for one run: synthetic (the stream seed is mixed
/// with the run seed) or loaded from files, then optionally class-shuffled.
pub fn build_tasks(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Task>> {
    let mut tasks = match (&cfg.dataset_train, &cfg.dataset_test) {
        (Some(train), Some(test)) => {
            let schema = DatasetSchema {
                feature_dim: None,
                has_task_column: cfg.dataset_task_column,
            };
            stream::load_split_dataset(train, test, &schema)?
        }
        _ => {
            let mut stream_cfg = cfg.stream.clone();
            stream_cfg.seed = combine(cfg.stream.seed, seed);
            stream::make_gaussian_stream(&stream_cfg)?
        }
    };
    if cfg.shuffle_class_order {
        tasks = stream::shuffle_class_order(&tasks, sub_seed(seed, "class-order"))?;
    }
    Ok(tasks)
}

fn total_classes(tasks: &[Task]) -> usize {
    tasks
        .iter()
        .flat_map(|t| t.classes.iter())
        .max()
        .map(|&c| c + 1)
        .unwrap_or(0)
}

/// Runs the streaming protocol over prebuilt tasks.
pub fn run_on_tasks(
    cfg: &ExperimentConfig,
    seed: u64,
    tasks: &[Task],
    with_casp: bool,
    method_label: &str,
) -> Result<RunArtifacts> {
    cfg.validate()?;
    if tasks.is_empty() {
        return Err(Error::invalid("no tasks to run"));
    }
    let classes = total_classes(tasks);
    let dim = tasks[0]
        .train
        .first()
        .map(|s| s.features.len())
        .ok_or_else(|| Error::invalid("first task has no training data"))?;

    let mut params = ModelParams::init(dim, cfg.cl_hidden, classes.max(2), sub_seed(seed, "init"))?;
    let mut state = SgdState::zeros_like(&params);
    let mut buffer = Buffer::new(cfg.buffer_capacity)?;
    let mut order_rng = sub_rng(seed, "order");
    let mut reservoir_rng = sub_rng(seed, "reservoir");
    let mut retrieval_rng = sub_rng(seed, "retrieval");

    let casp_cfg = {
        let mut c = cfg.casp.clone();
        c.seed = combine(cfg.casp.seed, seed);
        c
    };

    let mut matrix = AccuracyMatrix::new(tasks.len())?;
    let mut history: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut traces = Vec::new();

    for (t, task) in tasks.iter().enumerate() {
        if task.train.is_empty() {
            return Err(Error::invalid(format!("task {t} has no training data")));
        }
        for epoch in 0..cfg.cl_epochs() {
            let step_cfg = model::SgdConfig {
                learning_rate: cfg.cl_sgd.lr_at(epoch),
                ..cfg.cl_sgd.clone()
            };
            let mut order: Vec<usize> = (0..task.train.len()).collect();
            for i in 0..order.len() {
                let j = rand::Rng::random_range(&mut order_rng, i..order.len());
                order.swap(i, j);
            }
            for chunk in order.chunks(cfg.batch_size) {
                let replay = buffer.random_retrieval(cfg.replay_size, &mut retrieval_rng);
                let mut batch: Vec<&Sample> = chunk.iter().map(|&i| &task.train[i]).collect();
                batch.extend(replay.iter());
                model::sgd_step(&mut params, &batch, &step_cfg, &mut state)?;
                if epoch == 0 {
                    let incoming: Vec<Sample> =
                        chunk.iter().map(|&i| task.train[i].clone()).collect();
                    buffer.reservoir_update(&incoming, &mut reservoir_rng);
                }
            }
        }

        if with_casp {
            let outcome = policy::run_casp(task, &buffer, &casp_cfg)?;
            buffer = outcome.buffer;
            if let Some(trace) = outcome.trace {
                traces.push((t, trace));
            }
        }

        let mut row = Vec::with_capacity(t + 1);
        for seen in &tasks[..=t] {
            let (overall, per_class) = model::evaluate_detailed(&params, &seen.test)?;
            row.push(overall);
            for (class, acc) in per_class {
                history.entry(class).or_default().push(acc);
            }
        }
        matrix.push_row(row)?;
    }

    let ood_acc = match cfg.ood_sigma {
        Some(sigma) => {
            let ood_root = sub_seed(seed, "ood");
            let mut total = 0.0;
            for (t, task) in tasks.iter().enumerate() {
                let shifted = stream::corrupt_features(&task.test, sigma, combine(ood_root, t as u64))?;
                total += model::evaluate_accuracy(&params, &shifted)?;
            }
            Some(total / tasks.len() as f64)
        }
        None => None,
    };

    let avg_end_forget = if tasks.len() >= 2 {
        Some(metrics::average_end_forgetting(&matrix)?)
    } else {
        None
    };
    let row = ResultRow {
        method: method_label.to_string(),
        seed,
        buffer: cfg.buffer_capacity,
        tasks: tasks.len(),
        avg_end_acc: metrics::average_end_accuracy(&matrix)?,
        avg_end_forget,
        ood_acc,
        wall_ms: 0,
    };
    Ok(RunArtifacts { matrix, row, buffer, traces, per_class_history: history })
}

fn run_built(
    cfg: &ExperimentConfig,
    seed: u64,
    with_casp: bool,
    label: &str,
) -> Result<RunArtifacts> {
    let tasks = build_tasks(cfg, seed)?;
    run_on_tasks(cfg, seed, &tasks, with_casp, label)
}

/// Plain experience replay with reservoir updates and random retrieval.
pub fn run_er(cfg: &ExperimentConfig, seed: u64) -> Result<(AccuracyMatrix, ResultRow)> {
    let art = run_er_artifacts(cfg, seed)?;
    Ok((art.matrix, art.row))
}

pub fn run_er_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts> {
    run_built(cfg, seed, false, Method::Er.label())
}

/// Experience replay plus the buffer policy after each task.
pub fn run_er_casp(cfg: &ExperimentConfig, seed: u64) -> Result<(AccuracyMatrix, ResultRow)> {
    let art = run_er_casp_artifacts(cfg, seed)?;
    Ok((art.matrix, art.row))
}

pub fn run_er_casp_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts> {
    run_built(cfg, seed, true, Method::ErCasp.label())
}

/// Dispatches on the configured method.
pub fn run_method_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts> {
    match cfg.method {
        Method::Er => run_er_artifacts(cfg, seed),
        Method::ErCasp => run_er_casp_artifacts(cfg, seed),
    }
}

/// Offline retention study: score the pooled training set with a surrogate,
/// keep one category's fraction, train a fresh model on it, and report test
/// accuracy. `retain_fraction = 1.0` trains on everything.
pub fn run_subset_study(
    cfg: &ExperimentConfig,
    seed: u64,
    retain_fraction: f64,
    category: SubsetCategory,
) -> Result<ResultRow> {
    cfg.validate()?;
    if !(retain_fraction > 0.0 && retain_fraction <= 1.0) {
        return Err(Error::invalid("retain_fraction must lie in (0, 1]"));
    }
    let tasks = build_tasks(cfg, seed)?;
    let pool: Vec<Sample> = tasks.iter().flat_map(|t| t.train.iter().cloned()).collect();
    let test_pool: Vec<Sample> = tasks.iter().flat_map(|t| t.test.iter().cloned()).collect();
    if pool.is_empty() || test_pool.is_empty() {
        return Err(Error::invalid("subset study needs train and test data"));
    }

    let mut class_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &pool {
        *class_counts.entry(s.label).or_insert(0) += 1;
    }
    let min_count = class_counts.values().copied().min().unwrap_or(0);
    if retain_fraction < 1.0 && retain_fraction * (min_count as f64) < 1.0 {
        return Err(Error::invalid(format!(
            "retain_fraction {retain_fraction} leaves no samples for a class of {min_count}"
        )));
    }

    let kept: Vec<Sample> = if retain_fraction >= 1.0 {
        pool.clone()
    } else {
        let ids: Vec<usize> = match category {
            SubsetCategory::Random => {
                let n = analytics_ceil(retain_fraction, pool.len());
                let mut indices: Vec<usize> = (0..pool.len()).collect();
                let mut rng = sub_rng(seed, "subset-random");
                for i in 0..n {
                    let j = rand::Rng::random_range(&mut rng, i..indices.len());
                    indices.swap(i, j);
                }
                indices[..n].iter().map(|&i| pool[i].id).collect()
            }
            _ => {
                // one pseudo-task over the whole pool drives the trace
                let mut classes: Vec<usize> = class_counts.keys().copied().collect();
                classes.sort_unstable();
                let pseudo = Task { index: 0, classes, train: pool.clone(), test: Vec::new() };
                let mut casp_cfg = cfg.casp.clone();
                casp_cfg.seed = sub_seed(combine(cfg.casp.seed, seed), "subset");
                let trace = policy::fit_surrogate(&pseudo, &casp_cfg)?;
                let scores = analytics::sample_scores(&trace)?;
                let cats = analytics::categorize_samples(&scores, retain_fraction)?;
                match category {
                    SubsetCategory::Simple => cats.simple,
                    SubsetCategory::Hard => cats.hard,
                    SubsetCategory::Challenging => cats.challenging,
                    SubsetCategory::Random => unreachable!(),
                }
            }
        };
        let wanted: std::collections::BTreeSet<usize> = ids.into_iter().collect();
        pool.iter().filter(|s| wanted.contains(&s.id)).cloned().collect()
    };

    let classes = total_classes(&tasks);
    let dim = pool[0].features.len();
    let mut params =
        ModelParams::init(dim, cfg.cl_hidden, classes.max(2), sub_seed(seed, "subset-init"))?;
    params = model::train_epochs(
        &params,
        &kept,
        &cfg.cl_sgd,
        cfg.batch_size,
        sub_seed(seed, "subset-order"),
        |_, _| Ok(()),
    )?;
    let accuracy = model::evaluate_accuracy(&params, &test_pool)?;
    let ood_acc = match cfg.ood_sigma {
        Some(sigma) => {
            let shifted = stream::corrupt_features(&test_pool, sigma, sub_seed(seed, "ood"))?;
            Some(model::evaluate_accuracy(&params, &shifted)?)
        }
        None => None,
    };
    Ok(ResultRow {
        method: format!("offline-subset[{}]", category.label()),
        seed,
        buffer: kept.len(),
        tasks: tasks.len(),
        avg_end_acc: accuracy,
        avg_end_forget: None,
        ood_acc,
        wall_ms: 0,
    })
}

fn analytics_ceil(fraction: f64, n: usize) -> usize {
    crate::analytics::ceil_count(fraction, n).min(n)
}

/// Cartesian product of strategies x seeds, one policy run per cell.
pub fn run_grid(
    cfg: &ExperimentConfig,
    class_strategies: &[ClassStrategy],
    sample_strategies: &[SampleStrategy],
    seeds: &[u64],
) -> Result<Vec<ResultRow>> {
    if class_strategies.is_empty() || sample_strategies.is_empty() || seeds.is_empty() {
        return Err(Error::invalid("grid needs strategies and seeds"));
    }
    let mut rows = Vec::with_capacity(class_strategies.len() * sample_strategies.len() * seeds.len());
    for &cs in class_strategies {
        for &ss in sample_strategies {
            let mut cell = cfg.clone();
            cell.casp.class_strategy = cs;
            cell.casp.sample_strategy = ss;
            let label = format!("er-casp[{cs}/{ss}]");
            for &seed in seeds {
                let art = run_built(&cell, seed, true, &label)?;
                rows.push(art.row);
            }
        }
    }
    Ok(rows)
}

/// Class vulnerability on an initial task versus the forgetting its classes
/// suffer over a continuation stream.
#[derive(Debug, Clone)]
pub struct CorrelationStudy {
    /// (class id, vulnerability) for each class of the initial task.
    pub vulnerability: Vec<(usize, f64)>,
    /// (class id, forgetting) in matching order.
    pub forgetting: Vec<(usize, f64)>,
    pub pearson: f64,
}

/// Scores the first task's classes with a surrogate, runs plain replay over
/// the initial task plus a relabeled continuation stream, and correlates
/// class vulnerability with the per-class forgetting at the end.
pub fn run_correlation_study(
    cfg: &ExperimentConfig,
    continuation: &crate::stream::StreamConfig,
    seed: u64,
) -> Result<CorrelationStudy> {
    cfg.validate()?;
    let mut initial_cfg = cfg.stream.clone();
    initial_cfg.seed = combine(cfg.stream.seed, seed);
    let initial = stream::make_gaussian_stream(&initial_cfg)?;

    let mut cont_cfg = continuation.clone();
    cont_cfg.seed = combine(combine(continuation.seed, seed), 1);
    let continuation_tasks = stream::make_gaussian_stream(&cont_cfg)?;

    // relabel the continuation so ids, classes, and task indices extend the
    // initial stream
    let class_offset = total_classes(&initial);
    let task_offset = initial.len();
    let id_offset: usize = initial.iter().map(|t| t.train.len() + t.test.len()).sum();
    let mut tasks = initial;
    for mut task in continuation_tasks {
        task.index += task_offset;
        for c in &mut task.classes {
            *c += class_offset;
        }
        for s in task.train.iter_mut().chain(task.test.iter_mut()) {
            s.id += id_offset;
            s.label += class_offset;
            s.task += task_offset;
        }
        tasks.push(task);
    }

    // vulnerability of the first task's classes, from a separate surrogate
    let mut casp_cfg = cfg.casp.clone();
    casp_cfg.seed = sub_seed(combine(cfg.casp.seed, seed), "correlation");
    let trace = policy::fit_surrogate(&tasks[0], &casp_cfg)?;
    let class_scores = analytics::class_scores(&trace)?;

    // the study measures raw replay dynamics; the scored task must stay first
    let mut run_cfg = cfg.clone();
    run_cfg.shuffle_class_order = false;
    let art = run_on_tasks(&run_cfg, seed, &tasks, false, Method::Er.label())?;

    let restricted: BTreeMap<usize, Vec<f64>> = art
        .per_class_history
        .iter()
        .filter(|(c, _)| tasks[0].classes.contains(c))
        .map(|(c, v)| (*c, v.clone()))
        .collect();
    let per_class = metrics::per_class_forgetting(&restricted)?;

    let mut vulnerability = Vec::new();
    let mut forgetting = Vec::new();
    for score in &class_scores {
        let f = per_class.get(&score.class_id).ok_or_else(|| {
            Error::invalid(format!("class {} missing from history", score.class_id))
        })?;
        vulnerability.push((score.class_id, score.vulnerability));
        forgetting.push((score.class_id, *f));
    }
    let x: Vec<f64> = vulnerability.iter().map(|(_, v)| *v).collect();
    let y: Vec<f64> = forgetting.iter().map(|(_, f)| *f).collect();
    let r = metrics::pearson(&x, &y)?;
    Ok(CorrelationStudy { vulnerability, forgetting, pearson: r })
}
