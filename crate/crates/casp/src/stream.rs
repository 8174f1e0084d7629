//! Class-incremental task streams.
//!
//! Tasks carry disjoint class sets. Synthetic streams place one isotropic
//! Gaussian cluster per class on a hypersphere; a class's spread is its
//! difficulty knob (wider cluster + fixed center distances = harder class).
//! Plain delimited files can stand in for the synthetic generator.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{combine, sub_rng};

/// One labeled feature vector with stable identity and task provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: usize,
    pub features: Vec<f64>,
    /// Global class id.
    pub label: usize,
    /// Index of the task this sample belongs to.
    pub task: usize,
}

/// One task of the incremental stream: a disjoint class set with its own
/// train and held-out test splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub index: usize,
    /// Ordered global class ids owned by this task.
    pub classes: Vec<usize>,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// Shape and difficulty of a synthetic Gaussian stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub tasks: usize,
    pub classes_per_task: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub feature_dim: usize,
    /// Radius of the hypersphere the class centers are placed on.
    pub center_radius: f64,
    /// Per-class cluster spreads, cycled over global class ids when shorter
    /// than the class count.
    pub spreads: Vec<f64>,
    pub seed: u64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            tasks: 5,
            classes_per_task: 2,
            train_per_class: 200,
            test_per_class: 200,
            feature_dim: 16,
            center_radius: 3.0,
            spreads: vec![0.4, 2.6, 0.8, 2.2, 1.2, 1.8, 0.6, 2.4, 1.0, 2.0],
            seed: 0,
        }
    }
}

impl StreamConfig {
    pub fn total_classes(&self) -> usize {
        self.tasks * self.classes_per_task
    }

    pub fn spread(&self, class: usize) -> f64 {
        self.spreads[class % self.spreads.len()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks == 0
            || self.classes_per_task == 0
            || self.train_per_class == 0
            || self.test_per_class == 0
            || self.feature_dim == 0
        {
            return Err(Error::invalid("stream config: all counts must be >= 1"));
        }
        if self.spreads.is_empty() {
            return Err(Error::invalid("stream config: spreads must be nonempty"));
        }
        if self.spreads.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("stream config: spreads must be finite and > 0"));
        }
        if !self.center_radius.is_finite() || self.center_radius < 0.0 {
            return Err(Error::invalid(
                "stream config: center_radius must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

fn gaussian_vec<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Seeded class centers: uniform directions scaled to the configured radius.
fn class_centers(cfg: &StreamConfig) -> Vec<Vec<f64>> {
    let mut rng = sub_rng(cfg.seed, "centers");
    (0..cfg.total_classes())
        .map(|_| {
            let v = gaussian_vec(cfg.feature_dim, &mut rng);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                vec![0.0; cfg.feature_dim]
            } else {
                v.iter().map(|x| x / norm * cfg.center_radius).collect()
            }
        })
        .collect()
}

fn draw_class_samples<R: Rng>(
    center: &[f64],
    spread: f64,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            center
                .iter()
                .map(|&c| c + spread * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

/// Generates a disjoint class-incremental stream of Gaussian cluster tasks.
///
/// Task `t` owns global classes `t*K .. (t+1)*K`. Train and test splits are
/// independent draws from the same class distribution. Pure function of the
/// config (including its seed).
pub fn make_gaussian_stream(cfg: &StreamConfig) -> Result<Vec<Task>> {
    cfg.validate()?;
    let centers = class_centers(cfg);
    let mut next_id = 0usize;
    let mut tasks = Vec::with_capacity(cfg.tasks);
    for t in 0..cfg.tasks {
        let classes: Vec<usize> =
            (t * cfg.classes_per_task..(t + 1) * cfg.classes_per_task).collect();
        let mut train = Vec::new();
        let mut test = Vec::new();
        for &c in &classes {
            let class_seed = combine(cfg.seed, c as u64);
            let mut train_rng = sub_rng(class_seed, "train");
            let mut test_rng = sub_rng(class_seed, "test");
            for features in
                draw_class_samples(&centers[c], cfg.spread(c), cfg.train_per_class, &mut train_rng)
            {
                train.push(Sample { id: next_id, features, label: c, task: t });
                next_id += 1;
            }
            for features in
                draw_class_samples(&centers[c], cfg.spread(c), cfg.test_per_class, &mut test_rng)
            {
                test.push(Sample { id: next_id, features, label: c, task: t });
                next_id += 1;
            }
        }
        tasks.push(Task { index: t, classes, train, test });
    }
    Ok(tasks)
}

/// Seeded permutation of `0..n`.
pub fn class_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut sub_rng(seed, "class-order"));
    perm
}

/// Regroups classes into tasks according to `perm`.
///
/// The flattened class list (task order) is reindexed so that the new task
/// `t` owns `old_classes[perm[t*K .. (t+1)*K]]`. Labels, features, and sample
/// ids are untouched; only task membership moves.
pub fn reorder_classes(tasks: &[Task], perm: &[usize]) -> Result<Vec<Task>> {
    let old_classes: Vec<usize> = tasks.iter().flat_map(|t| t.classes.iter().copied()).collect();
    if perm.len() != old_classes.len() {
        return Err(Error::invalid(format!(
            "permutation length {} does not match class count {}",
            perm.len(),
            old_classes.len()
        )));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::invalid("not a permutation"));
        }
        seen[p] = true;
    }
    if tasks.is_empty() {
        return Ok(Vec::new());
    }
    let per_task = tasks[0].classes.len();
    if tasks.iter().any(|t| t.classes.len() != per_task) {
        return Err(Error::invalid("tasks must have equal class counts to reorder"));
    }

    // Pool samples by class, preserving original order within each class.
    let mut train_by_class: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    let mut test_by_class: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for task in tasks {
        for s in &task.train {
            train_by_class.entry(s.label).or_default().push(s.clone());
        }
        for s in &task.test {
            test_by_class.entry(s.label).or_default().push(s.clone());
        }
    }

    let mut out = Vec::with_capacity(tasks.len());
    for t in 0..tasks.len() {
        let classes: Vec<usize> =
            perm[t * per_task..(t + 1) * per_task].iter().map(|&i| old_classes[i]).collect();
        let mut train = Vec::new();
        let mut test = Vec::new();
        for &c in &classes {
            for mut s in train_by_class.remove(&c).unwrap_or_default() {
                s.task = t;
                train.push(s);
            }
            for mut s in test_by_class.remove(&c).unwrap_or_default() {
                s.task = t;
                test.push(s);
            }
        }
        out.push(Task { index: t, classes, train, test });
    }
    Ok(out)
}

/// Permutes the global class-to-task assignment by seed.
pub fn shuffle_class_order(tasks: &[Task], seed: u64) -> Result<Vec<Task>> {
    let n = tasks.iter().map(|t| t.classes.len()).sum();
    reorder_classes(tasks, &class_permutation(n, seed))
}

/// Adds seeded i.i.d. Gaussian noise of scale `sigma` to every feature.
/// Ids, labels, and task indices are unchanged.
pub fn corrupt_features(samples: &[Sample], sigma: f64, seed: u64) -> Result<Vec<Sample>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid("sigma must be finite and >= 0"));
    }
    let mut rng = sub_rng(seed, "corrupt");
    Ok(samples
        .iter()
        .map(|s| {
            let features = s
                .features
                .iter()
                .map(|&x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            Sample { id: s.id, features, label: s.label, task: s.task }
        })
        .collect())
}

/// Column layout of a delimited dataset file.
#[derive(Debug, Clone, Default)]
pub struct DatasetSchema {
    /// Expected feature dimension; inferred from the first row when `None`.
    pub feature_dim: Option<usize>,
    /// Whether a task-index column follows the label column.
    pub has_task_column: bool,
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    // "# dim=<d> classes=<k>"
    let rest = line.trim_start_matches('#').trim();
    let mut dim = None;
    let mut classes = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("dim=") {
            dim = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("classes=") {
            classes = v.parse().ok();
        }
    }
    match (dim, classes) {
        (Some(d), Some(k)) => Some((d, k)),
        _ => None,
    }
}

/// Loads a delimited dataset: one sample per line, comma-separated reals,
/// then an integer label, then (optionally) a task index. Rows become the
/// train split of their task; sample ids follow row order.
pub fn load_delimited_dataset(path: &Path, schema: &DatasetSchema) -> Result<Vec<Task>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dim = schema.feature_dim;
    let mut declared_classes = None;
    let mut samples: Vec<Sample> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some((d, k)) = parse_header(line) {
                match dim {
                    Some(expected) if expected != d => {
                        return Err(Error::format(
                            path,
                            line_no,
                            format!("header dim={d} conflicts with expected {expected}"),
                        ));
                    }
                    _ => dim = Some(d),
                }
                declared_classes = Some(k);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let trailing = 1 + usize::from(schema.has_task_column);
        let d = match dim {
            Some(d) => d,
            None => {
                if fields.len() <= trailing {
                    return Err(Error::format(path, line_no, "row has no feature columns"));
                }
                let inferred = fields.len() - trailing;
                dim = Some(inferred);
                inferred
            }
        };
        if fields.len() != d + trailing {
            return Err(Error::format(
                path,
                line_no,
                format!("expected {} columns, found {}", d + trailing, fields.len()),
            ));
        }
        let mut features = Vec::with_capacity(d);
        for (col, f) in fields[..d].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| {
                Error::format(path, line_no, format!("column {}: not a real number: {f:?}", col + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::format(path, line_no, format!("column {}: non-finite value", col + 1)));
            }
            features.push(v);
        }
        let label: usize = fields[d]
            .parse()
            .map_err(|_| Error::format(path, line_no, format!("bad label: {:?}", fields[d])))?;
        let task: usize = if schema.has_task_column {
            fields[d + 1]
                .parse()
                .map_err(|_| Error::format(path, line_no, format!("bad task index: {:?}", fields[d + 1])))?
        } else {
            0
        };
        samples.push(Sample { id: samples.len(), features, label, task });
    }

    if samples.is_empty() {
        return Err(Error::format(path, 1, "dataset contains no samples"));
    }

    let mut by_task: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for s in samples {
        by_task.entry(s.task).or_default().push(s);
    }
    let task_ids: Vec<usize> = by_task.keys().copied().collect();
    for (expected, &got) in task_ids.iter().enumerate() {
        if got != expected {
            return Err(Error::format(
                path,
                1,
                format!("task indices must be contiguous from 0, found {task_ids:?}"),
            ));
        }
    }

    let mut seen_classes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut tasks = Vec::new();
    for (index, train) in by_task {
        let mut classes: Vec<usize> = train.iter().map(|s| s.label).collect();
        classes.sort_unstable();
        classes.dedup();
        for &c in &classes {
            if let Some(other) = seen_classes.insert(c, index) {
                return Err(Error::format(
                    path,
                    1,
                    format!("class {c} appears in tasks {other} and {index}; tasks must be disjoint"),
                ));
            }
        }
        tasks.push(Task { index, classes, train, test: Vec::new() });
    }

    if let Some(k) = declared_classes {
        if seen_classes.len() != k {
            return Err(Error::format(
                path,
                1,
                format!("header declares {k} classes, file contains {}", seen_classes.len()),
            ));
        }
    }
    Ok(tasks)
}

/// Writes the train split of `tasks` in the delimited format accepted by
/// [`load_delimited_dataset`]. Floats use the shortest round-trip encoding.
pub fn save_delimited_dataset(tasks: &[Task], path: &Path, schema: &DatasetSchema) -> Result<()> {
    let mut out = String::new();
    let dim = tasks
        .first()
        .and_then(|t| t.train.first())
        .map(|s| s.features.len())
        .unwrap_or_default();
    let classes: usize = tasks.iter().map(|t| t.classes.len()).sum();
    let _ = writeln!(out, "# dim={dim} classes={classes}");
    for task in tasks {
        for s in &task.train {
            for x in &s.features {
                let _ = write!(out, "{x},");
            }
            let _ = write!(out, "{}", s.label);
            if schema.has_task_column {
                let _ = write!(out, ",{}", s.task);
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads train and test files sharing one schema into a single stream.
/// Test rows get ids offset past the train rows so ids stay unique.
pub fn load_split_dataset(
    train_path: &Path,
    test_path: &Path,
    schema: &DatasetSchema,
) -> Result<Vec<Task>> {
    let mut tasks = load_delimited_dataset(train_path, schema)?;
    let test_tasks = load_delimited_dataset(test_path, schema)?;
    if test_tasks.len() != tasks.len() {
        return Err(Error::invalid(format!(
            "train has {} tasks but test has {}",
            tasks.len(),
            test_tasks.len()
        )));
    }
    let offset: usize = tasks.iter().map(|t| t.train.len()).sum();
    for (task, test_task) in tasks.iter_mut().zip(test_tasks) {
        if test_task.classes != task.classes {
            return Err(Error::invalid(format!(
                "task {}: train classes {:?} differ from test classes {:?}",
                task.index, task.classes, test_task.classes
            )));
        }
        task.test = test_task
            .train
            .into_iter()
            .map(|mut s| {
                s.id += offset;
                s
            })
            .collect();
    }
    Ok(tasks)
}
