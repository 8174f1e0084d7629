//! Experiment configuration and its flat key-value file format.
//!
//! Files hold one `key = value` pair per line with `#` comments. Unknown
//! keys are rejected so typos fail fast. Every key has the default from
//! the desk-scale profile; see the README for the schema.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::SgdConfig;
use crate::policy::{CaspConfig, ClassStrategy, SampleStrategy};
use crate::stream::StreamConfig;

/// Which training protocol `run` executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Er,
    ErCasp,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Er => "er",
            Method::ErCasp => "er-casp",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "er" => Ok(Method::Er),
            "er-casp" | "er+casp" | "ercasp" => Ok(Method::ErCasp),
            other => Err(Error::invalid(format!("unknown method: {other:?}"))),
        }
    }
}

/// Which subset the retention study trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetCategory {
    Simple,
    Hard,
    Challenging,
    Random,
}

impl SubsetCategory {
    pub fn label(&self) -> &'static str {
        match self {
            SubsetCategory::Simple => "simple",
            SubsetCategory::Hard => "hard",
            SubsetCategory::Challenging => "challenging",
            SubsetCategory::Random => "random",
        }
    }
}

impl std::str::FromStr for SubsetCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simple" => Ok(SubsetCategory::Simple),
            "hard" => Ok(SubsetCategory::Hard),
            "challenging" => Ok(SubsetCategory::Challenging),
            "random" => Ok(SubsetCategory::Random),
            other => Err(Error::invalid(format!("unknown subset category: {other:?}"))),
        }
    }
}

/// Full description of an experiment; the defaults are the desk-scale
/// profile (5 tasks x 2 classes, 200+200 samples/class, buffer 100).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub stream: StreamConfig,
    /// Replaces the synthetic stream when set (paired train/test files).
    pub dataset_train: Option<PathBuf>,
    pub dataset_test: Option<PathBuf>,
    pub dataset_task_column: bool,
    pub shuffle_class_order: bool,
    pub buffer_capacity: usize,
    /// Stream minibatch size b.
    pub batch_size: usize,
    /// Replay batch size q.
    pub replay_size: usize,
    pub cl_hidden: usize,
    /// Main-model optimizer; `epochs` is the per-task pass count.
    pub cl_sgd: SgdConfig,
    pub casp: CaspConfig,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub ood_sigma: Option<f64>,
    pub subset_fraction: f64,
    pub subset_category: SubsetCategory,
    pub grid_class_strategies: Vec<ClassStrategy>,
    pub grid_sample_strategies: Vec<SampleStrategy>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            stream: StreamConfig::default(),
            dataset_train: None,
            dataset_test: None,
            dataset_task_column: false,
            shuffle_class_order: true,
            buffer_capacity: 100,
            batch_size: 10,
            replay_size: 10,
            cl_hidden: 32,
            cl_sgd: SgdConfig { epochs: 5, ..SgdConfig::default() },
            casp: CaspConfig::default(),
            method: Method::ErCasp,
            seeds: vec![0],
            ood_sigma: None,
            subset_fraction: 0.1,
            subset_category: SubsetCategory::Challenging,
            grid_class_strategies: vec![
                ClassStrategy::Challenging,
                ClassStrategy::Hard,
                ClassStrategy::Simple,
                ClassStrategy::Balanced,
                ClassStrategy::NoPolicy,
            ],
            grid_sample_strategies: vec![
                SampleStrategy::Random,
                SampleStrategy::Hard,
                SampleStrategy::Simple,
                SampleStrategy::Challenging,
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn cl_epochs(&self) -> usize {
        self.cl_sgd.epochs
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset_train.is_none() {
            self.stream.validate()?;
        }
        if self.dataset_train.is_some() != self.dataset_test.is_some() {
            return Err(Error::invalid(
                "dataset_train and dataset_test must be set together",
            ));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::invalid("buffer_capacity must be >= 1"));
        }
        if self.batch_size == 0 || self.replay_size == 0 {
            return Err(Error::invalid("batch sizes must be >= 1"));
        }
        if self.cl_hidden == 0 {
            return Err(Error::invalid("cl_hidden must be >= 1"));
        }
        self.cl_sgd.validate()?;
        self.casp.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::invalid("seed list must be nonempty"));
        }
        if !(self.subset_fraction > 0.0 && self.subset_fraction <= 1.0) {
            return Err(Error::invalid("subset_fraction must lie in (0, 1]"));
        }
        if let Some(sigma) = self.ood_sigma {
            if !sigma.is_finite() || sigma < 0.0 {
                return Err(Error::invalid("ood_sigma must be finite and >= 0"));
            }
        }
        if self.grid_class_strategies.is_empty() || self.grid_sample_strategies.is_empty() {
            return Err(Error::invalid("grid strategy lists must be nonempty"));
        }
        Ok(())
    }
}

/// Parses `"7"`, `"0,3,9"`, or the inclusive range `"0..19"`.
pub fn parse_seed_spec(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::invalid("empty seed list"));
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad seed range start: {lo:?}")))?;
        let hi: u64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| Error::invalid(format!("bad seed range end: {hi:?}")))?;
        if hi < lo {
            return Err(Error::invalid(format!("seed range {lo}..{hi} is empty")));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad seed: {:?}", s.trim())))
        })
        .collect()
}

fn parse_list<T: std::str::FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value.split(',').map(|s| s.trim().parse()).collect()
}

fn parse_bool(value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::invalid(format!("expected a boolean, got {other:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("key {key}: bad value {value:?}")))
}

/// Reads a config file, starting from the defaults and applying each key.
pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = ExperimentConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, line_no, format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut cfg, key, value)
            .map_err(|e| Error::format(path, line_no, e.to_string()))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "tasks" => cfg.stream.tasks = parse_num(value, key)?,
        "classes_per_task" => cfg.stream.classes_per_task = parse_num(value, key)?,
        "train_per_class" => cfg.stream.train_per_class = parse_num(value, key)?,
        "test_per_class" => cfg.stream.test_per_class = parse_num(value, key)?,
        "feature_dim" => cfg.stream.feature_dim = parse_num(value, key)?,
        "center_radius" => cfg.stream.center_radius = parse_num(value, key)?,
        "spreads" => {
            cfg.stream.spreads = value
                .split(',')
                .map(|s| parse_num(s, key))
                .collect::<Result<Vec<f64>>>()?
        }
        "stream_seed" => cfg.stream.seed = parse_num(value, key)?,
        "dataset_train" => cfg.dataset_train = Some(PathBuf::from(value)),
        "dataset_test" => cfg.dataset_test = Some(PathBuf::from(value)),
        "dataset_task_column" => cfg.dataset_task_column = parse_bool(value)?,
        "shuffle_class_order" => cfg.shuffle_class_order = parse_bool(value)?,
        "buffer_capacity" => cfg.buffer_capacity = parse_num(value, key)?,
        "batch_size" => cfg.batch_size = parse_num(value, key)?,
        "replay_size" => cfg.replay_size = parse_num(value, key)?,
        "cl_epochs" => cfg.cl_sgd.epochs = parse_num(value, key)?,
        "cl_hidden" => cfg.cl_hidden = parse_num(value, key)?,
        "cl_lr" => cfg.cl_sgd.learning_rate = parse_num(value, key)?,
        "cl_momentum" => cfg.cl_sgd.momentum = parse_num(value, key)?,
        "cl_weight_decay" => cfg.cl_sgd.weight_decay = parse_num(value, key)?,
        "cl_cosine_annealing" => cfg.cl_sgd.cosine_annealing = parse_bool(value)?,
        "surrogate_epochs" => cfg.casp.sgd.epochs = parse_num(value, key)?,
        "surrogate_hidden" => cfg.casp.hidden_dim = parse_num(value, key)?,
        "surrogate_batch_size" => cfg.casp.batch_size = parse_num(value, key)?,
        "surrogate_lr" => cfg.casp.sgd.learning_rate = parse_num(value, key)?,
        "surrogate_momentum" => cfg.casp.sgd.momentum = parse_num(value, key)?,
        "surrogate_weight_decay" => cfg.casp.sgd.weight_decay = parse_num(value, key)?,
        "surrogate_cosine_annealing" => cfg.casp.sgd.cosine_annealing = parse_bool(value)?,
        "class_strategy" => cfg.casp.class_strategy = value.parse()?,
        "sample_strategy" => cfg.casp.sample_strategy = value.parse()?,
        "include_epoch0" => cfg.casp.include_epoch0 = parse_bool(value)?,
        "casp_seed" => cfg.casp.seed = parse_num(value, key)?,
        "method" => cfg.method = value.parse()?,
        "seeds" => cfg.seeds = parse_seed_spec(value)?,
        "ood_sigma" => cfg.ood_sigma = Some(parse_num(value, key)?),
        "subset_fraction" => cfg.subset_fraction = parse_num(value, key)?,
        "subset_category" => cfg.subset_category = value.parse()?,
        "grid_class_strategies" => cfg.grid_class_strategies = parse_list(value)?,
        "grid_sample_strategies" => cfg.grid_sample_strategies = parse_list(value)?,
        other => return Err(Error::invalid(format!("unknown key: {other:?}"))),
    }
    Ok(())
}
