//! Desk-scale class-incremental learning simulator.
//!
//! A small feed-forward classifier trains on a stream of disjoint tasks with
//! experience replay from a fixed-capacity reservoir buffer. After each task,
//! an optional class-adaptive policy retraces the task with a surrogate
//! model, scores classes and samples by the variability of their softmax
//! confidence across epochs, and rewrites the task's buffer share: more slots
//! for volatile ("challenging") classes, and within each class the samples
//! the model was least certain about. The runner reports the accuracy matrix,
//! average end accuracy/forgetting, and optional noise-shifted accuracy, all
//! byte-reproducible given (config, seed).

pub mod analytics;
pub mod buffer;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stream;

pub use error::{Error, Result};
