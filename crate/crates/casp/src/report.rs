//! Result rows and their CSV/JSON serialization.
//!
//! Output files are part of the determinism contract: rows are sorted by
//! (method, seed), reals carry 6 decimal digits, and repeated invocations
//! must produce byte-identical files. The `wall_ms` column is reserved and
//! always 0 for that reason; measured timings go to stderr instead.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "method,seed,buffer,tasks,avg_end_acc,avg_end_forget,ood_acc,wall_ms";

/// One experiment outcome, shaped like one row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub seed: u64,
    pub buffer: usize,
    pub tasks: usize,
    pub avg_end_acc: f64,
    /// Undefined for single-task runs; may be negative (backward transfer).
    pub avg_end_forget: Option<f64>,
    pub ood_acc: Option<f64>,
    /// Reserved; always 0 so outputs stay byte-reproducible.
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown output format: {other:?}"))),
        }
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn sorted(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut out = rows.to_vec();
    out.sort_by(|a, b| a.method.cmp(&b.method).then(a.seed.cmp(&b.seed)));
    out
}

fn csv_body(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted(rows) {
        let _ = write!(out, "{},{},{},{},{:.6},", r.method, r.seed, r.buffer, r.tasks, r.avg_end_acc);
        if let Some(f) = r.avg_end_forget {
            let _ = write!(out, "{f:.6}");
        }
        out.push(',');
        if let Some(o) = r.ood_acc {
            let _ = write!(out, "{o:.6}");
        }
        let _ = writeln!(out, ",{}", r.wall_ms);
    }
    out
}

fn json_body(rows: &[ResultRow]) -> String {
    let rounded: Vec<ResultRow> = sorted(rows)
        .into_iter()
        .map(|mut r| {
            r.avg_end_acc = round6(r.avg_end_acc);
            r.avg_end_forget = r.avg_end_forget.map(round6);
            r.ood_acc = r.ood_acc.map(round6);
            r
        })
        .collect();
    let mut body = serde_json::to_string_pretty(&rounded).expect("rows are serializable");
    body.push('\n');
    body
}

/// Serializes rows (sorted by method, then seed) to a writer.
pub fn write_results<W: Write>(rows: &[ResultRow], mut w: W, format: OutputFormat) -> std::io::Result<()> {
    let body = match format {
        OutputFormat::Csv => csv_body(rows),
        OutputFormat::Json => json_body(rows),
    };
    w.write_all(body.as_bytes())
}

/// Writes rows to a file; empty input still yields the CSV header.
pub fn emit_results(rows: &[ResultRow], path: &Path, format: OutputFormat) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results(rows, file, format).map_err(|e| Error::io(path, e))
}
