//! Command-line experiment driver.
//!
//! Subcommands: `run` (configured method over the seed list), `grid`
//! (class-strategy x sample-strategy sweep), `subset` (offline retention
//! study). Progress and timing go to stderr; result rows go to `--out` or
//! stdout and are byte-reproducible for identical invocations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use casp::config::{self, ExperimentConfig, SubsetCategory};
use casp::report::{self, OutputFormat, ResultRow};
use casp::runner;

#[derive(Parser)]
#[command(name = "casp", version, about = "Replay-based class-incremental learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured method (er or er-casp) for every seed.
    Run(CommonArgs),
    /// Run the class-strategy x sample-strategy grid for every seed.
    Grid(CommonArgs),
    /// Offline subset-retention study for every seed.
    Subset(SubsetArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (key = value lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed list: "7", "0,3,9", or inclusive range "0..19". Overrides the config.
    #[arg(long)]
    seeds: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write each task's surrogate confidence trace next to --out.
    #[arg(long)]
    dump_traces: bool,
    /// Write the final buffer snapshot next to --out.
    #[arg(long)]
    dump_buffer: bool,
    /// Gaussian noise scale for the shifted test evaluation. Overrides the config.
    #[arg(long)]
    ood_sigma: Option<f64>,
}

#[derive(Args)]
struct SubsetArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fraction of the training pool to retain. Overrides the config.
    #[arg(long)]
    fraction: Option<f64>,
    /// simple | hard | challenging | random. Overrides the config.
    #[arg(long)]
    category: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn real_main() -> casp::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Subset(args) => cmd_subset(args),
    }
}

fn load_config(args: &CommonArgs) -> casp::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => config::parse_config_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(spec) = &args.seeds {
        cfg.seeds = config::parse_seed_spec(spec)?;
    }
    if let Some(sigma) = args.ood_sigma {
        cfg.ood_sigma = Some(sigma);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// "results.csv" -> "results.trace.s3.t1.csv" and friends.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn write_rows(rows: &[ResultRow], args: &CommonArgs) -> casp::Result<()> {
    match &args.out {
        Some(path) => report::emit_results(rows, path, args.format.into()),
        None => {
            let stdout = std::io::stdout();
            report::write_results(rows, stdout.lock(), args.format.into())
                .map_err(|e| casp::Error::io("<stdout>", e))
        }
    }
}

fn cmd_run(args: CommonArgs) -> casp::Result<()> {
    let cfg = load_config(&args)?;
    if (args.dump_traces || args.dump_buffer) && args.out.is_none() {
        return Err(casp::Error::invalid("--dump-traces/--dump-buffer require --out"));
    }
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let start = Instant::now();
        let art = runner::run_method_artifacts(&cfg, seed)?;
        eprintln!(
            "run method={} seed={} aea={:.4} aef={} ({} ms)",
            art.row.method,
            seed,
            art.row.avg_end_acc,
            art.row
                .avg_end_forget
                .map(|f| format!("{f:.4}"))
                .unwrap_or_else(|| "-".into()),
            start.elapsed().as_millis()
        );
        if let Some(out) = &args.out {
            if args.dump_traces {
                for (task, trace) in &art.traces {
                    let path = sibling(out, &format!("trace.s{seed}.t{task}"));
                    let file =
                        std::fs::File::create(&path).map_err(|e| casp::Error::io(&path, e))?;
                    trace
                        .write_delimited(std::io::BufWriter::new(file))
                        .map_err(|e| casp::Error::io(&path, e))?;
                }
                if art.traces.is_empty() {
                    eprintln!("note: no traces to dump (method without a surrogate)");
                }
            }
            if args.dump_buffer {
                let path = sibling(out, &format!("buffer.s{seed}"));
                let file = std::fs::File::create(&path).map_err(|e| casp::Error::io(&path, e))?;
                art.buffer
                    .write_snapshot(std::io::BufWriter::new(file))
                    .map_err(|e| casp::Error::io(&path, e))?;
            }
        }
        rows.push(art.row);
    }
    summarize(&rows);
    write_rows(&rows, &args)
}

fn cmd_grid(args: CommonArgs) -> casp::Result<()> {
    let cfg = load_config(&args)?;
    if args.dump_traces || args.dump_buffer {
        eprintln!("note: dumps are only produced by `run`; ignoring");
    }
    let start = Instant::now();
    let rows = runner::run_grid(
        &cfg,
        &cfg.grid_class_strategies,
        &cfg.grid_sample_strategies,
        &cfg.seeds,
    )?;
    eprintln!(
        "grid: {} cells x {} seeds = {} rows ({} ms)",
        cfg.grid_class_strategies.len() * cfg.grid_sample_strategies.len(),
        cfg.seeds.len(),
        rows.len(),
        start.elapsed().as_millis()
    );
    summarize(&rows);
    write_rows(&rows, &args)
}

fn cmd_subset(args: SubsetArgs) -> casp::Result<()> {
    let cfg = load_config(&args.common)?;
    if args.common.dump_traces || args.common.dump_buffer {
        eprintln!("note: dumps are only produced by `run`; ignoring");
    }
    let fraction = args.fraction.unwrap_or(cfg.subset_fraction);
    let category: SubsetCategory = match &args.category {
        Some(s) => s.parse()?,
        None => cfg.subset_category,
    };
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let start = Instant::now();
        let row = runner::run_subset_study(&cfg, seed, fraction, category)?;
        eprintln!(
            "subset category={} fraction={} seed={} acc={:.4} kept={} ({} ms)",
            category.label(),
            fraction,
            seed,
            row.avg_end_acc,
            row.buffer,
            start.elapsed().as_millis()
        );
        rows.push(row);
    }
    summarize(&rows);
    write_rows(&rows, &args.common)
}

/// Per-method mean over seeds, printed to stderr.
fn summarize(rows: &[ResultRow]) {
    use std::collections::BTreeMap;
    let mut by_method: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        by_method.entry(&r.method).or_default().push(r);
    }
    let mut err = std::io::stderr();
    for (method, group) in by_method {
        let n = group.len() as f64;
        let acc = group.iter().map(|r| r.avg_end_acc).sum::<f64>() / n;
        let forget: Option<f64> = group
            .iter()
            .map(|r| r.avg_end_forget)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / n);
        let _ = writeln!(
            err,
            "summary method={} seeds={} mean_aea={:.4} mean_aef={}",
            method,
            group.len(),
            acc,
            forget.map(|f| format!("{f:.4}")).unwrap_or_else(|| "-".into())
        );
    }
}
