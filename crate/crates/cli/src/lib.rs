//! Command-line front end: single runs and multi-seed strategy comparisons
//! on the synthetic benchmarks.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use ubo_core::benchlab::{aggregate, Benchmark, ExperimentSettings};
use ubo_core::engine::{run, RunTrace, Strategy};
use ubo_core::UboError;

pub use config::Config;
use output::{BoxSummary, RunSummary};

/// Environment variable that takes precedence over `--out`.
pub const OUT_DIR_ENV: &str = "UBO_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<UboError> for CliError {
    fn from(e: UboError) -> Self {
        match e {
            UboError::InvalidArgument(m) => CliError::Config(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ubo", version, about = "Bayesian optimisation with an unknown search space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One (strategy, benchmark, seed) run; writes a trace CSV and a summary JSON.
    Run(CommonArgs),
    /// Strategies × seeds on one benchmark; writes per-run traces and an aggregate CSV.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overridden by UBO_OUT_DIR).
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Strategy name; `compare` accepts a comma-separated list.
    #[arg(long, value_name = "NAME")]
    pub strategy: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub benchmark: Option<String>,
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
    /// Worker threads for `compare` (default: all cores).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    /// Configuration file (or defaults) with command-line overrides applied.
    pub fn resolve(&self, multi: bool) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(b) = &self.benchmark {
            c.benchmark = b.clone();
        }
        if let Some(s) = &self.strategy {
            if multi {
                c.strategies = s.split(',').map(|v| v.trim().to_string()).collect();
            } else {
                c.strategy = s.clone();
            }
        }
        if let Some(r) = self.reps {
            c.reps = r;
        }
        Ok(c)
    }

    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.out.clone(),
        }
    }
}

fn run_stem(benchmark: &Benchmark, strategy: Strategy, seed: u64) -> String {
    format!("{benchmark}-{strategy}-seed{seed}")
}

fn write_run(dir: &Path, config: &Config, benchmark: &Benchmark, trace: &RunTrace<f64>) -> Result<PathBuf, CliError> {
    let stem = run_stem(benchmark, trace.strategy, trace.seed);
    let csv = dir.join(format!("{stem}.csv"));
    output::write_atomic(&csv, &output::trace_csv(trace))?;
    let first = trace.records.first();
    let initial_box = BoxSummary {
        lo: first.map(|r| r.lo.clone()).unwrap_or_default(),
        hi: first.map(|r| r.hi.clone()).unwrap_or_default(),
    };
    let mut resolved = config.clone();
    resolved.strategy = trace.strategy.name().to_string();
    resolved.seed = trace.seed;
    let summary = RunSummary {
        config: resolved,
        benchmark: benchmark.to_string(),
        strategy: trace.strategy.name().to_string(),
        seed: trace.seed,
        dim: trace.dim,
        initial_box,
        final_box: BoxSummary { lo: trace.final_box.lo().to_vec(), hi: trace.final_box.hi().to_vec() },
        evaluations: trace.records.len(),
        expansions: trace.expansions,
        recommendation: trace.recommendation.clone(),
        recommendation_value: trace.recommendation_value,
        true_max: benchmark.max_value(),
        complete: trace.is_complete(),
        incomplete_reason: trace.incomplete.clone(),
        trace_file: format!("{stem}.csv"),
    };
    output::write_atomic(&dir.join(format!("{stem}.json")), &output::summary_json(&summary))?;
    Ok(csv)
}

fn cmd_run(args: &CommonArgs) -> Result<(), CliError> {
    let config = args.resolve(false)?;
    let settings: ExperimentSettings<f64> = config.settings()?;
    let benchmark = config.benchmark()?;
    let strategy = config.strategy()?;
    let run_config = settings.run_config(&benchmark, strategy, config.seed);
    let trace = run(&run_config, &benchmark)?;
    let out = args.out_dir();
    let csv = write_run(&out, &config, &benchmark, &trace)?;
    println!(
        "{benchmark} {strategy} seed {}: best {} after {} evaluations, {} expansions -> {}",
        config.seed,
        trace.recommendation_value,
        trace.records.len(),
        trace.expansions,
        csv.display()
    );
    match &trace.incomplete {
        Some(reason) => Err(CliError::Numeric(format!("run stopped early: {reason}"))),
        None => Ok(()),
    }
}

fn cmd_compare(args: &CommonArgs) -> Result<(), CliError> {
    let config = args.resolve(true)?;
    let settings = config.settings()?;
    let benchmark = config.benchmark()?;
    let strategies = config.strategies()?;
    if config.reps == 0 {
        return Err(CliError::Config("reps: must be >= 1".into()));
    }
    if args.jobs == Some(0) {
        return Err(CliError::Config("jobs: must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..config.reps as u64).map(|i| config.seed + i).collect();
    let out = args.out_dir();
    let runs_dir = out.join("runs");

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    let traces: Vec<Vec<RunTrace<f64>>> = pool.install(|| {
        strategies
            .iter()
            .map(|&s| {
                seeds
                    .par_iter()
                    .map(|&seed| run(&settings.run_config(&benchmark, s, seed), &benchmark))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut table = String::from(output::aggregate_header());
    table.push('\n');
    let mut incomplete = Vec::new();
    for (strategy, runs) in strategies.iter().zip(&traces) {
        for t in runs {
            write_run(&runs_dir, &config, &benchmark, t)?;
            if let Some(reason) = &t.incomplete {
                incomplete.push(format!("{strategy} seed {}: {reason}", t.seed));
            }
        }
        if runs.iter().any(|t| !t.is_complete()) {
            continue;
        }
        let curves: Vec<Vec<f64>> = runs.iter().map(|t| t.best_curve()).collect();
        let points = aggregate(&curves)?;
        output::aggregate_rows(&mut table, &benchmark.to_string(), strategy.name(), &points);
        if let Some(last) = points.last() {
            println!("{benchmark} {strategy}: final mean best {} (stderr {}) over {} reps", last.mean, last.stderr, runs.len());
        }
    }
    let path = out.join(format!("compare-{benchmark}.csv"));
    output::write_atomic(&path, &table)?;
    println!("aggregate -> {}", path.display());
    if incomplete.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{} run(s) stopped early: {}", incomplete.len(), incomplete.join("; "))))
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ubo: {e}");
            e.exit_code()
        }
    }
}
