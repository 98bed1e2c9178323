//! `frontier`: robust linear optimization frontiers from the command line.
//!
//! Subcommands: `frontier-exact` (per-radius sweep), `frontier-ppm`
//! (proximal trajectory), `compare` (both on one instance, with per-radius
//! matching error), `saddle` (uncertain-constraint problems), `sandwich`
//! (random-polyhedron Monte Carlo), `portfolio` (returns-data experiment).
//!
//! Configuration comes from a flat `key = value` file (`--config`) with
//! flag overrides winning (`--set key=value`, plus dedicated flags).
//! Exit codes: 0 success, 1 usage or validation error, 2 solver failure.

mod commands;
mod config;
mod instance;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Run};
use config::Settings;

#[derive(Parser)]
#[command(name = "frontier", version, about = "Robust frontier experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: jsonl (default) or csv.
    #[arg(long)]
    format: Option<String>,
    /// Seed for generators and reproducibility stamping.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap; FRONTIER_PPM_THREADS is the environment fallback.
    #[arg(long)]
    threads: Option<usize>,
    /// Extra key=value overrides (repeatable, win over the config file).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Default)]
struct SandwichArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Constraint count of each sampled polyhedron.
    #[arg(long)]
    m: Option<usize>,
    /// Dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Radius grid, comma separated.
    #[arg(long)]
    alphas: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Pareto frontier: one robust solve per radius.
    FrontierExact(CommonArgs),
    /// Approximate frontier from one proximal point trajectory.
    FrontierPpm(CommonArgs),
    /// Run both on the same instance and report per-radius matching error.
    Compare(CommonArgs),
    /// Uncertain-constraint problems: saddle oracle vs direct solve.
    Saddle(CommonArgs),
    /// Random-polyhedron sandwich Monte Carlo.
    Sandwich(SandwichArgs),
    /// Returns-data experiment: in-sample frontiers, out-of-sample scoring.
    Portfolio(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let outcome = match &cli.command {
        Command::FrontierExact(args) => prepared(args).and_then(|r| {
            commands::run_frontier_exact(&r)
        }),
        Command::FrontierPpm(args) => prepared(args).and_then(|r| commands::run_frontier_ppm(&r)),
        Command::Compare(args) => prepared(args).and_then(|r| commands::run_compare(&r)),
        Command::Saddle(args) => prepared(args).and_then(|r| commands::run_saddle(&r)),
        Command::Sandwich(args) => prepared_sandwich(args).and_then(|r| commands::run_sandwich(&r)),
        Command::Portfolio(args) => prepared(args).and_then(|r| commands::run_portfolio(&r)),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Merge config file and flags, cap threads, and build the run context.
fn prepared(args: &CommonArgs) -> Result<Run, CliError> {
    init_threads(args.threads);
    let mut settings = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    for pair in &args.set {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--set expects KEY=VALUE, got {pair:?}"
            )));
        };
        settings.override_with(k.trim(), Some(v.trim().to_string()));
    }
    settings.override_with("out", args.out.as_ref().map(|p| p.display().to_string()));
    settings.override_with("format", args.format.clone());
    settings.override_with("seed", args.seed.map(|s| s.to_string()));
    Ok(Run::new(settings)?)
}

fn prepared_sandwich(args: &SandwichArgs) -> Result<Run, CliError> {
    let mut run = prepared(&args.common)?;
    run.settings
        .override_with("m", args.m.map(|v| v.to_string()));
    run.settings
        .override_with("n", args.n.map(|v| v.to_string()));
    run.settings
        .override_with("trials", args.trials.map(|v| v.to_string()));
    run.settings.override_with("alphas", args.alphas.clone());
    Ok(Run::new(run.settings)?)
}

/// Honor --threads, then FRONTIER_PPM_THREADS, then the machine default.
fn init_threads(flag: Option<usize>) {
    #[cfg(feature = "parallel")]
    {
        let from_env = std::env::var("FRONTIER_PPM_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok());
        if let Some(threads) = flag.or(from_env) {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = flag;
    }
}
