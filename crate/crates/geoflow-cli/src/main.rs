//! Command-line entry point. Subcommands map onto the library pipelines
//! and failures map onto exit codes: 2 for configuration or input
//! problems, 3 for solver failures, 4 for invariant violations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geoflow_cli::config::{ExperimentConfig, Tolerances};
use geoflow_cli::{check, compare, run, sweep, CliError};

#[derive(Parser)]
#[command(name = "geoflow", version, about = "Curve evolution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the traveling wave for the configured angles and write it.
    Wave(RunArgs),
    /// Evolve the configured initial data, streaming diagnostics.
    Evolve(RunArgs),
    /// Run both solvers from the same initial curve and report the gap.
    Compare(RunArgs),
    /// Run every config in a JSON array, in parallel, with an index.
    /// GEOFLOW_THREADS caps the worker count.
    Sweep(SweepArgs),
    /// Validate a snapshot file against the state invariants.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured grid resolution.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Overrides the configured time horizon.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON array of experiment configs.
    #[arg(long)]
    config: PathBuf,
    /// Root directory for per-run outputs and the index.
    #[arg(long, default_value = "sweep_out")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Snapshot file to validate.
    file: PathBuf,
    /// Optional experiment config supplying tolerance overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Wave(args) => {
            let cfg = load_with_overrides(&args)?;
            run::wave_command(&cfg).map(|_| ())
        }
        Command::Evolve(args) => {
            let cfg = load_with_overrides(&args)?;
            run::evolve_command(&cfg).map(|_| ())
        }
        Command::Compare(args) => {
            let cfg = load_with_overrides(&args)?;
            compare::compare_command(&cfg).map(|_| ())
        }
        Command::Sweep(args) => {
            let cap = thread_cap_from_env()?;
            sweep::sweep_command(&args.config, &args.out, cap).map(|_| ())
        }
        Command::Check(args) => {
            let tolerances = match &args.config {
                Some(path) => ExperimentConfig::load(path)?.tolerances,
                None => Tolerances::default(),
            };
            check::check_command(&args.file, &tolerances).map(|_| ())
        }
    }
}

fn load_with_overrides(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.apply_overrides(args.out.clone(), args.grid_n, args.t_end)?;
    Ok(cfg)
}

fn thread_cap_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("GEOFLOW_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Config(format!("GEOFLOW_THREADS must be a positive integer, got {raw}"))
            })?;
            if n == 0 {
                return Err(CliError::Config(
                    "GEOFLOW_THREADS must be a positive integer, got 0".into(),
                ));
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("GEOFLOW_THREADS: {e}"))),
    }
}
