//! `wnprop`: propagator tables, verification suites and kernel operations.
//!
//! Exit codes: 0 ok, 1 verification failed, 2 invalid config, 3 engine tolerance
//! failure, 4 domain violation. `WNPROP_THREADS` sets the worker count.

mod config;
mod error;
mod kernels;
mod output;
mod propagate;
mod verify;

use clap::{Parser, Subcommand};
use error::{CliError, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "wnprop", version, about = "Feynman propagator engines and invariant checks")]
struct Cli {
    /// Override the seed of Monte Carlo engines.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write propagator.csv and report.json for one engine.
    Propagate {
        /// Experiment config (JSON).
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run an invariant suite and print a JSON report.
    Verify {
        /// biorthogonality | ccr | ehrenfest | schrodinger | theta | doss.
        #[arg(short, long)]
        suite: String,
        /// Suite config (JSON).
        #[arg(short, long)]
        config: PathBuf,
        /// Also write the report (and tables) into this directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apply a chaos-kernel operation to serialized vectors.
    Kernels {
        /// Kernel config (JSON).
        #[arg(short, long)]
        config: PathBuf,
    },
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("WNPROP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("WNPROP_THREADS = `{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    threads()?;
    match cli.command {
        Command::Propagate { config, out } => {
            let cfg = config::load(&config)?;
            propagate::run(&cfg, cli.seed, &out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite, config, out } => {
            let report = verify::run(&suite, &config, cli.seed, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?);
            Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Kernels { config } => {
            kernels::run(&config)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
