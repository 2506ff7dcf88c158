//! `jamsim`: run, fit, check and sweep consensus experiments under jamming.
//!
//! Exit codes: 0 when everything passes, 1 when a check fails, 2 for
//! configuration, input or I/O errors.

mod check;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "jamsim", version, about = "Self-triggered ternary consensus under per-link jamming")]
struct Cli {
    /// Worker threads for fitting and sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a config and write the trace, summary, jamming pattern and fit table.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Fit per-link frequency/duration parameters and PoC certificates.
    Fit {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Write fit.csv here instead of printing to stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Verify a trace written by `run`.
    Check {
        /// Run output directory.
        #[arg(long, value_name = "DIR")]
        trace: PathBuf,
        /// Defaults to the config.json stored with the trace.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Run one experiment per point of a parameter axis.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// NAME=START:STOP:STEP
        #[arg(long, value_name = "SPEC")]
        axis: sweep::Axis,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Run { config, out } => run::cmd_run(&config, &out),
        Command::Fit { config, out } => run::cmd_fit(&config, out.as_deref()),
        Command::Check { trace, config } => check::cmd_check(&trace, config.as_deref()),
        Command::Sweep { config, axis, out } => sweep::cmd_sweep(&config, &axis, &out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
