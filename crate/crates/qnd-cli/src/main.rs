//! Command-line front end for the propagator library: evaluate closed-form
//! kernels over time grids, verify them against brute-force oracles, trace
//! coherence decay, and emit structural check reports.
//!
//! Exit codes: 0 = success/pass, 1 = usage or configuration error,
//! 2 = verification failure, 3 = convergence or truncation failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qnd::QndError;

use config::{Mode, Overrides};

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Analytic system-reservoir propagators: kernel grids, oracle \
             verification, dephasing curves, structure reports"
)]
struct Cli {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Computation mode; overrides the config's `mode` field.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the seed for randomized verification draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the pass/fail tolerance for verify/dephasing/structure modes.
    #[arg(long)]
    tol: Option<f64>,
}

/// Everything that can stop a run, sorted by exit code.
pub enum Failure {
    /// Unusable flags or configuration.
    Config(String),
    /// A computation gave up (convergence, truncation, backend).
    Compute(QndError),
    /// Output files could not be written.
    Io(std::io::Error),
}

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFICATION_FAILED: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests land here too; only real usage errors
            // take the config exit code.
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides { mode: cli.mode, seed: cli.seed, tol: cli.tol };
    let resolved = match config::load(&cli.config, &overrides) {
        Ok(resolved) => resolved,
        Err(failure) => return fail(failure),
    };
    match run::run(&resolved, &cli.out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION_FAILED),
        Err(failure) => fail(failure),
    }
}

fn fail(failure: Failure) -> ExitCode {
    match failure {
        Failure::Config(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Failure::Compute(e) => {
            eprintln!("error: {e}");
            match e {
                QndError::Convergence { .. } | QndError::TruncationInadequate { .. } => {
                    ExitCode::from(EXIT_NO_CONVERGENCE)
                }
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
        Failure::Io(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
