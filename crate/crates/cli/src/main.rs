//! `driftbound`: simulate a configured scenario, build its decay
//! certificate, and check that the measured trajectory stays under the
//! certified envelope.
//!
//! Exit status is 0 when the run passes, 1 when a hypothesis or a
//! domination check fails, and 2 on configuration or parse errors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::manifest::Diagnostic;

#[derive(Debug, Parser)]
#[command(name = "driftbound", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Reserved; every code path is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write timeseries.csv.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build the certificate selected by `certify.mode` and write
    /// certificate.json.
    Certify {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Envelope sampling step (default: horizon / 100).
        #[arg(long)]
        envelope_dt: Option<f64>,
    },
    /// Simulate, certify, and write domination.json comparing the two.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        envelope_dt: Option<f64>,
        /// Allowed excess of the measured value over the bound.
        #[arg(long, default_value_t = 2e-3)]
        slack: f64,
    },
    /// Condition report for the closed-form drift/decay families.
    Families {
        /// Optional JSON file with `c0`, `d`, `sweep` and `conditions`.
        params: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(m) => {
            println!("{}", m.summary);
            if m.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            let diag = Diagnostic::from_error(&err);
            eprintln!("{}", serde_json::to_string(&diag).unwrap_or_else(|_| err.to_string()));
            let code = diag.exit_code();
            if code == 1 {
                commands::record_failure(&cli, diag);
            }
            ExitCode::from(code)
        }
    }
}
