//! `sdc` command-line driver: bound-verification and order-fitting runs over
//! `n`-sweeps, with CSV data and JSON pass/fail summaries.
//!
//! Exit status: 0 when every assertion held, 1 when a bound or order
//! assertion failed, 2 on configuration or validation errors.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use clap::{Parser, Subcommand};
use config::{ExperimentConfig, Flags};
use sdc_core::analysis::SweepKind;
use std::ffi::OsString;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sdc_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sdc", version, about = "Bound and order experiments for the complex Szász-Durrmeyer-Chlodowsky operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moment table, oracle deltas and moment-bound margins.
    Moments(Flags),
    /// Upper-estimate sweep with order fit.
    Converge(Flags),
    /// Voronovskaja-residual sweep with order fit.
    Voronovskaja(Flags),
    /// Cauchy-derivative sweep.
    Derivative(Flags),
    /// Every suite into one output directory.
    VerifyAll(Flags),
}

fn dispatch(command: &Command) -> Result<bool, CliError> {
    match command {
        Command::Moments(f) => commands::moments(&ExperimentConfig::resolve(f)?),
        Command::Converge(f) => commands::sweep_command(&ExperimentConfig::resolve(f)?, SweepKind::Upper),
        Command::Voronovskaja(f) => commands::sweep_command(&ExperimentConfig::resolve(f)?, SweepKind::Voronovskaja),
        Command::Derivative(f) => {
            let cfg = ExperimentConfig::resolve(f)?;
            let kind = SweepKind::Derivative { p: cfg.derivative_order, r1: cfg.r1 };
            commands::sweep_command(&cfg, kind)
        }
        Command::VerifyAll(f) => commands::verify_all(&ExperimentConfig::resolve(f)?),
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
