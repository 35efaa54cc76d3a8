//! Command-line front end for `fracsteady`: JSON configuration, subcommand
//! dispatch, parameter sweeps and CSV/JSON/SVG output.

// `!(x > y)` is used on purpose so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod problem;
pub mod svg;
pub mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::RunContext;
use crate::config::{RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(name = "fracsteady", version, about = "Steady states of a fractional logistic model with grazing and harvesting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration; every section is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the assembled operator as whitespace-separated rows.
    #[arg(long, global = true)]
    pub dump_operator: Option<PathBuf>,
    /// Sweep worker threads, overriding `workers`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Principal eigenpair: eig.csv, eig.json.
    Eig,
    /// Torsion function against its closed form: torsion.csv, torsion.json.
    Torsion,
    /// Thresholds, sub/supersolution checks and monotone solve.
    Solve,
    /// Existence map over two parameters: map.csv, map.json, map.svg.
    Sweep,
    /// Run the invariant checks and print a pass/fail table.
    Verify,
}

/// Runs the parsed command; `Ok(false)` means an assertion failed.
pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = RunContext {
        out: cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone()),
        dump_operator: cli.dump_operator.clone(),
        workers: cli.workers.map(|w| w as usize),
        cfg,
    };
    match cli.command {
        Command::Eig => commands::eig(&ctx),
        Command::Torsion => commands::torsion(&ctx),
        Command::Solve => commands::solve(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Verify => commands::verify(&ctx),
    }
}

/// Exit status: 0 pass, 1 numerical failure, 2 usage error.
pub fn exit_code(result: &anyhow::Result<bool>) -> u8 {
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) if e.is::<UsageError>() => 2,
        Err(_) => 1,
    }
}
