// SPDX-License-Identifier: MIT OR Apache-2.0

//! `segscan`: change-point detection from the command line.
//!
//! Exit status is 0 on success, 2 when the input or flags are invalid and
//! 1 on any other failure. `SEGSCAN_THREADS` caps the worker pool.

use std::process::ExitCode;

use clap::Parser;
use segscan_core::SegError;

mod cli;
mod commands;
mod input;
mod thresholds;

use cli::{Cli, Command};

/// Bad input or inconsistent flags.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<SegError>() {
            return match e {
                SegError::NoConvergence { .. } | SegError::Unreachable { .. } => 1,
                _ => 2,
            };
        }
    }
    1
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("SEGSCAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Invalid(format!(
            "SEGSCAN_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Segment(a) => commands::segment(a),
        Command::Multiseg(a) => commands::multiseg(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Ascn(a) => commands::ascn(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
