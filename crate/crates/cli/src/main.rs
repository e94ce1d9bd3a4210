//! `bsq-lab`: command-line experiments on the damped system.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! breaks down, 2 for usage and configuration errors.

mod commands;
mod config;
mod report;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_core::Error as CoreError;
use clap::{Parser, Subcommand};

use crate::config::Config;

#[derive(Parser)]
#[command(name = "bsq-lab", version, about = "Damped Boussinesq experiments with large band-limited data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the initial data, dump snapshots and tabulate its norms
    BuildData {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = "bsq-out")]
        out: PathBuf,
    },
    /// Tabulate the linear flow and its forcing; compute E0 and F0
    Linear {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = "bsq-out")]
        out: PathBuf,
    },
    /// Run the nonlinear system and report the energy functionals
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = "bsq-out")]
        out: PathBuf,
    },
    /// Check the energy identity and the measured constants; report the smallness condition
    Verify {
        #[arg(short, long)]
        config: PathBuf,
        /// Also write the summary files here
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a grid of (epsilon, nu, lambda) points in parallel
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Worker threads; 0 uses every core
        #[arg(short, long, default_value_t = 0)]
        jobs: usize,
    },
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<CoreError>(),
            Some(
                CoreError::InvalidGrid(_)
                    | CoreError::InvalidParameter(_)
                    | CoreError::Unresolved { .. }
                    | CoreError::Cfl { .. }
                    | CoreError::Components { .. }
                    | CoreError::ZeroMode { .. }
            )
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = match &cli.command {
        Command::BuildData { config, .. }
        | Command::Linear { config, .. }
        | Command::Simulate { config, .. }
        | Command::Verify { config, .. }
        | Command::Sweep { config, .. } => config,
    };
    let cfg = match Config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Command::Sweep { jobs, .. } = &cli.command {
        if *jobs > 0 {
            // only fails if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(*jobs).build_global();
        }
    }
    let result = match &cli.command {
        Command::BuildData { out, .. } => commands::build_data(&cfg, out),
        Command::Linear { out, .. } => commands::linear(&cfg, out),
        Command::Simulate { out, .. } => commands::simulate(&cfg, out),
        Command::Verify { out, .. } => commands::verify(&cfg, out.as_deref()),
        Command::Sweep { out, .. } => commands::sweep(&cfg, out),
    };
    match result {
        Ok((summary, pass)) => {
            print!("{}", summary.text());
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
