//! `cbcast`: analyze, solve and simulate two-user computation broadcast instances.

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "cbcast", version, about)]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarize an instance: entropies, structure, bounds and the best known scheme.
    Analyze { instance: String },
    /// Build the optimal linear scheme for a linear instance.
    Solve {
        instance: String,
        /// Write the scheme as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check a scheme file against a linear instance.
    Verify { instance: String, scheme: PathBuf },
    /// Classify a matching instance by the permutations its grid cycles induce.
    Classify {
        instance: String,
        /// Maximum number of cycles to enumerate.
        #[arg(long, default_value_t = cbcast_core::matching::DEFAULT_CYCLE_CAP)]
        cap: usize,
    },
    /// Capacity bounds.
    Bounds {
        instance: String,
        #[arg(long, default_value_t = cbcast_core::matching::DEFAULT_CYCLE_CAP)]
        cap: usize,
    },
    /// Optimal one-shot broadcast by minimum-entropy coloring.
    Oracle {
        instance: String,
        /// Branch-and-bound node budget for supports too large for the exact solver.
        #[arg(long, default_value_t = cbcast_core::oracle::DEFAULT_NODE_BUDGET)]
        cap: u64,
    },
    /// Monte-Carlo binning, or a block scheme when an instance is given.
    Simulate {
        instance: Option<String>,
        #[arg(long, required_unless_present = "instance")]
        n1: Option<u64>,
        #[arg(long, required_unless_present = "instance")]
        n2: Option<u64>,
        #[arg(long = "L", short = 'L', default_value_t = 100)]
        l: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CBCAST_SEED", default_value_t = 0)]
        seed: u64,
        /// Treat every binning attempt as failed.
        #[arg(long)]
        force_fallback: bool,
    },
    /// Re-run the reference examples and print a pass/fail matrix.
    Selftest,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match cli.command {
        Command::Analyze { instance } => commands::analyze(&instance, json),
        Command::Solve { instance, emit } => commands::solve(&instance, emit.as_deref(), json),
        Command::Verify { instance, scheme } => commands::verify(&instance, &scheme, json),
        Command::Classify { instance, cap } => commands::classify(&instance, cap, json),
        Command::Bounds { instance, cap } => commands::bounds(&instance, cap, json),
        Command::Oracle { instance, cap } => commands::oracle(&instance, cap, json),
        Command::Simulate {
            instance,
            n1,
            n2,
            l,
            trials,
            seed,
            force_fallback,
        } => {
            let opts = commands::SimArgs {
                n1,
                n2,
                l,
                trials,
                seed,
                force_fallback,
            };
            commands::simulate(instance.as_deref(), &opts, json)
        }
        Command::Selftest => selftest::run(json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
