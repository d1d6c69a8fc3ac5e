//! `aluthge-lab`: command-line experiments with generalized Aluthge transforms.
//!
//! Exit codes: 0 when every check passes, 1 for unreadable input, bad
//! arguments or numerical failure, 2 when a mathematical property is violated.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    CorpusArgs, DominanceArgs, IterateArgs, NumrangeArgs, Outcome, ShiftSimArgs, TransformArgs,
    VerifyArgs,
};
use error::{config as config_error, CliResult};

const THREADS_VAR: &str = "ALUTHGE_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "aluthge-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transform one matrix and compare against an oracle.
    Transform(TransformArgs),
    /// Iterate the transform and optionally write a per-step CSV trace.
    Iterate(IterateArgs),
    /// First weights of the iterated weighted shift built to oscillate.
    ShiftSim(ShiftSimArgs),
    /// Numerical ranges of a matrix and of its transforms.
    Numrange(NumrangeArgs),
    /// Test whether one mean is dominated by another on positive tuples.
    Dominance(DominanceArgs),
    /// Run the seeded property checks.
    Verify(VerifyArgs),
    /// Write a seeded random matrix corpus.
    Corpus(CorpusArgs),
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            config_error(format!(
                "{THREADS_VAR} must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_error(e.to_string()))
}

fn dispatch(command: Command) -> CliResult<Outcome> {
    configure_threads()?;
    match command {
        Command::Transform(a) => commands::transform(&a),
        Command::Iterate(a) => commands::iterate_cmd(&a),
        Command::ShiftSim(a) => commands::shift_sim(&a),
        Command::Numrange(a) => commands::numrange(&a),
        Command::Dominance(a) => commands::dominance(&a),
        Command::Verify(a) => commands::verify_cmd(&a),
        Command::Corpus(a) => commands::corpus(&a),
        Command::Run { config } => {
            let cfg = config::load(&config)?;
            config::run(&cfg, &config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) if outcome.violations.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("property violation: {v}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
