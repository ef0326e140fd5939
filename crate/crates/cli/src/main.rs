//! `baltor`: bounded-abstention pairwise ranking pipeline.
//!
//! Subcommands hand artifacts to each other through files: `train` writes a
//! model file, `calibrate` turns it into per-coverage selection policies,
//! `sweep` evaluates those policies on labeled test pairs, and `oracle`
//! verifies the selector construction against exhaustive search. `synth`
//! generates seeded LETOR-format fixtures for all of the above.

mod args;
mod commands;
mod error;
mod files;
mod pipeline;

use clap::Parser;

use args::{Cli, Command};
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth(args) => commands::cmd_synth(args),
        Command::Train(args) => commands::cmd_train(args),
        Command::Calibrate(args) => commands::cmd_calibrate(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Oracle(args) => commands::cmd_oracle(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
