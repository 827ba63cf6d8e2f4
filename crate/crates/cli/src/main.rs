//! `gftpl`: PTM certification, experiments and probes.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error.

mod error;
mod inputs;
mod io;
mod probe;
mod run;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gftpl", version, about = "Oracle-efficient perturbed-leader experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a PTM against a game.
    VerifyPtm(verify::VerifyArgs),
    /// Run an experiment config.
    Run(run::RunArgs),
    /// Probes and closed-form counterexamples.
    #[command(subcommand)]
    Probe(probe::Probe),
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::VerifyPtm(a) => verify::verify(a),
        Command::Run(a) => {
            let n = run::run(a)?;
            eprintln!("wrote {n} traces to {}", a.out.display());
            Ok(true)
        }
        Command::Probe(p) => probe::probe(p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
