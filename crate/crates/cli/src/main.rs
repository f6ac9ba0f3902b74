//! `cc-bif`: command-line frontend for bifurcation analysis of planar
//! central configurations.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 verification failure,
//! 4 grid-too-coarse warning under `--strict`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting comparisons

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{resolve, threads_from_env, Cli, CliResult, Command, Failure};

fn run(cli: &Cli) -> CliResult<commands::Outcome> {
    let cfg = resolve(&cli.command)?;
    let threads = threads_from_env()?;
    match &cli.command {
        Command::Verify(_) => commands::verify(&cfg),
        Command::Spectrum(_) => commands::spectrum(&cfg),
        Command::FamilyInfo(_) => commands::family_info(&cfg),
        Command::Scan(_) => commands::scan(&cfg, threads),
        Command::Map(_) => commands::map(&cfg, threads),
    }
}

fn write_outputs(outcome: &commands::Outcome) -> CliResult<()> {
    for o in &outcome.outputs {
        match &o.path {
            Some(p) => std::fs::write(p, &o.content)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
            None => std::io::stdout().write_all(o.content.as_bytes())?,
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let failure = match run(&cli) {
        Ok(outcome) => match write_outputs(&outcome) {
            Ok(()) => outcome.failure,
            Err(f) => Some(f),
        },
        Err(f) => Some(f),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
