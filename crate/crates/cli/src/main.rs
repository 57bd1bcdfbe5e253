//! `shuffle-sgd`: exit status 0 when every check holds, 1 when a bound
//! check fails, 2 for usage, spec and refusal errors.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use shuffle_sgd::verify::{configured_threads, THREADS_ENV};

use args::{Cli, Command};
use commands::Outcome;

fn threads_env_ok() -> anyhow::Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if configured_threads().is_none() => {
            anyhow::bail!("{THREADS_ENV} must be a positive integer, got `{v}`")
        }
        _ => Ok(()),
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    threads_env_ok()?;
    match &cli.command {
        Command::Build(a) => commands::build_cmd(a),
        Command::Run(a) => commands::run_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::Figure { figure } => commands::figure_cmd(figure),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(lines)) => {
            for l in lines {
                eprintln!("error: bound check failed: {l}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            for cause in e.chain().skip(1) {
                eprintln!("error: caused by: {cause}");
            }
            ExitCode::from(2)
        }
    }
}
