//! `smoothcal` command-line runner.

mod cli;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Job};
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("smoothcal: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("smoothcal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (ctx, job) = cli::resolve(cli)?;
    let pass = match job {
        Job::Regress(p) => commands::regress::run(&ctx, p)?,
        Job::Calibrate(p) => commands::calibrate::run(&ctx, p)?,
        Job::Score(p) => commands::score::run(&ctx, p)?,
        Job::Dynamics(p) => commands::dynamics::run(&ctx, p)?,
        Job::Selftest(p) => commands::selftest::run(&ctx, p)?,
    };
    println!("{}", ctx.out.join("summary.json").display());
    Ok(pass)
}
