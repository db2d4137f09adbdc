mod args;
mod dataset;
mod error;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<String> {
    let pool = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;

    let format = cli.out;
    let report = pool.install(|| match cli.command {
        Command::Rerun { report, check } => run::rerun(&report, check),
        command => {
            let (invocation, seed, side) = run::resolve(command, cli.seed)?;
            run::run_report(invocation, seed, &side)
        }
    })?;
    report.render(format)
}
