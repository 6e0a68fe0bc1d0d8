mod args;
mod commands;
mod error;
mod model;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let ctx = Context {
        timestamp: (!cli.no_timestamp)
            .then(|| chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()),
        bits: cli.bits,
    };
    match &cli.command {
        Command::Entropies(a) => commands::entropies(a, &ctx),
        Command::Fit(a) => commands::fit(a, &ctx),
        Command::Contour(a) => commands::contour(a, &ctx),
        Command::CftCheck(a) => commands::cft_check(a),
        Command::StateDump(a) => commands::state_dump(a, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eamkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
