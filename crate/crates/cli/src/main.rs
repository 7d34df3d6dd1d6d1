mod args;
mod commands;
mod records;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input, arguments or files (exit code 1).
    #[error("{0}")]
    User(String),
    /// Unexpected failure (exit code 2).
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<baserate_core::Error> for CliError {
    fn from(e: baserate_core::Error) -> Self {
        use baserate_core::Error as E;
        match e {
            E::Json(_) => CliError::Internal(e.to_string()),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::User(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level))
        .target(env_logger::Target::Stderr)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    let result = match cli.command {
        Command::Split(a) => commands::split(&a),
        Command::BuildTable(a) => commands::build_table(&a),
        Command::Forecast(a) => commands::forecast(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::User(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Internal(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
