mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] wwls::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use wwls::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Library(e) => match e {
                E::MissingFile(_)
                | E::Io { .. }
                | E::Parse { .. }
                | E::InvalidGraph(_)
                | E::InvalidParameter(_)
                | E::NotPrime(_)
                | E::EmptyGraph => 2,
                E::Pair { source, .. } if matches!(**source, E::EmptyGraph) => 2,
                _ => 3,
            },
            CliError::Output { .. } => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wwls: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
