//! Command-line front end of the down-conversion design engine.

pub mod args;
mod commands;
pub mod output;
pub mod reference;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

/// Failure of one invocation, mapped to the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pdc_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("output failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for invalid input, 2 for a failed computation or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Input(_) => 1,
            _ => 2,
        }
    }
}

/// Parses `argv` (program name first), runs the command, and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
