mod build;
mod cli;
mod run;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use nekomata::Error;

pub mod exit_code {
    pub const PASS: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BUDGET: u8 = 3;
}

/// Error raised by a command, tagged with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: exit_code::USAGE,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure {
            code: exit_code::CHECK_FAILED,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => exit_code::BUDGET,
            Error::CheckFailed(_) => exit_code::CHECK_FAILED,
            _ => exit_code::USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("json error: {e}"))
    }
}

pub type CmdResult = std::result::Result<u8, Failure>;

/// Write `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&std::path::Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = cli::Cli::parse();
    let result = match args.command {
        cli::Command::Build(a) => build::cmd_build(&a),
        cli::Command::Run(a) => run::cmd_run(&a),
        cli::Command::Verify(a) => verify::cmd_verify(&a),
        cli::Command::Sweep(a) => sweep::cmd_sweep(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
