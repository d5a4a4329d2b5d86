mod args;
mod commands;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use locc_bounds::Error;

/// Why a run stopped before producing a report.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_solver_failure() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

/// A finished report and the exit code its verdict maps to.
pub struct Report {
    pub text: String,
    pub code: u8,
    /// Printed to standard error after the report.
    pub warning: Option<String>,
}

impl Report {
    fn plain(text: String) -> Self {
        Self { text, code: 0, warning: None }
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (report, out) = commands::run(&cli.command);
    match report {
        Ok(r) => {
            let written = match out {
                Some(path) => std::fs::write(path, &r.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout().write_all(r.text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => {
                    if let Some(w) = &r.warning {
                        eprintln!("warning: {w}");
                    }
                    ExitCode::from(r.code)
                }
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
