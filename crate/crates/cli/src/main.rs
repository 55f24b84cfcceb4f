//! `odeig` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 classification
//! integrity failure, 3 verification shortfall.

mod args;
mod commands;
mod formats;

use std::fmt;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<odeig::Error> for CliError {
    fn from(e: odeig::Error) -> Self {
        Self(e.to_string())
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => commands::gen(g, a),
        Command::Enumerate { file } => commands::enumerate(g, file),
        Command::Classify { file } => commands::classify_cmd(g, file),
        Command::Verify(a) => commands::verify(g, a),
        Command::Count(a) => commands::count(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.global.output {
        Some(path) => {
            fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Some(n) = &outcome.notice {
        eprintln!("{n}");
    }
    ExitCode::from(outcome.code)
}
