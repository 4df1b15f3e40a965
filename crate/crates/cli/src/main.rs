//! `unbiased`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 no convergence,
//! 3 verification failure.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use unbiased_core::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VERIFICATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            Error::SingularMatrix { .. } | Error::ZeroEntry { .. } | Error::NonFinite { .. } => {
                EXIT_VERIFICATION
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: canonical JSON, a human table and an exit code.
pub struct Outcome {
    pub json: String,
    pub table: String,
    pub code: u8,
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: args::Cli) -> Result<u8, Failure> {
    let file = config::load(cli.global.config.as_deref())?;
    let global = commands::Global {
        seed: cli.global.seed.or(file.seed).unwrap_or(1),
        tol: cli.global.tol.or(file.tol),
        out: cli.global.out.clone().or_else(|| file.out.clone()),
        json: cli.global.json || file.json.unwrap_or(false),
    };
    if let Some(tol) = global.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure::usage(format!("--tol must be positive, got {tol}")));
        }
    }
    let outcome = match cli.command {
        args::Command::Solve(a) => commands::solve(&global, a, file.solve)?,
        args::Command::Verify(a) => commands::verify(&global, a, file.verify)?,
        args::Command::Polytope(a) => commands::polytope(&global, a, file.polytope)?,
        args::Command::Symplectic(a) => commands::symplectic(&global, a, file.symplectic)?,
        args::Command::Family(a) => commands::family(&global, a, file.family)?,
    };
    if let Some(path) = &global.out {
        std::fs::write(path, &outcome.json)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if global.json {
        print!("{}", outcome.json);
    } else {
        print!("{}", outcome.table);
    }
    Ok(outcome.code)
}
