//! Command-line driver for the localk verification suites.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or
//! precondition, 2 on a malformed spec or unreadable file.

pub mod commands;
pub mod report;
pub mod spec;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Params;
use report::{Format, Report};
use spec::LoadedSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Spec(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "localk", version, about = "Certified K-theory constructions for localized algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Spec document (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random samples per identity, segment or perturbation.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Largest matrix size drawn by the randomized suites.
    #[arg(long, global = true)]
    pub max_size: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the identity suite over the spec's algebra.
    Verify,
    /// Build the connecting map for the spec's invertible.
    Boundary,
    /// Run the randomized exactness segments over the spec's diagram.
    Exactness,
    /// Run the command named in the spec.
    Run,
}

fn params(cli: &Cli, spec: &LoadedSpec, command: Command) -> Params {
    let c = &spec.doc.command;
    let (samples, max_size) = match command {
        Command::Verify => (100, 4),
        Command::Boundary => (0, 1),
        _ => (20, 2),
    };
    Params {
        seed: cli.seed.or(c.seed).unwrap_or(0),
        samples: cli.samples.or(c.samples).unwrap_or(samples),
        max_size: cli.max_size.or(c.max_size).unwrap_or(max_size),
    }
}

/// Loads the spec and runs the command; the report is not yet written.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let path = cli.spec.as_ref().ok_or_else(|| CliError::Spec("--spec is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let spec = LoadedSpec::load(&text)?;
    let command = match cli.command {
        Command::Run => match spec.doc.command.name.as_deref() {
            Some("verify") => Command::Verify,
            Some("boundary") => Command::Boundary,
            Some("exactness") => Command::Exactness,
            other => return Err(CliError::Spec(format!("spec names no runnable command ({other:?})"))),
        },
        c => c,
    };
    let p = params(cli, &spec, command);
    match command {
        Command::Verify => commands::verify(&spec, p),
        Command::Boundary => commands::boundary(&spec, p),
        _ => commands::exactness(&spec, p),
    }
}

/// Runs the CLI end to end and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let start = std::time::Instant::now();
    let code = match execute(cli) {
        Ok(report) => {
            let text = report.render(cli.format);
            let written = match &cli.report {
                Some(path) => std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) if report.passed => 0,
                Ok(()) => 1,
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    code
}
