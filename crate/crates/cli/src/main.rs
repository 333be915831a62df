mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirackit_core::mechanics::MEMBERSHIP_TOL;
use dirackit_core::DEFAULT_TOL;

use crate::io::{emit, load, tolerance, Failure, EXIT_CHECK_FAILED, EXIT_MALFORMED};

/// Linear and polynomial Dirac structures, Courant brackets and constrained
/// Hamiltonian simulation.
#[derive(Parser, Debug)]
#[command(name = "dirackit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a linear Dirac structure and run the full decomposition checks.
    Verify {
        spec: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a linear Dirac structure and report its certification.
    Construct {
        spec: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Courant bracket of two sections (and the tensor with a third).
    Bracket {
        fields: PathBuf,
        /// Evaluation point, comma-separated chart coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled involutivity test of a Dirac field.
    Involutivity {
        field: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random section triples.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a constrained mechanical system.
    Simulate {
        #[arg(required_unless_present = "system", conflicts_with = "system")]
        spec: Option<PathBuf>,
        /// Run a stock system (rolling-disk, lc-circuit) with its acceptance settings.
        #[arg(long)]
        system: Option<String>,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report (stdout when absent).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Validate a truncated ascending or projective sequence and its coherence.
    Limits {
        sequence: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (outcome, out) = match cli.command {
        Command::Verify { spec, tol, out } => (commands::verify(&load(&spec)?, tolerance(tol, DEFAULT_TOL)?)?, out),
        Command::Construct { spec, tol, out } => {
            (commands::construct(&load(&spec)?, tolerance(tol, DEFAULT_TOL)?)?, out)
        }
        Command::Bracket { fields, at, tol, out } => (
            commands::bracket(&load(&fields)?, at.as_deref(), tolerance(tol, DEFAULT_TOL)?)?,
            out,
        ),
        Command::Involutivity {
            field,
            samples,
            seed,
            budget,
            tol,
            out,
        } => (
            commands::involutivity(&load(&field)?, samples, seed, budget, tolerance(tol, DEFAULT_TOL)?)?,
            out,
        ),
        Command::Simulate {
            spec,
            system,
            out,
            report,
            tol,
        } => {
            let spec = match (spec, system) {
                (Some(p), _) => load(&p)?,
                (None, Some(name)) => commands::stock_system(&name)?,
                (None, None) => return Err(Failure::new(EXIT_MALFORMED, "a spec file or --system is required")),
            };
            (
                commands::simulate(&spec, out.as_deref(), tolerance(tol, MEMBERSHIP_TOL)?)?,
                report,
            )
        }
        Command::Limits { sequence, tol, out } => {
            (commands::limits(&load(&sequence)?, tolerance(tol, DEFAULT_TOL)?)?, out)
        }
    };
    emit(&outcome.report, out.as_deref())?;
    eprintln!("{}", outcome.summary);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(f) => {
            eprintln!("dirackit: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
