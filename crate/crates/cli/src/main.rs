//! `ked`: evaluate, verify and use kernel mean embeddings from JSON specs.
//!
//! Every command prints one JSON object on stdout. Exit codes: 0 success,
//! 1 verification failed, 2 unsupported pair, 3 invalid input, 4 numerical
//! failure.

mod commands;
mod document;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{VerifyOptions, What};
use document::SpecDocument;
use error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "ked",
    version,
    about = "Kernel mean embeddings from JSON specs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K_P(x), K_PP or K(x, y).
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
    },
    /// Compare the closed form against the numerical oracle.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// Monte Carlo samples (pairs for K_PP).
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Bayesian quadrature posterior from nodes and values.
    Bq {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
    },
    /// Squared MMD between the spec's measure and a sample set.
    Mmd {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorOutput {
    error: ErrorBody,
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string(value).expect("output types serialize");
    let mut out = std::io::stdout().lock();
    // A closed stdout is not worth a panic.
    let _ = writeln!(out, "{text}");
}

fn point(s: Option<&str>) -> Result<Option<Vec<f64>>> {
    s.map(commands::parse_point).transpose()
}

/// Runs the command and returns its exit code.
fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Eval { spec, what, x, y } => {
            let doc = SpecDocument::load(&spec)?;
            let (x, y) = (point(x.as_deref())?, point(y.as_deref())?);
            print_json(&commands::eval(&doc, what, x.as_deref(), y.as_deref())?);
            Ok(0)
        }
        Command::Verify {
            spec,
            budget,
            seed,
            tol,
            points,
        } => {
            let doc = SpecDocument::load(&spec)?;
            let report = commands::verify(
                &doc,
                &VerifyOptions {
                    budget,
                    seed,
                    tol,
                    points,
                },
            )?;
            print_json(&report);
            if !report.passed {
                log::error!(
                    "{} of {} checks failed",
                    report.checks.iter().filter(|c| !c.pass).count(),
                    report.checks.len()
                );
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Bq { spec, data, jitter } => {
            let doc = SpecDocument::load(&spec)?;
            print_json(&commands::bq(&doc, data.as_deref(), jitter)?);
            Ok(0)
        }
        Command::Mmd { spec, samples } => {
            let doc = SpecDocument::load(&spec)?;
            print_json(&commands::mmd(&doc, &samples)?);
            Ok(0)
        }
    }
}

fn fail(err: &CliError) -> ExitCode {
    log::error!("{err}");
    print_json(&ErrorOutput {
        error: ErrorBody {
            kind: err.kind(),
            message: err.to_string(),
        },
    });
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(&CliError::Input(e.kind().to_string()));
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
