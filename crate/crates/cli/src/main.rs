//! `moment-space`: transforms, sampling, limit-law densities, Stieltjes
//! transforms and verification suites for random moment vectors.
//!
//! Exit codes: 0 success, 1 verification failed, 2 domain error,
//! 64 usage error, 70 numeric failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use moment_space::MomentError;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("{0}")]
    Io(String),
    /// A verification suite ran and did not pass.
    #[error("verification failed")]
    Failed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed => 1,
            CliError::Moment(e) if e.is_domain() => 2,
            CliError::Usage(_) => 64,
            CliError::Moment(_) | CliError::Io(_) => 70,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "moment-space", version, about = "Random moment vectors and their limit laws")]
struct Cli {
    /// JSON file with default settings (same names as the flags, snake_case)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between moments, canonical coordinates and recursion coefficients
    Transform(RunConfig),
    /// Draw random moment vectors (CSV: rep,m1,...,mk)
    Sample(RunConfig),
    /// Limit-law density on a grid plus atoms (CSV: kind,x,value)
    Density(RunConfig),
    /// Run a verification suite and emit a JSON report
    Verify(RunConfig),
    /// Stieltjes transform or continued-fraction convergent (CSV: re_z,im_z,re_phi,im_phi)
    Stieltjes(RunConfig),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MOMENT_SPACE_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("MOMENT_SPACE_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Transform(flags) => commands::transform(&flags.over(base)),
        Command::Sample(flags) => commands::sample(&flags.over(base)),
        Command::Density(flags) => commands::density(&flags.over(base)),
        Command::Verify(flags) => commands::verify(&flags.over(base)),
        Command::Stieltjes(flags) => commands::stieltjes(&flags.over(base)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Failed) {
                eprintln!("moment-space: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
