//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 budget
//! exceeded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Version of the JSON and CSV layouts described in docs/schema.md.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "ANDERSON_BAND_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "anderson-band",
    version,
    about = "Almost-sure spectra of period-2 Bernoulli Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form bands and gaps.
    Spectrum(CommonArgs),
    /// Certify uniform hyperbolicity over an energy grid.
    Scan(CommonArgs),
    /// Compare finite-volume eigenvalues with the predicted spectrum.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file `{"bands": [[lo, hi], ...]}` replacing the prediction.
        #[arg(long)]
        bands: Option<PathBuf>,
    },
    /// Eigendirection slopes of the four two-step products over a grid.
    Eigencurves(CommonArgs),
    /// Certify a single energy.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_negative_numbers = true)]
        e: Option<f64>,
        /// Also report boundary diagnostics for words up to this length.
        #[arg(long)]
        diagnostics: Option<usize>,
    },
    /// Closed-form eigendirection derivatives against finite differences.
    Derivs {
        #[command(flatten)]
        common: CommonArgs,
        /// Central-difference step.
        #[arg(long, default_value_t = 1e-6)]
        step: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub l0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub l1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    /// Site distribution `LAMBDA,C`, repeated once per site of the period.
    /// Overrides the two-site model for `scan` and `certify`.
    #[arg(long = "dist", value_name = "LAMBDA,C", allow_hyphen_values = true)]
    pub dist: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_max: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Longest word examined by the certifier.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Comma list (`1,2,5`) or half-open range (`0..20`).
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub dilation: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: msg.into(),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        let code = match e {
            crate::Error::InvalidArgument(_) => EXIT_USAGE,
            crate::Error::Budget(_) => EXIT_BUDGET,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer"),
    }
}

/// Parse the process arguments, run, and map the outcome to an exit code.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    configure_threads();
    match commands::run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
