//! `krein-ext CONFIG.json [--out DIR] [--grid N] [--tol X]`
//!
//! Exit codes: 0 success; 1 invalid config or input; 2 unsearchable window or
//! extension-singular `z`; 3 boundary pair fails its conditions; 4 a
//! verification check failed. Errors go to stderr as one JSON object with a
//! stable `code`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use crate::commands::Overrides;
use crate::config::JobConfig;

pub const THREADS_ENV: &str = "KREIN_EXT_THREADS";

#[derive(Parser)]
#[command(
    name = "krein-ext",
    version,
    about = "Spectra, resolvents and parametrizations of self-adjoint extensions"
)]
struct Args {
    /// Job configuration (JSON).
    config: PathBuf,
    /// Directory for the output artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the scan grid (spectrum) or samples per edge (resolvent).
    #[arg(long)]
    grid: Option<usize>,
    /// Override the eigenvalue refinement tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub exit: u8,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
}

impl CliError {
    fn config(code: &'static str, message: String) -> Self {
        CliError {
            exit: 1,
            code,
            message,
            failed: Vec::new(),
        }
    }

    pub fn verification(failed: &[&str]) -> Self {
        CliError {
            exit: 4,
            code: "verification_failed",
            message: format!("{} check(s) failed", failed.len()),
            failed: failed.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl From<krein_ext::Error> for CliError {
    fn from(e: krein_ext::Error) -> Self {
        use krein_ext::Error as E;
        let (exit, failed) = match &e {
            E::Unsearchable(_) | E::ExtensionSingular { .. } => (2, Vec::new()),
            E::PairConditions { failed } => (3, failed.iter().map(|s| s.to_string()).collect()),
            _ => (1, Vec::new()),
        };
        CliError {
            exit,
            code: e.code(),
            message: e.to_string(),
            failed,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config("io", e.to_string())
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::config(
                "invalid_env",
                format!("{THREADS_ENV} must be a positive integer, got {v:?}"),
            )
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("invalid_env", e.to_string()))?;
    }
    if let Some(g) = args.grid {
        if g < 2 {
            return Err(CliError::config(
                "invalid_config",
                format!("--grid must be >= 2, got {g}"),
            ));
        }
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::config(
                "invalid_config",
                format!("--tol must be positive, got {t}"),
            ));
        }
    }
    let text = std::fs::read_to_string(&args.config)?;
    let config: JobConfig =
        serde_json::from_str(&text).map_err(|e| CliError::config("invalid_config", e.to_string()))?;
    std::fs::create_dir_all(&args.out)?;
    commands::run(
        &config,
        &args.out,
        Overrides {
            grid: args.grid,
            tol: args.tol,
        },
    )
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).expect("error serializes"));
            ExitCode::from(e.exit)
        }
    }
}
