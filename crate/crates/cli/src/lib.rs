//! Command-line driver for the graphnls workbench.
//!
//! Exit codes: `0` success, `2` invalid input, `3` numerical failure,
//! `64` usage error (unknown or missing subcommand).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "GRAPHNLS_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] graphnls::Error),
    #[error("invalid JSON: {0}")]
    Json(serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    /// Some scan rows failed numerically; the table was still written.
    #[error("{0} scan point(s) failed numerically")]
    PartialFailure(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::PartialFailure(_) => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "graphnls", version, about = "Focusing NLS on a star graph with a delta vertex")]
pub struct Cli {
    /// Edge length of the truncated grid
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
    /// Intervals per edge
    #[arg(long = "grid-M", global = true)]
    pub grid_m: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed of the random generators, recorded in the JSON sidecars
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for scans (GRAPHNLS_THREADS takes precedence)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a stationary state and report its functionals
    Stationary {
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long = "N")]
        edges: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
    /// Time evolution from a JSON configuration
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Symmetric rearrangement of a piecewise-linear function
    Rearrange {
        /// Breakpoint CSV with header edge,x,y
        #[arg(long, conflicts_with = "tent", required_unless_present = "tent")]
        input: Option<PathBuf>,
        /// Use the tent fixture on this many edges
        #[arg(long)]
        tent: Option<usize>,
    },
    /// Linearization spectra and the VK slope from a JSON configuration
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parameter scan from a JSON configuration
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reduced action of the escaping soliton sequence
    EscapeDemo {
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long = "N", default_value_t = 3)]
        edges: usize,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag.filter(|&n| n > 0)),
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = thread_count(cli.threads)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Config(e.to_string()))?
    };
    pool.install(|| commands::dispatch(&cli))
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
