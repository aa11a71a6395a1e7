//! Batch front-end for the serrin-core experiments.

pub mod commands;
pub mod config;
pub mod parse;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{parse_config, RunConfig};

/// Worker count for the family fan-out.
pub const WORKERS_ENV: &str = "SERRIN_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<serrin_core::Error> for CliError {
    fn from(e: serrin_core::Error) -> Self {
        match e {
            serrin_core::Error::Io(io) => CliError::Io(io.to_string()),
            e if e.is_validation() => CliError::Validation(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "serrin", version, about = "Moving planes, Harnack chains and symmetry-stability sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Ellipse,
    Disk,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Summary,
    Plot,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve Δu + f(u) = 0 with u = 0 on the boundary; writes the field dump
    /// and a boundary CSV of u_nu.
    Solve {
        #[arg(long)]
        domain: PathBuf,
        /// `torsion` or `linear:<lambda>`.
        #[arg(long = "f", default_value = "torsion")]
        f: String,
        /// Grid spacing, e.g. `1/128`.
        #[arg(long, default_value = "1/128")]
        h: String,
        #[arg(long)]
        out: PathBuf,
        /// Boundary CSV; defaults to the dump path with `.boundary.csv`.
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long, default_value_t = serrin_core::pde::DEFAULT_BOUNDARY_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Critical plane for one direction, as JSON.
    Movingplanes {
        #[arg(long)]
        domain: PathBuf,
        /// Direction angle with a `deg` or `rad` suffix.
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        /// Bisection width relative to the diameter.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Sampled cone certificates over a set of directions, as JSON.
    Ctheta {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value = "1/32")]
        t: String,
        /// Number of equally spaced directions.
        #[arg(long, default_value_t = 16)]
        directions: usize,
    },
    /// Harnack chain constants for a cone.
    Harnack {
        /// Half-aperture with a `deg` or `rad` suffix.
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        /// Distance from the cone vertex to the chain start.
        #[arg(long)]
        r0: f64,
        /// Distance from the cone vertex to the chain end.
        #[arg(long)]
        xi: f64,
        /// Dimension, 2 or 3.
        #[arg(long, default_value_t = 2)]
        dim: u32,
        #[arg(long)]
        json: bool,
    },
    /// Runs the stability pipeline over a family of domains.
    StabilitySweep {
        /// JSON run config; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyKind>,
        /// Ellipse semi-axes: `v1,v2,...` or `lo:hi:count` (geometric in a - b).
        #[arg(long)]
        a: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Disk radii: `v1,v2,...` or `lo:hi:count`.
        #[arg(long)]
        radii: Option<String>,
        /// Eigenfunction scalings, e.g. `1,2,4,8`.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        /// Domain file for the eigen family.
        #[arg(long)]
        domain: Option<PathBuf>,
        /// `torsion` or `linear:<lambda>`.
        #[arg(long = "f")]
        f: Option<String>,
        /// Grid spacing, e.g. `1/128`.
        #[arg(long)]
        h: Option<String>,
        /// Bootstrap seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Sweep CSV; siblings get the plot data, summary, records and manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-renders the outputs of a sweep from its records file.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::All)]
        format: ReportFormat,
    },
}

/// Runs one command and returns what it prints on stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    commands::dispatch(cli.command)
}

/// Sizes the global worker pool from [`WORKERS_ENV`], if set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::validation(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))
}
