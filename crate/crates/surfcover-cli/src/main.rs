//! `surfcover` — coverage-path and viewpoint planning on triangle meshes.
//!
//! Subcommands mirror the pipeline stages: `segment` produces the cluster
//! tessellation, `path` the geodesic generator graph and coverage tour,
//! `viewpoints` the corrected standoff rays and pose selection, `metrics`
//! the quality report, `bench` the decomposition-vs-oracle timing, and
//! `export` visualization files. Exit codes: 0 ok, 1 usage, 2 input error,
//! 3 invariant violation.

mod check;
mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn input(err: impl std::fmt::Display) -> Self {
        CliError::Input(err.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "surfcover",
    version,
    about = "Coverage-path and viewpoint planning on triangle meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a mesh into area-uniform, low-curvature clusters.
    Segment(commands::SegmentArgs),
    /// Compute the generator graph and the 3-opt coverage path.
    Path(commands::PathArgs),
    /// Plan occlusion-corrected standoff viewpoints along the path.
    Viewpoints(commands::ViewpointsArgs),
    /// Score a segmentation: coverage, overlap, RSD, unreachable faces.
    Metrics(commands::MetricsArgs),
    /// Time the geodesic decomposition against the full-mesh oracle.
    Bench(commands::BenchArgs),
    /// Convert pipeline artifacts to visualization files.
    Export(commands::ExportArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Declarative config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Worker threads (falls back to SURFCOVER_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run the invariant suite on the produced outputs.
    #[arg(long)]
    check: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Segment(args) => commands::segment(args),
        Command::Path(args) => commands::path(args),
        Command::Viewpoints(args) => commands::viewpoints(args),
        Command::Metrics(args) => commands::metrics(args),
        Command::Bench(args) => commands::bench(args),
        Command::Export(args) => commands::export(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
