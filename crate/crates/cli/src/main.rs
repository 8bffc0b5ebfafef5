//! `twocenter`: trace lemniscate orbits of the two-center problem, compute
//! their invariants and run verification sweeps.

mod commands;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "twocenter", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace an orbit and write it as JSON and CSV, optionally as SVG.
    Orbit(OrbitArgs),
    /// Compute the invariants of an orbit and print them as JSON.
    Invariants(InvariantsArgs),
    /// Verify every coprime torus in a range and write one report per torus.
    Sweep(SweepArgs),
}

/// Energy slice, torus and numerical settings shared by `orbit` and `invariants`.
#[derive(Debug, Clone, Args)]
pub struct TorusArgs {
    /// Mass ratio mu in (0, 1).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub mu: f64,
    /// Energy; defaults to the midpoint between the critical value and 0.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub l: Option<u32>,
    /// Phase of the nu-motion in regularized time; defaults to T_nu / 4k.
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
    /// Samples per cycle of the faster separated motion.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerances {
    /// Relative tolerance of the period quadratures.
    #[arg(long)]
    pub tol_quad: Option<f64>,
    /// Clustering tolerance of double points.
    #[arg(long)]
    pub tol_geom: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollisionChoice {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverChoice {
    LeviCivitaE,
    LeviCivitaM,
    Birkhoff,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    /// Trace a collision orbit instead of a generic one.
    #[arg(long, value_enum)]
    pub collision: Option<CollisionChoice>,
    /// Also write the lift of the orbit under this cover.
    #[arg(long, value_enum)]
    pub lift: Option<CoverChoice>,
    /// Write an SVG drawing to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Draw orientation arrows in the SVG.
    #[arg(long)]
    pub arrows: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    /// Read the orbit from a JSON dump instead of tracing it.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Also write the arrangement and lift dumps here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Mass ratios, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub mu: Vec<f64>,
    /// Energies, comma separated; `auto` is the midpoint between c_J and 0.
    #[arg(long, value_delimiter = ',', default_value = "auto", allow_negative_numbers = true)]
    pub c: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub max_k: u32,
    #[arg(long, default_value_t = 5)]
    pub max_l: u32,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, default_value = "sweep")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub tol: Tolerances,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TWOCENTER_LOG", "warn")).init();
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Orbit(args) => commands::orbit(&args),
        Command::Invariants(args) => commands::invariants(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
