//! `fj`: command-line front end for Friedkin-Johnsen opinion dynamics.
//!
//! Exit codes: 0 success, 1 runtime/output failure, 2 parse or validation
//! error, 3 not stable (or certificate UNKNOWN) under `--require-stable`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fj", version, about = "Friedkin-Johnsen opinion dynamics: stability, simulation, certificates")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stability, class parameters, bounds and consensus of network files.
    Analyze(AnalyzeArgs),
    /// Iterate a stationary model and write its trajectory.
    Simulate(SimulateArgs),
    /// Iterate a time-varying schedule and write its trajectory.
    TvSimulate(TvSimulateArgs),
    /// Check a sufficient stability condition for a periodic schedule.
    Certify(CertifyArgs),
    /// Write a bundled fixture.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Network files; several files are analyzed independently.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Threshold on susceptibility slack; defaults to the natural value.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Threshold on influence weights; defaults to the smallest positive weight.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Numerical tolerance for the spectral radius and the consensus check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for batch analysis.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Exit with code 3 unless every model is Schur stable.
    #[arg(long)]
    pub require_stable: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub file: PathBuf,
    /// Initial state: `file` (the file's x0, else u), `u`, or a constant.
    #[arg(long, default_value = "file")]
    pub x0: String,
    /// Maximum number of steps.
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    /// Stop once successive states differ by less than this (sup norm).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Trajectory file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TvSimulateArgs {
    pub file: PathBuf,
    /// Initial state: `file` (the file's x0, else u), `u`, or a constant.
    #[arg(long, default_value = "file")]
    pub x0: String,
    /// Number of steps.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Threshold for reporting the final step as converged.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Trajectory file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CertifyMode {
    /// Chain-class window with parameters (delta, eps, s).
    Chain,
    /// Augmented-graph connectivity over windows of T steps.
    Connectivity,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = CertifyMode::Chain)]
    pub mode: CertifyMode,
    /// Required in chain mode.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: f64,
    /// Chain length; if omitted the smallest certifying s is searched.
    #[arg(long)]
    pub s: Option<usize>,
    /// Window length T, required in connectivity mode.
    #[arg(long)]
    pub window: Option<usize>,
    /// Exit with code 3 when the verdict is UNKNOWN.
    #[arg(long)]
    pub require_stable: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// Weighted cycle with one prejudiced agent (`--n`, `--delta`).
    Cycle,
    /// Three-agent switching counterexample with alternating W.
    Example1,
    /// Two-agent switching counterexample with alternating Λ.
    Example2,
    /// Random strongly connected network (`--n`, `--seed`).
    Random,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub fixture: Fixture,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Arc probability beyond the ring (random fixture).
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Probability that an agent is prejudiced (random fixture).
    #[arg(long, default_value_t = 0.3)]
    pub prejudiced: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FJ_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => commands::analyze(&args, cli.format),
        Command::Simulate(args) => commands::simulate(&args, cli.format),
        Command::TvSimulate(args) => commands::tv_simulate(&args, cli.format),
        Command::Certify(args) => commands::certify(&args, cli.format),
        Command::Generate(args) => commands::generate(&args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
