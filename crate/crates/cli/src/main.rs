//! `srj`: compute SRJ parameters and run the benchmark problems.
//!
//! Exit codes: 0 converged, 1 not converged, 2 usage error, 3 numeric abort.

mod bench;
mod cases;
mod optimize;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srj_core::scheduler::QuantizeStrategy;

use crate::cases::ProblemKind;

#[derive(Debug, Parser)]
#[command(name = "srj", version, about = "Scheduled Relaxation Jacobi parameters and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for optimal weights and fractions at (P, N).
    Optimize(optimize::OptimizeArgs),
    /// Run one solver on one benchmark problem.
    Solve(solve::SolveArgs),
    /// Iteration counts over a list of sizes and solvers.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Jacobi,
    Gs,
    Sor,
    Srj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    /// Zero interior.
    Zero,
    /// Zero plus seeded uniform noise.
    Noise,
    /// Analytic solution times (1 + ran(−½, ½)/N).
    Realistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleSource {
    /// Largest tabulated N not above the target.
    Table,
    /// Run the optimizer at the target N.
    Optimize,
}

/// Stopping tolerance: a number, or `paper` for 10⁻⁵/N².
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    Paper,
}

impl Tolerance {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Tolerance::Absolute(t) => t,
            Tolerance::Paper => 1e-5 / (n * n) as f64,
        }
    }
}

fn parse_tolerance(s: &str) -> Result<Tolerance, String> {
    if s == "paper" {
        return Ok(Tolerance::Paper);
    }
    match s.parse::<f64>() {
        Ok(t) if t >= 0.0 => Ok(Tolerance::Absolute(t)),
        _ => Err(format!("expected a non-negative number or `paper`, got '{s}'")),
    }
}

/// Options shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    #[arg(long, value_enum)]
    pub problem: ProblemKind,
    /// Dimension of the spherical problem.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Grad-Shafranov constant C.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// SRJ levels.
    #[arg(long, default_value_t = 6)]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = ScheduleSource::Table)]
    pub schedule: ScheduleSource,
    /// Extra parameter table layered over the shipped one.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// floor, round or ceil.
    #[arg(long, default_value = "floor")]
    pub quantize: QuantizeStrategy,
    /// SOR relaxation weight.
    #[arg(long, default_value_t = 1.9)]
    pub omega: f64,
    #[arg(long, value_parser = parse_tolerance, default_value = "1e-10")]
    pub tol: Tolerance,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Amplitude of the `noise` initialization.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Write zero wall-clock columns so repeated runs are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

macro_rules! value_name {
    ($t:ty) => {
        impl $t {
            pub fn name(self) -> String {
                self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
            }
        }
    };
}
value_name!(SolverKind);
value_name!(InitKind);

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric abort: {m}"),
        }
    }
}

impl From<srj_core::SrjError> for CliError {
    fn from(e: srj_core::SrjError) -> Self {
        use srj_core::SrjError::*;
        match e {
            OutOfRange(_) | InvalidSchedule(_) | InsufficientPriors { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<srj_core::params_db::TableError> for CliError {
    fn from(e: srj_core::params_db::TableError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<srj_grid::GridError> for CliError {
    fn from(e: srj_grid::GridError) -> Self {
        match e {
            srj_grid::GridError::Invalid(_) => CliError::Usage(e.to_string()),
            srj_grid::GridError::Overflow { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<srj_grid::ProblemError> for CliError {
    fn from(e: srj_grid::ProblemError) -> Self {
        match e {
            srj_grid::ProblemError::Grid(g) => g.into(),
            srj_grid::ProblemError::Invalid(_) => CliError::Usage(e.to_string()),
            srj_grid::ProblemError::SeriesStall { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

/// Whether the run reached its goal.
pub type Outcome = Result<bool, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Optimize(a) => optimize::run(&a),
        Command::Solve(a) => solve::run(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("srj: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
