use std::path::PathBuf;

use clap::{Args, ValueEnum};
use srj_core::optimizer::{solve_with, Precision, SolveOptions};
use srj_core::params_db::{ParameterTable, TableRow};
use srj_core::scheduler::{quantize, QuantizeStrategy};
use srj_core::BoundaryKind;

use crate::Outcome;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BcArg {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PrecisionArg {
    Auto,
    Double,
    Extended,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Neumann)]
    pub bc: BcArg,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Auto)]
    pub precision: PrecisionArg,
    /// Newton iteration cap.
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
    /// Parameter file to record the result in; created if absent.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Replace an existing (P, N) row in `--table`.
    #[arg(long)]
    pub overwrite: bool,
}

pub fn run(a: &OptimizeArgs) -> Outcome {
    let opts = SolveOptions {
        bc: match a.bc {
            BcArg::Neumann => BoundaryKind::Neumann,
            BcArg::Dirichlet => BoundaryKind::Dirichlet,
        },
        d: a.d,
        precision: match a.precision {
            PrecisionArg::Auto => Precision::Auto,
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        },
        max_iterations: a.max_iterations,
    };
    let report = match solve_with(a.p, a.n, opts) {
        Ok(r) => r,
        Err(e @ srj_core::SrjError::NoConvergence { .. }) => {
            eprintln!("srj: {e}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let s = &report.schedule;
    println!("p={}", a.p);
    println!("n={}", a.n);
    println!("rho={}", s.rho);
    for (i, w) in report.omega_text.iter().enumerate() {
        println!("omega_{}={w}", i + 1);
    }
    for (i, b) in report.beta_text.iter().enumerate() {
        println!("beta_{}={b}", i + 1);
    }
    if let Ok(c) = quantize(s, QuantizeStrategy::Floor) {
        let q: Vec<String> = c.q.iter().map(u64::to_string).collect();
        println!("q={}", q.join(","));
        println!("m={}", c.m);
    }
    println!("residual={:e}", report.final_residual_norm);
    println!("iterations={}", report.newton_iterations);
    println!("digits={}", report.precision_digits_used);

    if let Some(path) = &a.table {
        let mut table = if path.exists() { ParameterTable::import(path)? } else { ParameterTable::new() };
        table.insert(TableRow::computed(&report), a.overwrite)?;
        table.export(path)?;
    }
    Ok(true)
}
