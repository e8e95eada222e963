use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use srj_core::amplification::effective_n;
use srj_core::optimizer::solve;
use srj_core::params_db::ParameterTable;
use srj_core::scheduler::{quantize, CycleSchedule};
use srj_core::BoundaryKind;
use srj_grid::problems::add_seeded_noise;
use srj_grid::{gauss_seidel_solve, jacobi_solve, sor_solve, srj_solve, ResidualHistory};

use crate::cases::{self, Case, ProblemKind};
use crate::{CliError, InitKind, Outcome, RunOptions, ScheduleSource, SolverKind};

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Cells per axis.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum, default_value_t = SolverKind::Srj)]
    pub solver: SolverKind,
    #[arg(long, value_enum, default_value_t = InitKind::Zero)]
    pub init: InitKind,
    /// N used to select SRJ parameters; defaults to the grid size.
    #[arg(long)]
    pub schedule_n: Option<usize>,
    /// Select SRJ parameters at the effective N of a rectangular grid.
    #[arg(long, conflicts_with = "schedule_n")]
    pub effective_n: bool,
    /// Per-iteration residual history as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run plain Jacobi and report the iteration ratio.
    #[arg(long)]
    pub ref_jacobi: bool,
}

/// The SRJ cycle for `p` at `target_n`, from the table or the optimizer.
pub fn resolve_cycle(run: &RunOptions, target_n: usize) -> Result<CycleSchedule, CliError> {
    let schedule = match run.schedule {
        ScheduleSource::Table => {
            let mut table = ParameterTable::shipped();
            if let Some(path) = &run.table {
                table.merge(&ParameterTable::import(path)?, true)?;
            }
            table.lookup(run.p, target_n)?
        }
        ScheduleSource::Optimize => solve(run.p, target_n, BoundaryKind::Neumann, 2)?.schedule,
    };
    Ok(quantize(&schedule, run.quantize)?)
}

pub fn initialize(case: &mut Case, init: InitKind, run: &RunOptions) -> Result<(), CliError> {
    match init {
        InitKind::Zero => {}
        InitKind::Noise => add_seeded_noise(&mut case.analytic.problem, run.noise, run.seed),
        InitKind::Realistic => {
            if !case.has_exact {
                return Err(CliError::Usage("`realistic` needs a problem with an analytic solution".into()));
            }
            case.analytic.perturb_from_exact(case.tol_n, run.seed);
        }
    }
    Ok(())
}

/// Runs `solver` in place on `case`.
pub fn run_solver(
    case: &mut Case,
    solver: SolverKind,
    cycle: Option<&CycleSchedule>,
    run: &RunOptions,
) -> Result<ResidualHistory, CliError> {
    let tol = run.tol.value(case.tol_n);
    let g = &mut case.analytic.problem;
    let hist = match solver {
        SolverKind::Jacobi => jacobi_solve(g, tol, run.max_iterations)?,
        SolverKind::Gs => gauss_seidel_solve(g, tol, run.max_iterations)?,
        SolverKind::Sor => sor_solve(g, run.omega, tol, run.max_iterations)?,
        SolverKind::Srj => {
            let cycle = cycle.ok_or_else(|| CliError::Usage("SRJ needs a schedule".into()))?;
            srj_solve(g, cycle, tol, run.max_iterations)?
        }
    };
    Ok(hist)
}

pub fn run(a: &SolveArgs) -> Outcome {
    let r = &a.run;
    let (nx, ny) = match (a.n, a.nx, a.ny) {
        (_, Some(x), Some(y)) => (x, y),
        (Some(n), None, None) => (n, n),
        _ => return Err(CliError::Usage("give --n, or both --nx and --ny".into())),
    };
    if nx != ny && r.problem != ProblemKind::Poisson {
        return Err(CliError::Usage("only the Poisson problem takes a rectangular grid".into()));
    }
    let mut case = cases::build(r.problem, nx, ny, r.d, r.c)?;
    initialize(&mut case, a.init, r)?;
    let start = case.analytic.clone();

    let cycle = if a.solver == SolverKind::Srj {
        let target = match (a.schedule_n, a.effective_n) {
            (Some(n), _) => n,
            (None, true) => effective_n(&[nx, ny], 2, BoundaryKind::Dirichlet)?.floor() as usize,
            (None, false) => case.schedule_n,
        };
        Some(resolve_cycle(r, target)?)
    } else {
        None
    };

    let t0 = Instant::now();
    let hist = run_solver(&mut case, a.solver, cycle.as_ref(), r)?;
    let seconds = t0.elapsed().as_secs_f64();

    println!("problem={}", case.analytic.description);
    println!("solver={}", a.solver.name());
    if let Some(c) = &cycle {
        println!("schedule_p={}", c.source.levels());
        println!("schedule_n={}", c.source.n);
        println!("cycle_length={}", c.m);
        println!("rho_theory={}", c.source.rho);
    }
    println!("tolerance={:e}", hist.tolerance);
    println!("iterations={}", hist.iterations);
    println!("converged={}", hist.converged);
    println!("final_residual={:e}", hist.final_residual);
    if let Some(e) = case.error() {
        println!("error={e:e}");
    }
    if !r.deterministic {
        println!("seconds={seconds:.3}");
    }
    if a.ref_jacobi && a.solver != SolverKind::Jacobi {
        let mut reference = Case { analytic: start, ..case };
        let jac = run_solver(&mut reference, SolverKind::Jacobi, None, r)?;
        println!("jacobi_iterations={}", jac.iterations);
        println!("measured_rho={}", jac.iterations as f64 / hist.iterations.max(1) as f64);
    }
    if let Some(path) = &a.out {
        std::fs::write(path, hist.to_csv(!r.deterministic))?;
    }
    Ok(hist.converged)
}
