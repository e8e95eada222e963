use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};

use crate::cases;
use crate::solve::{initialize, resolve_cycle, run_solver};
use crate::{CliError, InitKind, Outcome, RunOptions, SolverKind};

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', num_args = 0.., default_value = "srj,jacobi")]
    pub solvers: Vec<SolverKind>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "zero")]
    pub init: Vec<InitKind>,
    /// One CSV row per run, written as each run finishes.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &BenchArgs) -> Outcome {
    if a.solvers.is_empty() {
        return Err(CliError::Usage("empty solver list".into()));
    }
    let r = &a.run;
    let mut csv = match &a.out {
        Some(path) => {
            let mut f = File::create(path)?;
            writeln!(f, "problem,n,solver,init,iterations,converged,error,seconds")?;
            Some(f)
        }
        None => None,
    };
    let mut all_converged = true;
    let mut counts = Vec::new();
    for &n in &a.n_list {
        for &solver in &a.solvers {
            for &init in &a.init {
                let mut case = cases::build(r.problem, n, n, r.d, r.c)?;
                initialize(&mut case, init, r)?;
                let cycle = match solver {
                    SolverKind::Srj => Some(resolve_cycle(r, case.schedule_n)?),
                    _ => None,
                };
                let t0 = Instant::now();
                let hist = run_solver(&mut case, solver, cycle.as_ref(), r)?;
                let seconds = if r.deterministic { 0.0 } else { t0.elapsed().as_secs_f64() };
                let error = case.error().map_or(String::new(), |e| format!("{e:e}"));
                let line = format!(
                    "{},{n},{},{},{},{},{error},{seconds:.3}",
                    r.problem.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default(),
                    solver.name(),
                    init.name(),
                    hist.iterations,
                    hist.converged
                );
                println!("{line}");
                if let Some(f) = csv.as_mut() {
                    writeln!(f, "{line}")?;
                    f.flush()?;
                }
                all_converged &= hist.converged;
                counts.push((n, solver, init, hist.iterations));
            }
        }
    }
    for &solver in &a.solvers {
        for &init in &a.init {
            let series: Vec<(usize, usize)> = counts
                .iter()
                .filter(|c| c.1 == solver && c.2 == init)
                .map(|c| (c.0, c.3))
                .collect();
            for w in series.windows(2) {
                let ratio = w[1].1 as f64 / w[0].1.max(1) as f64;
                println!("ratio.{}.{}.{}-{}={ratio:.3}", solver.name(), init.name(), w[0].0, w[1].0);
            }
        }
    }
    Ok(all_converged)
}
