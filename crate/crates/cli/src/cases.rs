use clap::ValueEnum;
use srj_grid::problems::{grad_shafranov, laplace2d_neumann, poisson2d_dirichlet, spherical_poisson};
use srj_grid::{AnalyticCase, GsTest};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    /// 2D Laplace, Neumann on every face.
    Laplace,
    /// 2D Poisson with Dirichlet data, nx × ny cells.
    Poisson,
    /// Poisson on the unit ball in d spherical coordinates.
    Spherical,
    /// Grad-Shafranov with Ψ = sin²θ/r on both radial faces.
    GsA,
    /// Grad-Shafranov on the masked region.
    GsB,
}

/// A built problem. `exact` is meaningful only when `has_exact` holds.
pub struct Case {
    pub analytic: AnalyticCase,
    pub has_exact: bool,
    /// N entering the 10⁻⁵/N² tolerance.
    pub tol_n: usize,
    /// Default N used to pick SRJ parameters.
    pub schedule_n: usize,
}

impl Case {
    pub fn error(&self) -> Option<f64> {
        self.has_exact.then(|| self.analytic.error())
    }
}

pub fn build(kind: ProblemKind, nx: usize, ny: usize, d: usize, c: f64) -> Result<Case, CliError> {
    let n = nx.max(ny);
    let case = match kind {
        ProblemKind::Laplace => {
            let problem = laplace2d_neumann(n)?;
            let exact = vec![0.0; problem.len()];
            Case {
                analytic: AnalyticCase { problem, exact, description: format!("laplace2d {n}x{n}") },
                // Any constant solves the pure Neumann problem.
                has_exact: false,
                tol_n: n,
                schedule_n: n,
            }
        }
        ProblemKind::Poisson => Case { analytic: poisson2d_dirichlet(nx, ny)?, has_exact: true, tol_n: n, schedule_n: n },
        ProblemKind::Spherical => Case { analytic: spherical_poisson(d, n)?, has_exact: true, tol_n: n, schedule_n: n },
        ProblemKind::GsA | ProblemKind::GsB => {
            let test = if kind == ProblemKind::GsA { GsTest::A } else { GsTest::B };
            let problem = grad_shafranov(test, c, n)?;
            let mut exact = vec![0.0; problem.len()];
            for i in problem.interior_indices() {
                let p = problem.position(i);
                exact[i] = p[1].sin().powi(2) / p[0];
            }
            Case {
                analytic: AnalyticCase { problem, exact, description: format!("grad-shafranov {test:?} C={c} N={n}") },
                has_exact: test == GsTest::A && c == 0.0,
                tol_n: n,
                schedule_n: n,
            }
        }
    };
    Ok(case)
}
