//! Structured-grid relaxation solvers and the benchmark problems they are
//! exercised on.

pub mod grid;
pub mod problems;
pub mod solvers;
pub mod special;

pub use grid::{FaceBc, GhostRule, GridBuilder, GridError, GridProblem, Stencil, StencilSpec};
pub use problems::{AnalyticCase, GsTest, ProblemError};
pub use solvers::{
    gauss_seidel_solve, jacobi_solve, relaxation_solve, sor_solve, srj_solve, weighted_jacobi_sweep,
    ResidualHistory, SweepOrder,
};
