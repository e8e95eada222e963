use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrjError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("pole: kappa = {kappa} coincides with 1/omega_{index}")]
    Pole { kappa: f64, index: usize },
    #[error("weights omega_{0} and omega_{1} coincide")]
    DuplicateWeight(usize, usize),
    #[error("state violates kappa interleaving")]
    Interleaving,
    #[error("initial guess for P={p} needs at least two prior schedules, got {got}")]
    InsufficientPriors { p: usize, got: usize },
    #[error("no convergence for P={p}, N={n}: best residual {best_residual:e} after {iterations} iterations")]
    NoConvergence {
        p: usize,
        n: f64,
        best_residual: f64,
        iterations: usize,
    },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("quantization produced q_{0} = 0")]
    DegenerateQuantization(usize),
}
