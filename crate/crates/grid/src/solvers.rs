//! Jacobi-family and Gauss-Seidel/SOR relaxation on a [`GridProblem`].
//!
//! Jacobi-family sweeps read only the previous iterate and write a second
//! buffer, so their result does not depend on traversal order. The stopping
//! rule is the successive-difference norm ‖u^n − u^{n−1}‖∞, checked after
//! every elementary step.

use std::fmt::Write as _;
use std::time::Instant;

use srj_core::scheduler::CycleSchedule;

use crate::grid::{refresh, GridError, GridProblem, Stencil};

/// Field magnitude treated as divergence.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualHistory {
    /// ‖u^n − u^{n−1}‖∞ after each iteration.
    pub residuals: Vec<f64>,
    pub wall_seconds: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub tolerance: f64,
    /// ‖s − 𝒜u‖∞ of the final iterate.
    pub final_residual: f64,
}

impl ResidualHistory {
    fn new(tolerance: f64) -> Self {
        ResidualHistory {
            residuals: Vec::new(),
            wall_seconds: Vec::new(),
            iterations: 0,
            converged: false,
            tolerance,
            final_residual: f64::NAN,
        }
    }

    fn push(&mut self, r: f64, t: f64) {
        self.residuals.push(r);
        self.wall_seconds.push(t);
        self.iterations += 1;
    }

    /// CSV with columns `iteration,residual_inf,wall_seconds`. Timings are
    /// written as 0 when `timing` is false so output is reproducible.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("iteration,residual_inf,wall_seconds\n");
        for (i, (r, t)) in self.residuals.iter().zip(&self.wall_seconds).enumerate() {
            let t = if timing { *t } else { 0.0 };
            let _ = writeln!(out, "{},{:e},{:e}", i + 1, r, t);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Forward,
    Reverse,
}

/// Upper bound on ‖u‖∞ advanced by each step's ‖Δu‖∞; the field is only
/// rescanned when the bound crosses [`OVERFLOW_LIMIT`].
struct OverflowGuard {
    bound: f64,
}

impl OverflowGuard {
    fn new(u: &[f64]) -> Self {
        OverflowGuard { bound: inf_norm(u) }
    }

    /// true when the field has diverged.
    fn step(&mut self, u: &[f64], max_diff: f64) -> bool {
        if !max_diff.is_finite() {
            return true;
        }
        self.bound += max_diff;
        if !(self.bound <= OVERFLOW_LIMIT) {
            self.bound = inf_norm(u);
            return !(self.bound <= OVERFLOW_LIMIT);
        }
        false
    }
}

fn inf_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Loops over the indices of a run, forwards or backwards. A macro rather
/// than a closure-taking function so each loop body is inlined and
/// vectorized.
macro_rules! each {
    ($n:expr, $order:expr, |$j:ident| $body:expr) => {
        match $order {
            SweepOrder::Forward => {
                for $j in 0..$n {
                    $body;
                }
            }
            SweepOrder::Reverse => {
                for $j in (0..$n).rev() {
                    $body;
                }
            }
        }
    };
}

/// The run's cells of `v` shifted by `s` along the flat index.
#[inline(always)]
fn shifted(v: &[f64], a: usize, b: usize, s: isize) -> &[f64] {
    let lo = (a as isize + s) as usize;
    &v[lo..lo + (b - a)]
}

/// Each cell accumulates `center·u + Σ w·u_nb` in a fixed per-cell order
/// (axis 0 low, high, axis 1 low, ...), then applies
/// u + ω(s − acc)/center. Per-cell arithmetic is identical in either
/// traversal order. Returns ‖Δu‖∞; NaN can only follow an infinite field,
/// which [`OverflowGuard`] reports first.
fn kernel<const D: usize>(g: &GridProblem, omega: f64, next: &mut [f64], order: SweepOrder) -> f64 {
    let u = &g.u;
    let src = &g.source;
    let mut max_diff = 0.0f64;
    let mut run = |&(a, b): &(usize, usize)| {
        let n = b - a;
        let uc = &u[a..b];
        let sc = &src[a..b];
        let out = &mut next[a..b];
        let mut md = max_diff;
        match &g.stencil {
            Stencil::Uniform { center, off } => {
                let c = *center;
                let nb: [[&[f64]; 2]; D] = std::array::from_fn(|k| {
                    let st = g.stride[k] as isize;
                    [shifted(u, a, b, -st), shifted(u, a, b, st)]
                });
                let w: [[f64; 2]; D] = std::array::from_fn(|k| [off[2 * k], off[2 * k + 1]]);
                let scale = omega / c;
                each!(n, order, |j| {
                    let mut acc = c * uc[j];
                    for k in 0..D {
                        acc += w[k][0] * nb[k][0][j] + w[k][1] * nb[k][1][j];
                    }
                    let d = scale * (sc[j] - acc);
                    out[j] = uc[j] + d;
                    md = md.max(d.abs());
                });
            }
            Stencil::Variable { center, off } => {
                let cc = &center[a..b];
                let nb: [[&[f64]; 2]; D] = std::array::from_fn(|k| {
                    let st = g.stride[k] as isize;
                    [shifted(u, a, b, -st), shifted(u, a, b, st)]
                });
                let w: [[&[f64]; 2]; D] = std::array::from_fn(|k| [&off[2 * k][a..b], &off[2 * k + 1][a..b]]);
                each!(n, order, |j| {
                    let mut acc = cc[j] * uc[j];
                    for k in 0..D {
                        acc += w[k][0][j] * nb[k][0][j] + w[k][1][j] * nb[k][1][j];
                    }
                    let d = omega * (sc[j] - acc) / cc[j];
                    out[j] = uc[j] + d;
                    md = md.max(d.abs());
                });
            }
        }
        max_diff = md;
    };
    match order {
        SweepOrder::Forward => g.runs.iter().for_each(&mut run),
        SweepOrder::Reverse => g.runs.iter().rev().for_each(&mut run),
    }
    max_diff
}

fn relax_into(g: &GridProblem, omega: f64, next: &mut [f64], order: SweepOrder) -> f64 {
    match g.ndim() {
        1 => kernel::<1>(g, omega, next, order),
        2 => kernel::<2>(g, omega, next, order),
        _ => kernel::<3>(g, omega, next, order),
    }
}

/// One weighted Jacobi step u ← u + ω D⁻¹(s − 𝒜u), D the stencil centre.
/// Returns ‖Δu‖∞.
pub fn weighted_jacobi_sweep(g: &mut GridProblem, omega: f64) -> Result<f64, GridError> {
    weighted_jacobi_sweep_ordered(g, omega, SweepOrder::Forward)
}

pub fn weighted_jacobi_sweep_ordered(
    g: &mut GridProblem,
    omega: f64,
    order: SweepOrder,
) -> Result<f64, GridError> {
    let mut guard = OverflowGuard::new(&g.u);
    let mut next = g.u.clone();
    let diff = relax_into(g, omega, &mut next, order);
    if guard.step(&next, diff) {
        return Err(GridError::Overflow { iteration: 1 });
    }
    g.u = next;
    g.refresh_ghosts();
    Ok(diff)
}

/// Weighted Jacobi cycling through `weights` until a step changes the field
/// by less than `tol` or `max_iterations` steps have run.
pub fn relaxation_solve(
    g: &mut GridProblem,
    weights: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<ResidualHistory, GridError> {
    if weights.is_empty() {
        return Err(GridError::Invalid("empty weight sequence".into()));
    }
    let mut hist = ResidualHistory::new(tol);
    let mut guard = OverflowGuard::new(&g.u);
    let mut next = g.u.clone();
    let t0 = Instant::now();
    for it in 0..max_iterations {
        let omega = weights[it % weights.len()];
        let diff = relax_into(g, omega, &mut next, SweepOrder::Forward);
        std::mem::swap(&mut g.u, &mut next);
        refresh(&g.ghosts, &mut g.u);
        if guard.step(&g.u, diff) {
            return Err(GridError::Overflow { iteration: it + 1 });
        }
        hist.push(diff, t0.elapsed().as_secs_f64());
        if diff < tol {
            hist.converged = true;
            break;
        }
    }
    hist.final_residual = g.residual_inf();
    Ok(hist)
}

/// SRJ: repeated M-cycles in the cycle's interleaved order.
pub fn srj_solve(
    g: &mut GridProblem,
    cycle: &CycleSchedule,
    tol: f64,
    max_iterations: usize,
) -> Result<ResidualHistory, GridError> {
    relaxation_solve(g, &cycle.weight_sequence, tol, max_iterations)
}

pub fn jacobi_solve(g: &mut GridProblem, tol: f64, max_iterations: usize) -> Result<ResidualHistory, GridError> {
    relaxation_solve(g, &[1.0], tol, max_iterations)
}

/// In-place lexicographic sweep with relaxation `omega`; ghosts are
/// refreshed once the sweep completes.
fn sor_sweep(g: &mut GridProblem, omega: f64) -> f64 {
    let d = g.ndim();
    let stride = g.stride;
    let mut max_diff = 0.0f64;
    for ri in 0..g.runs.len() {
        let (a, b) = g.runs[ri];
        for i in a..b {
            let c = g.stencil.center(i);
            let mut acc = c * g.u[i];
            for k in 0..d {
                acc += g.stencil.off(i, 2 * k) * g.u[i - stride[k]];
                acc += g.stencil.off(i, 2 * k + 1) * g.u[i + stride[k]];
            }
            let delta = omega * (g.source[i] - acc) / c;
            g.u[i] += delta;
            max_diff = max_diff.max(delta.abs());
        }
    }
    g.refresh_ghosts();
    max_diff
}

pub fn sor_solve(
    g: &mut GridProblem,
    omega: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<ResidualHistory, GridError> {
    let mut hist = ResidualHistory::new(tol);
    let mut guard = OverflowGuard::new(&g.u);
    let t0 = Instant::now();
    for it in 0..max_iterations {
        let diff = sor_sweep(g, omega);
        if guard.step(&g.u, diff) {
            return Err(GridError::Overflow { iteration: it + 1 });
        }
        hist.push(diff, t0.elapsed().as_secs_f64());
        if diff < tol {
            hist.converged = true;
            break;
        }
    }
    hist.final_residual = g.residual_inf();
    Ok(hist)
}

pub fn gauss_seidel_solve(
    g: &mut GridProblem,
    tol: f64,
    max_iterations: usize,
) -> Result<ResidualHistory, GridError> {
    sor_solve(g, 1.0, tol, max_iterations)
}
