//! Optimal SRJ weights.
//!
//! The unknowns are the weights ω_1 > … > ω_P and the interior extrema
//! κ_1..κ_{P−1} of Γ, with β eliminated through its closed form. The
//! residual equalizes ln Γ at κ_m, at every κ_i and at κ = 2, and makes
//! ∂ ln Γ(κ_m)/∂β_j vanish.
//!
//! Newton runs on y = (ln ω_i, logit t_i) where
//! κ_i = 1/ω_i + t_i·(1/ω_{i+1} − 1/ω_i), so the interleaving
//! 1/ω_i < κ_i < 1/ω_{i+1} holds for every iterate. The ordering of ω and
//! 1/ω_1 > κ_m, 1/ω_P < 2 are checked and reject a step when violated.
//!
//! Solutions are reached by continuation: levels P = 2, 3, … are solved in
//! turn at N = min(N, 100), each seeded from the lower levels, then the
//! target level is marched in N by factors of at most 1.25 to the requested
//! grid. The path runs in `f64`; the final state is polished in the working
//! precision chosen by [`Precision`].

pub mod closed_form;
pub mod guess;
pub mod lm;

use crate::amplification::{
    effective_n, kappa_min_real, n_for_kappa_min, BoundaryKind, KappaRange, WeightSchedule,
    KAPPA_MAX,
};
use crate::error::SrjError;
use crate::scalar::{Ext, Real};

pub use closed_form::{a_inverse, a_matrix, b_inverse, b_matrix, beta_from, domega_dbeta};
use lm::{levenberg_marquardt, LmSettings};

/// Grid size at which the level continuation runs before marching in N.
pub const BASE_N: f64 = 100.0;
/// Largest ratio between consecutive grid sizes of the N march.
pub const N_STEP: f64 = 1.25;
/// Residual accepted for intermediate continuation states in `f64`.
const PATH_TOL: f64 = 1e-9;
/// Initial damping for the final polish, which starts near the solution.
const POLISH_DAMPING: f64 = 1e-10;
pub const DOUBLE_TOL: f64 = 1e-12;
pub const EXTENDED_TOL: f64 = 1e-20;

#[derive(Debug, Clone)]
pub struct OptimizerState<R> {
    pub omegas: Vec<R>,
    pub kappas: Vec<R>,
    /// κ_m at working precision; `kappa_bounds` holds its `f64` image.
    pub kappa_min: R,
    pub kappa_bounds: KappaRange,
    pub precision_digits: u32,
}

impl<R: Real> OptimizerState<R> {
    pub fn new(omegas: Vec<R>, kappas: Vec<R>, kappa_min: R) -> Result<Self, SrjError> {
        let kappa_bounds = KappaRange::new(kappa_min.to_f64())?;
        let s = OptimizerState {
            omegas,
            kappas,
            kappa_min,
            kappa_bounds,
            precision_digits: R::DIGITS,
        };
        s.check()?;
        Ok(s)
    }

    pub fn levels(&self) -> usize {
        self.omegas.len()
    }

    /// Interleaving 1/ω_i < κ_i < 1/ω_{i+1}, ω decreasing and positive.
    pub fn check(&self) -> Result<(), SrjError> {
        let p = self.omegas.len();
        if p == 0 || self.kappas.len() + 1 != p {
            return Err(SrjError::Interleaving);
        }
        if self.omegas.iter().any(|w| !(w.clone() > R::zero())) {
            return Err(SrjError::Interleaving);
        }
        for i in 0..p - 1 {
            let lo = R::one() / self.omegas[i].clone();
            let hi = R::one() / self.omegas[i + 1].clone();
            if !(lo < self.kappas[i] && self.kappas[i] < hi) {
                return Err(SrjError::Interleaving);
            }
        }
        Ok(())
    }

    /// The state's ω, κ as unconstrained unknowns.
    pub fn to_unknowns(&self) -> Vec<R> {
        let p = self.levels();
        let mut y: Vec<R> = self.omegas.iter().map(|w| w.ln()).collect();
        for i in 0..p - 1 {
            let lo = R::one() / self.omegas[i].clone();
            let hi = R::one() / self.omegas[i + 1].clone();
            let t = (self.kappas[i].clone() - lo.clone()) / (hi - lo);
            y.push((t.clone() / (R::one() - t)).ln());
        }
        y
    }

    /// Inverse of [`Self::to_unknowns`]; `None` outside the feasible set.
    pub fn from_unknowns(y: &[R], kappa_min: &R) -> Option<Self> {
        let p = (y.len() + 1) / 2;
        let omegas: Vec<R> = y[..p].iter().map(|v| v.exp()).collect();
        if omegas.iter().any(|w| !w.is_finite()) {
            return None;
        }
        if omegas.windows(2).any(|w| !(w[0] > w[1])) {
            return None;
        }
        if !(R::one() / omegas[0].clone() > *kappa_min)
            || !(R::one() / omegas[p - 1].clone() < R::from_f64(KAPPA_MAX))
        {
            return None;
        }
        let mut kappas = Vec::with_capacity(p - 1);
        for i in 0..p - 1 {
            let t = R::one() / (R::one() + (-y[p + i].clone()).exp());
            let lo = R::one() / omegas[i].clone();
            let hi = R::one() / omegas[i + 1].clone();
            let k = lo.clone() + t * (hi.clone() - lo.clone());
            if !(k > lo && k < hi) {
                return None;
            }
            kappas.push(k);
        }
        Some(OptimizerState {
            omegas,
            kappas,
            kappa_bounds: KappaRange {
                kappa_min: kappa_min.to_f64(),
                kappa_max: KAPPA_MAX,
            },
            kappa_min: kappa_min.clone(),
            precision_digits: R::DIGITS,
        })
    }

    pub fn betas(&self) -> Result<Vec<R>, SrjError> {
        beta_from(&self.omegas, &self.kappas)
    }

    pub fn convert<S: Real>(&self) -> OptimizerState<S> {
        OptimizerState {
            omegas: self.omegas.iter().map(|v| S::from_f64(v.to_f64())).collect(),
            kappas: self.kappas.iter().map(|v| S::from_f64(v.to_f64())).collect(),
            kappa_min: S::from_f64(self.kappa_min.to_f64()),
            kappa_bounds: self.kappa_bounds,
            precision_digits: S::DIGITS,
        }
    }

    /// The schedule at `f64`, with β from its closed form.
    pub fn schedule(&self, n: usize) -> Result<WeightSchedule, SrjError> {
        let b = self.betas()?;
        Ok(WeightSchedule::unchecked(
            self.omegas.iter().map(Real::to_f64).collect(),
            b.iter().map(Real::to_f64).collect(),
            n,
        ))
    }
}

fn log_abs_one_minus<R: Real>(w: &R, k: &R, index: usize) -> Result<R, SrjError> {
    let f = (R::one() - w.clone() * k.clone()).abs();
    if f == R::zero() {
        return Err(SrjError::Pole {
            kappa: k.to_f64(),
            index,
        });
    }
    Ok(f.ln())
}

fn log_gamma_r<R: Real>(omegas: &[R], betas: &[R], k: &R) -> Result<R, SrjError> {
    let mut acc = R::zero();
    for (i, (w, b)) in omegas.iter().zip(betas).enumerate() {
        acc = acc + b.clone() * log_abs_one_minus(w, k, i + 1)?;
    }
    Ok(acc)
}

/// The 2P − 1 optimality conditions.
///
/// Entries 1..P: ln Γ(κ_m) − ln Γ(κ_i), with κ_P = 2. Entries P+1..2P−1:
/// ln|1 − ω_j κ_m| − ln|1 − ω_P κ_m| − κ_m Σ_i β_i (∂ω_i/∂β_j)/(1 − ω_i κ_m).
pub fn residual<R: Real>(state: &OptimizerState<R>) -> Result<Vec<R>, SrjError> {
    let p = state.levels();
    let w = &state.omegas;
    let km = &state.kappa_min;
    let b = beta_from(w, &state.kappas)?;
    let d = domega_dbeta(w, &state.kappas, &b)?;
    let g0 = log_gamma_r(w, &b, km)?;
    let mut r = Vec::with_capacity(2 * p - 1);
    for k in closed_form::extended_kappas(&state.kappas) {
        r.push(g0.clone() - log_gamma_r(w, &b, &k)?);
    }
    let lp = log_abs_one_minus(&w[p - 1], km, p)?;
    let denom: Vec<R> = w
        .iter()
        .map(|wi| R::one() - wi.clone() * km.clone())
        .collect();
    for j in 0..p - 1 {
        let mut s = R::zero();
        for i in 0..p {
            s = s + b[i].clone() * d[i][j].clone() / denom[i].clone();
        }
        r.push(log_abs_one_minus(&w[j], km, j + 1)? - lp.clone() - km.clone() * s);
    }
    Ok(r)
}

/// Residual as a function of the unknown vector; `None` when infeasible or
/// non-finite.
pub fn residual_of_unknowns<R: Real>(y: &[R], kappa_min: &R) -> Option<Vec<R>> {
    let s = OptimizerState::from_unknowns(y, kappa_min)?;
    let r = residual(&s).ok()?;
    r.iter().all(Real::is_finite).then_some(r)
}

/// Central-difference Jacobian of [`residual_of_unknowns`] at `state`.
pub fn residual_jacobian<R: Real>(state: &OptimizerState<R>) -> Option<Vec<Vec<R>>> {
    let km = state.kappa_min.clone();
    let f = move |y: &[R]| residual_of_unknowns(y, &km);
    let y = state.to_unknowns();
    lm::fd_jacobian(&f, &y, y.len())
}

/// Initial state for level `p` from lower-level solutions at the same κ_m.
pub fn initial_guess(
    p: usize,
    priors: &[WeightSchedule],
    kappa_min: f64,
) -> Result<OptimizerState<f64>, SrjError> {
    let omegas = guess::omega_guess(p, priors, kappa_min)?;
    let pos = vec![guess::DEFAULT_KAPPA_POS; p.saturating_sub(1)];
    let kappas = guess::kappa_guess(&omegas, &pos);
    OptimizerState::new(omegas, kappas, kappa_min)
}

/// Runs the damped Newton iteration from `start` to `tol`.
pub fn refine<R: Real>(
    start: &OptimizerState<R>,
    tol: f64,
    max_iterations: usize,
) -> (OptimizerState<R>, f64, usize, bool) {
    refine_damped(start, tol, max_iterations, LmSettings::default().initial_damping)
}

/// [`refine`] with an explicit initial damping; small values suit starts
/// already near the solution.
pub fn refine_damped<R: Real>(
    start: &OptimizerState<R>,
    tol: f64,
    max_iterations: usize,
    initial_damping: f64,
) -> (OptimizerState<R>, f64, usize, bool) {
    let km = start.kappa_min.clone();
    let f = |y: &[R]| residual_of_unknowns(y, &km);
    let settings = LmSettings {
        tol,
        max_iterations,
        initial_damping,
        ..LmSettings::default()
    };
    let out = levenberg_marquardt(f, start.to_unknowns(), settings);
    let state = OptimizerState::from_unknowns(&out.y, &km).unwrap_or_else(|| start.clone());
    (state, out.residual_norm, out.iterations, out.converged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// `f64` for P ≤ 8 and N ≤ 1024, extended otherwise.
    Auto,
    Double,
    Extended,
}

impl Precision {
    fn use_extended(self, p: usize, n: f64) -> bool {
        match self {
            Precision::Auto => p > 8 || n > 1024.0,
            Precision::Double => false,
            Precision::Extended => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub schedule: WeightSchedule,
    pub kappas: Vec<f64>,
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub precision_digits_used: u32,
    /// ω and β rendered at the working precision.
    pub omega_text: Vec<String>,
    pub beta_text: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub bc: BoundaryKind,
    pub d: usize,
    pub precision: Precision,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bc: BoundaryKind::Neumann,
            d: 2,
            precision: Precision::Auto,
            max_iterations: 300,
        }
    }
}

/// κ_m of a grid with `n` points on each of `d` axes at working precision.
pub fn kappa_min_for<R: Real>(n: usize, d: usize, bc: BoundaryKind) -> R {
    let s = (R::pi() / R::from_f64(2.0 * n as f64)).sin();
    let s2 = s.clone() * s;
    match bc {
        // (2/d) sin²(π/2N) for Neumann; (2/d) Σ_axes sin²(π/2N) for Dirichlet.
        BoundaryKind::Neumann => R::from_f64(2.0 / d as f64) * s2,
        BoundaryKind::Dirichlet => R::from_f64(2.0) * s2,
    }
}

/// Optimal P-level schedule for an N-point grid.
pub fn solve(p: usize, n: usize, bc: BoundaryKind, d: usize) -> Result<SolveReport, SrjError> {
    solve_with(
        p,
        n,
        SolveOptions {
            bc,
            d,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(p: usize, n: usize, opts: SolveOptions) -> Result<SolveReport, SrjError> {
    if !(1..=15).contains(&p) {
        return Err(SrjError::OutOfRange(format!("P = {p} not in 1..=15")));
    }
    if n < 16 {
        return Err(SrjError::OutOfRange(format!("N = {n} below 16")));
    }
    if !(1..=3).contains(&opts.d) {
        return Err(SrjError::OutOfRange(format!("d = {}", opts.d)));
    }
    let n_eq = effective_n(&vec![n; opts.d], opts.d, opts.bc)?;
    if p == 1 {
        let s = WeightSchedule::jacobi(n);
        return Ok(SolveReport {
            omega_text: vec!["1".into()],
            beta_text: vec!["1".into()],
            schedule: s,
            kappas: vec![],
            newton_iterations: 0,
            final_residual_norm: 0.0,
            precision_digits_used: f64::DIGITS,
        });
    }
    let path = continuation_path(p, n_eq, opts.max_iterations)?;
    if opts.precision.use_extended(p, n_eq) {
        finish::<Ext>(p, n, &path, opts, EXTENDED_TOL)
    } else {
        match finish::<f64>(p, n, &path, opts, DOUBLE_TOL) {
            Err(SrjError::NoConvergence { .. }) if opts.precision == Precision::Auto => {
                finish::<Ext>(p, n, &path, opts, EXTENDED_TOL)
            }
            other => other,
        }
    }
}

fn finish<R: Real>(
    p: usize,
    n: usize,
    path: &OptimizerState<f64>,
    opts: SolveOptions,
    tol: f64,
) -> Result<SolveReport, SrjError> {
    let km: R = kappa_min_for(n, opts.d, opts.bc);
    let mut start: OptimizerState<R> = path.convert();
    start.kappa_min = km;
    let (state, norm, its, ok) = refine_damped(&start, tol, opts.max_iterations, POLISH_DAMPING);
    if !ok {
        return Err(SrjError::NoConvergence {
            p,
            n: n as f64,
            best_residual: norm,
            iterations: its,
        });
    }
    let betas = state.betas()?;
    let digits = (R::DIGITS as usize).min(40);
    let schedule = state.schedule(n)?;
    Ok(SolveReport {
        omega_text: state.omegas.iter().map(|v| v.to_decimal(digits)).collect(),
        beta_text: betas.iter().map(|v| v.to_decimal(digits)).collect(),
        kappas: state.kappas.iter().map(Real::to_f64).collect(),
        schedule,
        newton_iterations: its,
        final_residual_norm: norm,
        precision_digits_used: R::DIGITS,
    })
}

fn path_refine(
    start: &OptimizerState<f64>,
    p: usize,
    n: f64,
    max_iterations: usize,
) -> Result<(OptimizerState<f64>, usize), SrjError> {
    let (s, norm, its, ok) = refine(start, DOUBLE_TOL, max_iterations);
    if ok || norm < PATH_TOL {
        Ok((s, its))
    } else {
        Err(SrjError::NoConvergence {
            p,
            n,
            best_residual: norm,
            iterations: its,
        })
    }
}

/// Solutions for levels 2..=p at a fixed κ_m.
pub fn level_continuation(
    p: usize,
    kappa_min: f64,
    max_iterations: usize,
) -> Result<Vec<OptimizerState<f64>>, SrjError> {
    let n = n_for_kappa_min(kappa_min);
    let mut states: Vec<OptimizerState<f64>> = Vec::new();
    let mut priors: Vec<WeightSchedule> = Vec::new();
    for level in 2..=p {
        let g = initial_guess(level, &priors, kappa_min)?;
        let (s, _) = path_refine(&g, level, n, max_iterations)?;
        priors.push(s.schedule(n.round() as usize)?);
        states.push(s);
    }
    Ok(states)
}

/// Moves a solved level-P state from its κ_m to the κ_m of grid `n_target`.
pub fn march_in_n(
    from: &OptimizerState<f64>,
    n_target: f64,
    max_iterations: usize,
) -> Result<OptimizerState<f64>, SrjError> {
    let p = from.levels();
    let mut cur = from.clone();
    let mut n_cur = n_for_kappa_min(cur.kappa_min);
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut step = N_STEP;
    while n_cur < n_target * (1.0 - 1e-12) {
        let n_next = (n_cur * step).min(n_target);
        let km_next = kappa_min_real(n_next, 2);
        // Per-component power law in N through the last two solutions.
        let exps: Vec<f64> = match &prev {
            Some((n_prev, w_prev)) => cur
                .omegas
                .iter()
                .zip(w_prev)
                .map(|(w, wp)| (w / wp).ln() / (n_cur / n_prev).ln())
                .collect(),
            None => (0..p)
                .map(|i| if i == 0 { 1.0 } else { 1.0 - i as f64 / (p - 1) as f64 })
                .collect(),
        };
        let ratio = n_next / n_cur;
        let mut omegas: Vec<f64> = cur
            .omegas
            .iter()
            .zip(&exps)
            .map(|(w, e)| w * ratio.powf(*e))
            .collect();
        if omegas.windows(2).any(|w| !(w[0] > w[1])) || !(1.0 / omegas[0] > km_next) {
            omegas = cur.omegas.clone();
        }
        let pos = guess::kappa_positions(&cur.omegas, &cur.kappas);
        let kappas = guess::kappa_guess(&omegas, &pos);
        let attempt = OptimizerState::new(omegas, kappas, km_next)
            .and_then(|g| path_refine(&g, p, n_next, max_iterations));
        match attempt {
            Ok((s, _)) => {
                prev = Some((n_cur, cur.omegas.clone()));
                cur = s;
                n_cur = n_next;
                step = (step * step).min(N_STEP);
            }
            Err(e) => {
                step = step.sqrt();
                if step < 1.0 + 1e-3 {
                    return Err(e);
                }
            }
        }
    }
    Ok(cur)
}

/// Double-precision solution for level `p` at the 2D-equivalent grid size
/// `n_eq`, before the final polish.
pub fn continuation_path(
    p: usize,
    n_eq: f64,
    max_iterations: usize,
) -> Result<OptimizerState<f64>, SrjError> {
    let n_base = n_eq.min(BASE_N);
    let levels = level_continuation(p, kappa_min_real(n_base, 2), max_iterations)?;
    let top = levels.last().cloned().ok_or(SrjError::InsufficientPriors { p, got: 0 })?;
    if n_eq > n_base {
        march_in_n(&top, n_eq, max_iterations)
    } else {
        Ok(top)
    }
}
