//! Damped Gauss-Newton (Levenberg-Marquardt) on a square residual with a
//! finite-difference Jacobian, generic over the working scalar.

use crate::scalar::Real;

/// Gaussian elimination with partial pivoting. `None` when singular.
pub fn solve_dense<R: Real>(mut a: Vec<Vec<R>>, mut b: Vec<R>) -> Option<Vec<R>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| {
            a[x][c]
                .abs()
                .partial_cmp(&a[y][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][c] == R::zero() || !a[piv][c].is_finite() {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c].clone() / a[c][c].clone();
            if f == R::zero() {
                continue;
            }
            for k in c..n {
                let v = a[r][k].clone() - f.clone() * a[c][k].clone();
                a[r][k] = v;
            }
            let v = b[r].clone() - f * b[c].clone();
            b[r] = v;
        }
    }
    let mut x = vec![R::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for k in r + 1..n {
            acc = acc - a[r][k].clone() * x[k].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    x.iter().all(Real::is_finite).then_some(x)
}

pub fn inf_norm<R: Real>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |m, x| R::max_of(m, x.abs()))
}

fn half_sq<R: Real>(v: &[R]) -> R {
    v.iter()
        .fold(R::zero(), |s, x| s + x.clone() * x.clone())
        / R::from_f64(2.0)
}

/// Central-difference Jacobian, step sqrt(eps)·max(1, |y_j|). `None` when a
/// probe leaves the domain of `f`.
pub fn fd_jacobian<R: Real, F>(f: &F, y: &[R], m: usize) -> Option<Vec<Vec<R>>>
where
    F: Fn(&[R]) -> Option<Vec<R>>,
{
    let n = y.len();
    let root_eps = R::epsilon().sqrt();
    let mut jac = vec![vec![R::zero(); n]; m];
    for j in 0..n {
        let h = root_eps.clone() * R::max_of(R::one(), y[j].abs());
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j] = y[j].clone() + h.clone();
        ym[j] = y[j].clone() - h.clone();
        let (rp, rm) = (f(&yp)?, f(&ym)?);
        let two_h = R::from_f64(2.0) * h;
        for i in 0..m {
            jac[i][j] = (rp[i].clone() - rm[i].clone()) / two_h.clone();
        }
    }
    Some(jac)
}

#[derive(Debug, Clone)]
pub struct LmOutcome<R> {
    pub y: Vec<R>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LmSettings {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_damping_tries: usize,
    pub initial_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            tol: 1e-12,
            max_iterations: 300,
            max_damping_tries: 60,
            initial_damping: 1e-3,
        }
    }
}

/// Minimizes ½‖f(y)‖² from `y0` until ‖f‖∞ < tol.
///
/// Each step solves (JᵀJ + μ·diag(JᵀJ)) δ = −Jᵀr. A step is accepted only
/// if `f` is defined there and the squared norm drops; μ shrinks by 3 on
/// acceptance and grows by 4 on rejection. `f` returning `None` marks an
/// infeasible point.
pub fn levenberg_marquardt<R: Real, F>(f: F, y0: Vec<R>, s: LmSettings) -> LmOutcome<R>
where
    F: Fn(&[R]) -> Option<Vec<R>>,
{
    let mut y = y0;
    let Some(mut r) = f(&y) else {
        return LmOutcome {
            y,
            residual_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    };
    let tol = R::from_f64(s.tol);
    let mut mu = R::from_f64(s.initial_damping);
    let mu_floor = R::from_f64(1e-15);
    let n = y.len();
    let m = r.len();
    for it in 0..s.max_iterations {
        let norm = inf_norm(&r);
        if norm < tol {
            return LmOutcome {
                y,
                residual_norm: norm.to_f64(),
                iterations: it,
                converged: true,
            };
        }
        let Some(jac) = fd_jacobian(&f, &y, m) else {
            break;
        };
        let mut jtj = vec![vec![R::zero(); n]; n];
        let mut g = vec![R::zero(); n];
        for a in 0..n {
            for b in a..n {
                let mut acc = R::zero();
                for row in &jac {
                    acc = acc + row[a].clone() * row[b].clone();
                }
                jtj[a][b] = acc.clone();
                jtj[b][a] = acc;
            }
            let mut acc = R::zero();
            for (row, ri) in jac.iter().zip(&r) {
                acc = acc + row[a].clone() * ri.clone();
            }
            g[a] = -acc;
        }
        let current = half_sq(&r);
        let mut accepted = false;
        for _ in 0..s.max_damping_tries {
            let mut damped = jtj.clone();
            for a in 0..n {
                let d = jtj[a][a].clone();
                damped[a][a] = d.clone() + mu.clone() * d;
            }
            if let Some(step) = solve_dense(damped, g.clone()) {
                let yn: Vec<R> = y
                    .iter()
                    .zip(&step)
                    .map(|(a, b)| a.clone() + b.clone())
                    .collect();
                if let Some(rn) = f(&yn) {
                    if half_sq(&rn) < current {
                        y = yn;
                        r = rn;
                        mu = R::max_of(mu / R::from_f64(3.0), mu_floor.clone());
                        accepted = true;
                        break;
                    }
                }
            }
            mu = mu * R::from_f64(4.0);
        }
        if !accepted {
            return LmOutcome {
                residual_norm: inf_norm(&r).to_f64(),
                y,
                iterations: it,
                converged: false,
            };
        }
    }
    let norm = inf_norm(&r);
    LmOutcome {
        converged: norm < tol,
        residual_norm: norm.to_f64(),
        y,
        iterations: s.max_iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_small_system() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let x = solve_dense(a, vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn lm_solves_rosenbrock_roots() {
        // r = (10(y1 − y0²), 1 − y0) has its only root at (1, 1).
        let f = |y: &[f64]| Some(vec![10.0 * (y[1] - y[0] * y[0]), 1.0 - y[0]]);
        let out = levenberg_marquardt(f, vec![-1.2, 1.0], LmSettings::default());
        assert!(out.converged);
        assert!((out.y[0] - 1.0).abs() < 1e-10 && (out.y[1] - 1.0).abs() < 1e-10);
    }
}
