//! Starting points for the nonlinear solve.

use crate::amplification::WeightSchedule;
use crate::error::SrjError;

/// Ladder exponents e_i with ω_i⁻¹ = ω_1⁻¹ · (ω_1/ω_P)^{e_i / (2(P−1))}.
///
/// Odd P skips the even exponents around the middle value P − 1; even P
/// leaves a double gap around P − 1.
pub fn ladder_exponents(p: usize) -> Vec<usize> {
    match p {
        0 => vec![],
        1 => vec![0],
        2 => vec![0, 2],
        _ => {
            let mut ex = vec![0];
            if p % 2 == 1 {
                ex.extend((1..p - 3).step_by(2));
                ex.push(p - 1);
                ex.extend((p + 2..2 * p - 2).step_by(2));
            } else {
                ex.extend((1..p - 4).step_by(2));
                ex.push(p - 2);
                ex.push(p);
                ex.extend((p + 3..2 * p - 2).step_by(2));
            }
            ex.push(2 * p - 2);
            ex
        }
    }
}

/// Weights spaced roughly logarithmically between ω_1 and ω_P.
pub fn omega_ladder(p: usize, w1: f64, wp: f64) -> Vec<f64> {
    if p == 1 {
        return vec![w1];
    }
    let ratio = (w1 / wp).ln();
    let denom = 2.0 * (p - 1) as f64;
    ladder_exponents(p)
        .into_iter()
        .map(|e| w1 * (-(e as f64) / denom * ratio).exp())
        .collect()
}

/// Interior extrema placed at a fixed fraction `pos` of each log gap:
/// κ_i = ω_i⁻¹ · (ω_i/ω_{i+1})^{pos}.
pub fn kappa_guess(omegas: &[f64], pos: &[f64]) -> Vec<f64> {
    omegas
        .windows(2)
        .zip(pos)
        .map(|(w, &t)| (1.0 / w[0]) * (w[0] / w[1]).powf(t))
        .collect()
}

/// Log-gap fraction used when no better estimate exists.
pub const DEFAULT_KAPPA_POS: f64 = 0.4;

/// Fraction of the log gap at which each κ_i sits; inverse of [`kappa_guess`].
pub fn kappa_positions(omegas: &[f64], kappas: &[f64]) -> Vec<f64> {
    omegas
        .windows(2)
        .zip(kappas)
        .map(|(w, &k)| (k * w[0]).ln() / (w[0] / w[1]).ln())
        .collect()
}

fn polyfit2(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    // Normal equations for c0 + c1 x + c2 x², centered for conditioning.
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = x - xm;
        let pw = [1.0, t, t * t];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += pw[a] * pw[b];
            }
            r[a] += pw[a] * y;
        }
    }
    let sol = super::lm::solve_dense(m.iter().map(|r| r.to_vec()).collect(), r.to_vec())
        .unwrap_or_else(|| vec![ys[ys.len() - 1], 0.0, 0.0]);
    // Shift back to the raw variable.
    let (c0, c1, c2) = (sol[0], sol[1], sol[2]);
    [c0 - c1 * xm + c2 * xm * xm, c1 - 2.0 * c2 * xm, c2]
}

fn hyperbola_fit(xs: &[f64], ys: &[f64], x_new: f64) -> f64 {
    // y = A/(x − C) + D: scan C outside the data range, least squares in (A, D).
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut best: Option<(f64, f64)> = None;
    let steps = 4000;
    let candidates = (0..steps)
        .map(|i| lo - 50.0 + (49.99 * i as f64 / (steps - 1) as f64))
        .chain((0..steps).map(|i| hi + 0.01 + 49.99 * i as f64 / (steps - 1) as f64));
    for c in candidates {
        if (x_new - c).abs() < 1e-9 {
            continue;
        }
        let u: Vec<f64> = xs.iter().map(|x| 1.0 / (x - c)).collect();
        let n = xs.len() as f64;
        let (su, suu) = (u.iter().sum::<f64>(), u.iter().map(|v| v * v).sum::<f64>());
        let sy = ys.iter().sum::<f64>();
        let suy = u.iter().zip(ys).map(|(a, b)| a * b).sum::<f64>();
        let det = n * suu - su * su;
        if det.abs() < 1e-300 {
            continue;
        }
        let a = (n * suy - su * sy) / det;
        let d = (sy - a * su) / n;
        let err: f64 = u
            .iter()
            .zip(ys)
            .map(|(ui, yi)| (a * ui + d - yi).powi(2))
            .sum();
        if best.map_or(true, |(e, _)| err < e) {
            best = Some((err, a / (x_new - c) + d));
        }
    }
    best.map(|b| b.1).unwrap_or(ys[ys.len() - 1])
}

/// Extrapolates a sequence of values indexed by P to `x_new`.
///
/// Two points give a line, three a parabola. Four or more fit a parabola
/// when the second differences change sign or are flat (below 10⁻³ of the
/// mean magnitude), and a hyperbola otherwise.
pub fn conic_extrapolate(xs: &[f64], ys: &[f64], x_new: f64) -> f64 {
    let n = xs.len();
    match n {
        0 => f64::NAN,
        1 => ys[0],
        2 => ys[1] + (ys[1] - ys[0]) * (x_new - xs[1]) / (xs[1] - xs[0]),
        3 => {
            let c = polyfit2(xs, ys);
            c[0] + c[1] * x_new + c[2] * x_new * x_new
        }
        _ => {
            let d2: Vec<f64> = ys.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
            let mean = ys.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
            let sign_change = d2.iter().any(|v| v.signum() != d2[0].signum());
            let flat = d2.iter().any(|v| v.abs() < 1e-3 * mean);
            if sign_change || flat {
                let c = polyfit2(xs, ys);
                c[0] + c[1] * x_new + c[2] * x_new * x_new
            } else {
                hyperbola_fit(xs, ys, x_new)
            }
        }
    }
}

/// First guess for ω at level `p` given solved schedules at the same κ_m.
///
/// P = 2 needs no prior: ω = {0.5/κ_m, 1}. P = 3 accepts one prior and
/// moves ω_1 halfway (in log) toward 1/κ_m. Larger P needs at least two
/// priors and extrapolates ω_1 and ω_P from the last four.
pub fn omega_guess(p: usize, priors: &[WeightSchedule], kappa_min: f64) -> Result<Vec<f64>, SrjError> {
    if p == 1 {
        return Ok(vec![1.0]);
    }
    if p == 2 {
        return Ok(vec![0.5 / kappa_min, 1.0]);
    }
    let mut pri: Vec<&WeightSchedule> = priors.iter().filter(|s| s.levels() < p && s.levels() >= 2).collect();
    pri.sort_by_key(|s| s.levels());
    pri.dedup_by_key(|s| s.levels());
    if pri.is_empty() || (pri.len() < 2 && p > 3) {
        return Err(SrjError::InsufficientPriors { p, got: pri.len() });
    }
    let (w1, wp) = if pri.len() == 1 {
        let s = pri[0];
        let w1 = s.omegas[0] * ((1.0 / kappa_min) / s.omegas[0]).sqrt();
        (w1, 0.87 * s.omegas[s.levels() - 1])
    } else {
        let tail = &pri[pri.len().saturating_sub(4)..];
        let xs: Vec<f64> = tail.iter().map(|s| s.levels() as f64).collect();
        let y1: Vec<f64> = tail.iter().map(|s| s.omegas[0]).collect();
        let yp: Vec<f64> = tail.iter().map(|s| s.omegas[s.levels() - 1]).collect();
        let last = tail[tail.len() - 1];
        let mut w1 = conic_extrapolate(&xs, &y1, p as f64);
        let mut wp = conic_extrapolate(&xs, &yp, p as f64);
        // Keep the anchors inside the feasible cone.
        let w1_last = last.omegas[0];
        let wp_last = last.omegas[last.levels() - 1];
        if !(w1 > w1_last && w1 < 1.0 / kappa_min) {
            w1 = (w1_last * (1.0 / kappa_min)).sqrt();
        }
        if !(wp > 0.5 && wp < wp_last) {
            wp = 0.5 * (0.5 + wp_last);
        }
        (w1, wp)
    };
    Ok(omega_ladder(p, w1, wp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_exponent_patterns() {
        assert_eq!(ladder_exponents(2), vec![0, 2]);
        assert_eq!(ladder_exponents(3), vec![0, 2, 4]);
        assert_eq!(ladder_exponents(4), vec![0, 2, 4, 6]);
        assert_eq!(ladder_exponents(5), vec![0, 1, 4, 7, 8]);
        assert_eq!(ladder_exponents(6), vec![0, 1, 4, 6, 9, 10]);
        assert_eq!(ladder_exponents(7), vec![0, 1, 3, 6, 9, 11, 12]);
        for p in 2..=15 {
            let e = ladder_exponents(p);
            assert_eq!(e.len(), p, "P = {p}");
            assert!(e.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(*e.last().unwrap(), 2 * p - 2);
        }
    }

    #[test]
    fn conic_extrapolation_reproduces_exact_shapes() {
        let xs = [2.0, 3.0, 4.0, 5.0];
        let line: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((conic_extrapolate(&xs[..2], &line[..2], 6.0) - 19.0).abs() < 1e-12);
        let par: Vec<f64> = xs.iter().map(|x| x * x - 2.0 * x).collect();
        assert!((conic_extrapolate(&xs[..3], &par[..3], 6.0) - 24.0).abs() < 1e-9);
        let hyp: Vec<f64> = xs.iter().map(|x| -10.0 / (x + 1.5) + 7.0).collect();
        let v = conic_extrapolate(&xs, &hyp, 6.0);
        assert!((v - (-10.0 / 7.5 + 7.0)).abs() < 1e-3, "{v}");
    }
}
