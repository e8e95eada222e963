//! Amplification factor of a relaxation schedule.
//!
//! A weight ω damps the Fourier mode with eigenvalue parameter κ by
//! |1 − ωκ| per sweep. Γ(κ) is the geometric mean of those factors over a
//! schedule, weighted by the repetition fractions β. The spectrum of the
//! discrete Laplacian covers [κ_m, 2].

use crate::error::SrjError;

/// Upper end of the discrete Laplacian spectrum, for every dimension and
/// boundary kind.
pub const KAPPA_MAX: f64 = 2.0;

/// Linear-space factors below this magnitude make Γ exactly zero.
const ZERO_FACTOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRange {
    pub kappa_min: f64,
    pub kappa_max: f64,
}

impl KappaRange {
    pub fn new(kappa_min: f64) -> Result<Self, SrjError> {
        if !(kappa_min > 0.0 && kappa_min < KAPPA_MAX) {
            return Err(SrjError::OutOfRange(format!(
                "kappa_min {kappa_min} not in (0, 2)"
            )));
        }
        Ok(KappaRange {
            kappa_min,
            kappa_max: KAPPA_MAX,
        })
    }

    /// Range of a 2D Neumann grid with `n` points per axis.
    pub fn for_grid(n: f64) -> Self {
        KappaRange {
            kappa_min: kappa_min_real(n, 2),
            kappa_max: KAPPA_MAX,
        }
    }
}

/// Relaxation weights ω with their real-valued repetition fractions β.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    pub omegas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n: usize,
    pub rho: f64,
}

impl WeightSchedule {
    /// Builds a schedule with ρ recomputed from ω and β, checking every
    /// invariant.
    pub fn new(omegas: Vec<f64>, betas: Vec<f64>, n: usize) -> Result<Self, SrjError> {
        let s = Self::unchecked(omegas, betas, n);
        s.validate(1e-12)?;
        Ok(s)
    }

    /// Builds a schedule without invariant checks; ρ is Σωβ.
    pub fn unchecked(omegas: Vec<f64>, betas: Vec<f64>, n: usize) -> Self {
        let rho = omegas.iter().zip(&betas).map(|(w, b)| w * b).sum();
        WeightSchedule {
            omegas,
            betas,
            n,
            rho,
        }
    }

    /// Plain Jacobi: a single unit weight.
    pub fn jacobi(n: usize) -> Self {
        Self::unchecked(vec![1.0], vec![1.0], n)
    }

    pub fn levels(&self) -> usize {
        self.omegas.len()
    }

    /// Checks ordering, ranges, Σβ = 1 within `sum_tol` and ρ = Σωβ.
    pub fn validate(&self, sum_tol: f64) -> Result<(), SrjError> {
        let p = self.omegas.len();
        let bad = |m: String| Err(SrjError::InvalidSchedule(m));
        if p == 0 || self.betas.len() != p {
            return bad(format!("{} omegas vs {} betas", p, self.betas.len()));
        }
        if self.omegas.windows(2).any(|w| !(w[0] > w[1])) {
            return bad("omegas not strictly decreasing".into());
        }
        let wp = self.omegas[p - 1];
        if p >= 2 && !(wp > 0.0 && wp < 1.0) {
            return bad(format!("omega_P = {wp} not in (0, 1)"));
        }
        if p >= 2 && !(self.omegas[0] > 1.0) {
            return bad(format!("omega_1 = {} not above 1", self.omegas[0]));
        }
        if p == 1 && !(self.omegas[0] > 0.0 && self.omegas[0] <= 1.0) {
            return bad(format!("single weight {} not in (0, 1]", self.omegas[0]));
        }
        if p >= 2 && self.betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return bad("betas not in (0, 1)".into());
        }
        let sum: f64 = self.betas.iter().sum();
        if (sum - 1.0).abs() > sum_tol {
            return bad(format!("sum of betas = {sum}"));
        }
        let rho = performance_index(self);
        if (rho - self.rho).abs() > 1e-10 * rho.abs() {
            return bad(format!("rho {} differs from sum(omega*beta) = {rho}", self.rho));
        }
        Ok(())
    }
}

/// ln Γ(κ) = Σ β_i ln|1 − ω_i κ|; −∞ when a factor vanishes.
pub fn log_gamma(s: &WeightSchedule, kappa: f64) -> f64 {
    let mut acc = 0.0;
    for (w, b) in s.omegas.iter().zip(&s.betas) {
        let f = (1.0 - w * kappa).abs();
        if f < ZERO_FACTOR {
            return f64::NEG_INFINITY;
        }
        acc += b * f.ln();
    }
    acc
}

/// Γ(κ) = Π |1 − ω_i κ|^{β_i}.
pub fn gamma(s: &WeightSchedule, kappa: f64) -> f64 {
    log_gamma(s, kappa).exp()
}

/// Σ β_i ω_i / (1 − κ ω_i). Equals −d ln Γ/dκ and vanishes at the interior
/// extrema of Γ.
pub fn log_gamma_slope(s: &WeightSchedule, kappa: f64) -> Result<f64, SrjError> {
    let mut acc = 0.0;
    for (i, (w, b)) in s.omegas.iter().zip(&s.betas).enumerate() {
        let d = 1.0 - kappa * w;
        if d == 0.0 {
            return Err(SrjError::Pole { kappa, index: i + 1 });
        }
        acc += b * w / d;
    }
    Ok(acc)
}

/// ρ = Σ ω_i β_i, the expected speed-up over Jacobi.
pub fn performance_index(s: &WeightSchedule) -> f64 {
    s.omegas.iter().zip(&s.betas).map(|(w, b)| w * b).sum()
}

/// Smallest mode parameter of a Neumann grid with `n` points per axis in
/// `d` dimensions: (2/d)·sin²(π/(2N)).
pub fn kappa_min(n: usize, d: usize) -> f64 {
    kappa_min_real(n as f64, d)
}

/// [`kappa_min`] for a real-valued (effective) N.
pub fn kappa_min_real(n: f64, d: usize) -> f64 {
    let s = (std::f64::consts::PI / (2.0 * n)).sin();
    2.0 / d as f64 * s * s
}

/// Inverse of [`kappa_min_real`] at d = 2.
pub fn n_for_kappa_min(kappa_min: f64) -> f64 {
    std::f64::consts::PI / (2.0 * kappa_min.sqrt().asin())
}

/// Size of the 2D Neumann grid sharing the problem's κ_m.
///
/// Neumann uses the largest axis; Dirichlet sums the per-axis sin² terms.
pub fn effective_n(sizes: &[usize], d: usize, bc: BoundaryKind) -> Result<f64, SrjError> {
    if sizes.is_empty() || sizes.iter().any(|&n| n < 2) || !(1..=3).contains(&d) {
        return Err(SrjError::OutOfRange(format!(
            "sizes {sizes:?} with d = {d}"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let arg = match bc {
        BoundaryKind::Neumann => {
            let n = *sizes.iter().max().unwrap() as f64;
            (2.0 / d as f64).sqrt() * (half_pi / n).sin()
        }
        BoundaryKind::Dirichlet => {
            if sizes.len() != d {
                return Err(SrjError::OutOfRange(format!(
                    "{} sizes for d = {d}",
                    sizes.len()
                )));
            }
            let sum: f64 = sizes
                .iter()
                .map(|&n| (half_pi / n as f64).sin().powi(2))
                .sum();
            (2.0 / d as f64 * sum).sqrt()
        }
    };
    if arg >= 1.0 {
        return Err(SrjError::OutOfRange(format!("grid {sizes:?} too coarse")));
    }
    Ok(half_pi / arg.asin())
}

/// Interior extrema of Γ: one root of the slope in each gap
/// (1/ω_i, 1/ω_{i+1}), located by bisection.
pub fn interior_extrema(s: &WeightSchedule) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.levels().saturating_sub(1));
    for pair in s.omegas.windows(2) {
        let (a0, b0) = (1.0 / pair[0], 1.0 / pair[1]);
        // The slope runs from −∞ just above 1/ω_i to +∞ just below 1/ω_{i+1}.
        let (mut lo, mut hi) = (a0, b0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match log_gamma_slope(s, mid) {
                Ok(v) if v < 0.0 => lo = mid,
                Ok(_) => hi = mid,
                Err(_) => break,
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Γ at κ_m, at every interior extremum and at κ = 2, in that order.
pub fn extremal_values(s: &WeightSchedule, range: KappaRange) -> Vec<f64> {
    let mut v = vec![gamma(s, range.kappa_min)];
    v.extend(interior_extrema(s).into_iter().map(|k| gamma(s, k)));
    v.push(gamma(s, range.kappa_max));
    v
}

/// Largest relative spread among [`extremal_values`].
pub fn equal_maxima_spread(s: &WeightSchedule, range: KappaRange) -> f64 {
    let v = extremal_values(s, range);
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / max
}

/// Largest Γ on a uniform grid of `points` over the range.
pub fn max_gamma_on_grid(s: &WeightSchedule, range: KappaRange, points: usize) -> f64 {
    let h = (range.kappa_max - range.kappa_min) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let k = if i + 1 == points {
                range.kappa_max
            } else {
                range.kappa_min + i as f64 * h
            };
            gamma(s, k)
        })
        .fold(f64::MIN, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_p2() -> WeightSchedule {
        WeightSchedule::unchecked(vec![321.074, 0.968096], vec![0.00993673, 0.990063], 100)
    }

    #[test]
    fn gamma_trivial_cases() {
        let j = WeightSchedule::jacobi(10);
        assert_eq!(gamma(&j, 0.0), 1.0);
        assert_eq!(gamma(&j, 1.0), 0.0);
        assert_eq!(log_gamma_slope(&j, 0.0).unwrap(), 1.0);
        assert_eq!(performance_index(&j), 1.0);
        assert!(matches!(
            log_gamma_slope(&j, 1.0),
            Err(SrjError::Pole { index: 1, .. })
        ));
    }

    #[test]
    fn table1_p2_equalizes_end_points() {
        let s = table1_p2();
        let a = gamma(&s, kappa_min(100, 2));
        let b = gamma(&s, 2.0);
        assert!(((a - b) / a).abs() < 1e-4, "{a} {b}");
        assert!((performance_index(&s) - 4.15).abs() < 0.005);
    }

    #[test]
    fn slope_vanishes_at_bisected_extremum() {
        let s = table1_p2();
        let k = interior_extrema(&s);
        assert_eq!(k.len(), 1);
        assert!(k[0] > 1.0 / 321.074 && k[0] < 1.0 / 0.968096);
        assert!(log_gamma_slope(&s, k[0]).unwrap().abs() < 1e-8);
    }

    #[test]
    fn slope_sign_at_kappa_max_matches_finite_difference() {
        let s = table1_p2();
        let slope = log_gamma_slope(&s, 2.0).unwrap();
        assert!(slope < 0.0);
        let h = 1e-6;
        let fd = (log_gamma(&s, 2.0 + h) - log_gamma(&s, 2.0 - h)) / (2.0 * h);
        // Γ rises toward κ = 2, so ln Γ has positive derivative there.
        assert!(fd > 0.0);
        assert!(((-slope - fd) / fd).abs() < 1e-4);
    }

    #[test]
    fn kappa_min_values() {
        let s = (std::f64::consts::PI / 200.0).sin().powi(2);
        assert!((kappa_min(100, 2) - s).abs() < 1e-18);
        assert!((kappa_min(100, 2) - 2.467e-4).abs() < 1e-7);
        assert!((kappa_min(2, 2) - 0.5).abs() < 1e-15);
        assert!((kappa_min(100, 1) - 2.0 * s).abs() < 1e-18);
        assert!((n_for_kappa_min(kappa_min(100, 2)) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn effective_n_values() {
        let n2 = effective_n(&[100, 100], 2, BoundaryKind::Neumann).unwrap();
        assert!((n2 - 100.0).abs() < 1e-9);
        let n3 = effective_n(&[100, 100, 100], 3, BoundaryKind::Neumann).unwrap();
        assert!((n3 - 100.0 * 1.5f64.sqrt()).abs() < 0.5, "{n3}");
        let nd = effective_n(&[585, 280], 2, BoundaryKind::Dirichlet).unwrap();
        assert!((nd - 252.56).abs() < 0.005, "{nd}");
    }

    #[test]
    fn schedule_validation_rejects_bad_sums() {
        let e = WeightSchedule::new(vec![321.074, 0.968096], vec![0.1, 0.5], 100);
        assert!(matches!(e, Err(SrjError::InvalidSchedule(_))));
        assert!(WeightSchedule::new(vec![2.0, 0.5], vec![0.25, 0.75], 10).is_ok());
    }
}
