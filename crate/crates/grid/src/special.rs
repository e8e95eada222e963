//! Spherical Bessel functions of the first kind and real spherical
//! harmonics.

use std::f64::consts::PI;

const RESCALE: f64 = 1e250;

/// j_l(x) for x ≥ 0.
///
/// Upward recurrence from j_0, j_1 when x > l; otherwise Miller's downward
/// recurrence normalized by j_0 = sin x / x.
pub fn spherical_bessel_j(l: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    if x > l as f64 {
        let (mut a, mut b) = (j0, j1);
        for n in 1..l {
            let c = (2 * n + 1) as f64 / x * b - a;
            a = b;
            b = c;
        }
        return b;
    }
    let start = l + 20 + (40.0 * (l as f64 + x)).sqrt() as usize;
    // j_{n−1} = (2n + 1)/x · j_n − j_{n+1}, started from (j_{start+1}, j_start) = (0, 1).
    let (mut up, mut cur) = (0.0f64, 1e-30f64);
    let mut target = 0.0;
    for n in (1..=start).rev() {
        let down = (2 * n + 1) as f64 / x * cur - up;
        up = cur;
        cur = down;
        if n - 1 == l {
            target = cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            up /= RESCALE;
            target /= RESCALE;
        }
    }
    // `cur` now holds the unnormalized j_0.
    target * (j0 / cur)
}

/// First positive zero of j_l, bisected to full double precision.
pub fn spherical_bessel_first_root(l: usize) -> f64 {
    // j_l > 0 on (0, first root); the root lies above l + 1.
    let step = 0.05;
    let mut lo = (l as f64 + 1.0).max(1.0);
    while spherical_bessel_j(l, lo + step) > 0.0 {
        lo += step;
    }
    let mut hi = lo + step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spherical_bessel_j(l, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Associated Legendre function P_l^m(x), m ≥ 0, with the Condon-Shortley
/// phase.
pub fn associated_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    let mut pm0 = pmm;
    for n in m + 2..=l {
        let p = ((2 * n - 1) as f64 * x * pm1 - (n + m - 1) as f64 * pm0) / (n - m) as f64;
        pm0 = pm1;
        pm1 = p;
    }
    pm1
}

/// sqrt((2l + 1)/(4π) · (l − m)!/(l + m)!).
fn harmonic_norm(l: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in l - m + 1..=l + m {
        ratio /= k as f64;
    }
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Real part of the orthonormal spherical harmonic Y_l^m(θ, φ), |m| ≤ l.
pub fn real_spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let v = harmonic_norm(l, am) * associated_legendre(l, am, theta.cos()) * (am as f64 * phi).cos();
    // Y_l^{−m} = (−1)^m conj(Y_l^m).
    if m < 0 && am % 2 == 1 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_match_closed_forms() {
        // The closed forms cancel at small x; the bound scales with that loss.
        for &x in &[0.1f64, 0.7, 1.5, 3.0, 8.0, 25.0] {
            let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
            assert!((spherical_bessel_j(2, x) - j2).abs() < 1e-14 / (x * x * x), "x = {x}");
            let j1 = x.sin() / (x * x) - x.cos() / x;
            assert!((spherical_bessel_j(1, x) - j1).abs() < 1e-15 / (x * x));
        }
        assert_eq!(spherical_bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn small_argument_limit() {
        // j_l(x) ≈ x^l / (2l + 1)!! for x ≪ 1.
        let x = 1e-3;
        let df: f64 = (1..=11).step_by(2).map(|k| k as f64).product();
        assert!((spherical_bessel_j(5, x) / (x.powi(5) / df) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn first_roots() {
        assert!((spherical_bessel_first_root(0) - PI).abs() < 1e-12);
        assert!((spherical_bessel_first_root(1) - 4.493409457909064).abs() < 1e-11);
        assert!((spherical_bessel_first_root(2) - 5.763459196894550).abs() < 1e-11);
    }

    #[test]
    fn harmonic_values() {
        assert!((real_spherical_harmonic(0, 0, 1.2, 0.4) - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((real_spherical_harmonic(1, 0, 0.0, 0.0) - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        // Re Y_1^1 = −sqrt(3/8π) sin θ cos φ.
        let (t, p) = (0.9f64, 0.3f64);
        let want = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * p.cos();
        assert!((real_spherical_harmonic(1, 1, t, p) - want).abs() < 1e-15);
        assert!((real_spherical_harmonic(1, -1, t, p) + want).abs() < 1e-15);
    }
}
