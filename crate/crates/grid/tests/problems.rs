use std::f64::consts::PI;

use srj_core::amplification::kappa_min;
use srj_core::params_db::ParameterTable;
use srj_core::scheduler::{quantize, CycleSchedule, QuantizeStrategy};
use srj_grid::problems::{
    grad_shafranov, gs_inner_b, gs_region_b, laplace2d_neumann, poisson2d_dirichlet, spherical_poisson, GsTest,
    SphericalSourceSpec, GS_THETA1, GS_THETA2, SERIES_MAX_TERMS,
};
use srj_grid::solvers::{jacobi_solve, srj_solve, weighted_jacobi_sweep};
use srj_grid::special::{real_spherical_harmonic, spherical_bessel_first_root, spherical_bessel_j};

fn cycle(p: usize, n: usize) -> CycleSchedule {
    let row = ParameterTable::shipped().lookup(p, n).unwrap();
    quantize(&row, QuantizeStrategy::Floor).unwrap()
}

#[test]
fn poisson_boundary_and_exact_solution() {
    let case = poisson2d_dirichlet(16, 8).unwrap();
    let g = &case.problem;
    for ghost in [g.flat(&[0, 1]), g.flat(&[17, 4]), g.flat(&[5, 9])] {
        let p = g.position(ghost);
        assert_eq!(g.u[ghost], -(p[0] * p[1]).exp());
    }
    for i in g.interior_indices() {
        let p = g.position(i);
        assert_eq!(case.exact[i], -(p[0] * p[1]).exp());
    }
}

#[test]
fn plain_jacobi_converges_on_the_poisson_problem() {
    let mut case = poisson2d_dirichlet(32, 16).unwrap();
    let h = jacobi_solve(&mut case.problem, 1e-10, 1_000_000).unwrap();
    assert!(h.converged, "{} iterations", h.iterations);
    assert!(case.error() < 1e-3);
}

#[test]
fn poisson_error_is_second_order() {
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let mut case = poisson2d_dirichlet(n, n).unwrap();
        let h = srj_solve(&mut case.problem, &cycle(10, n), 1e-13, 1_000_000).unwrap();
        assert!(h.converged);
        errs.push(case.error());
    }
    let ratio = errs[0] / errs[1];
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn slowest_neumann_mode_matches_kappa_min() {
    for n in [16usize, 64] {
        let mut g = laplace2d_neumann(n).unwrap();
        g.set_interior(|p| (PI * p[0]).cos());
        let probe = g.flat(&[1, n / 2]);
        let before = g.u[probe];
        weighted_jacobi_sweep(&mut g, 1.0).unwrap();
        let measured = 1.0 - g.u[probe] / before;
        assert!((measured / kappa_min(n, 2) - 1.0).abs() < 1e-9, "N={n}");
    }
}

#[test]
fn bessel_roots() {
    assert!((spherical_bessel_first_root(0) - PI).abs() < 1e-12);
    // Independent bracket: j_1(x) = sin x/x² − cos x/x changes sign near 4.4934.
    let j1 = |x: f64| x.sin() / (x * x) - x.cos() / x;
    let r1 = spherical_bessel_first_root(1);
    assert!(j1(r1 - 1e-9) > 0.0 && j1(r1 + 1e-9) < 0.0);
    assert!((r1 - 4.493409).abs() < 1e-6);
    assert!((spherical_bessel_first_root(2) - 5.763459).abs() < 1e-6);
    for l in [5usize, 20, 60] {
        let r = spherical_bessel_first_root(l);
        assert!(spherical_bessel_j(l, r).abs() < 1e-13, "l={l}");
        assert!(spherical_bessel_j(l, 0.98 * r) > 0.0);
    }
}

#[test]
fn harmonics_are_orthonormal() {
    // Gauss-Legendre in cos θ (degree 8 exact for the l ≤ 2 products),
    // midpoint in φ.
    let nodes = [
        (-0.960_289_856_497_536_3f64, 0.101_228_536_290_376_26),
        (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
        (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
        (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
        (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
        (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    ];
    let np = 16;
    let integrate = |f: &dyn Fn(f64, f64) -> f64| {
        let mut acc = 0.0;
        for &(x, w) in &nodes {
            for k in 0..np {
                let phi = (k as f64 + 0.5) * 2.0 * PI / np as f64;
                acc += w * 2.0 * PI / np as f64 * f(x.acos(), phi);
            }
        }
        acc
    };
    let cross = integrate(&|t, p| real_spherical_harmonic(2, 0, t, p) * real_spherical_harmonic(0, 0, t, p));
    assert!(cross.abs() < 1e-6);
    let norm = integrate(&|t, p| real_spherical_harmonic(2, 0, t, p).powi(2));
    assert!((norm - 1.0).abs() < 1e-6);
}

#[test]
fn spherical_coefficients() {
    let mut s = SphericalSourceSpec::new(1).unwrap();
    assert_eq!(s.n_max, Some(0));
    // b_0 = a_0 k_0 j_1(k_0) with j_1(π) = 1/π.
    assert!((s.b(0) - 1.0).abs() < 1e-14);
    for l in [0usize, 2, 4, 10] {
        let r = 1.0 - 1e-13;
        assert!(s.source_radial(l, r).abs() < 1e-10, "l={l}");
        // Interior and exterior branches meet at r = 1.
        let inside = s.solution_radial(l, 1.0);
        let outside = s.solution_radial(l, 1.0 + 1e-12);
        assert!((inside - outside).abs() < 1e-10);
    }
}

#[test]
fn series_terminates_for_every_shipped_case() {
    for (d, n) in [(1usize, 64usize), (2, 64), (2, 128), (3, 16), (3, 32)] {
        let case = spherical_poisson(d, n).unwrap();
        let counts: Vec<usize> = case
            .description
            .split(|c: char| !c.is_ascii_digit())
            .filter_map(|w| w.parse().ok())
            .collect();
        let terms = &counts[counts.len() - 2..];
        assert!(terms.iter().all(|&t| t < SERIES_MAX_TERMS), "{}", case.description);
    }
}

#[test]
fn series_increments_decrease_after_the_first_term() {
    for d in [2usize, 3] {
        let mut spec = SphericalSourceSpec::new(d).unwrap();
        let rs: Vec<f64> = (1..=32).map(|i| (i as f64 - 0.5) / 32.0).collect();
        let angles: Vec<(f64, f64)> = (1..=16)
            .flat_map(|j| (1..=4).map(move |k| ((j as f64 - 0.5) * PI / 16.0, k as f64 * 0.7)))
            .collect();
        let sum = spec.sum(&rs, &angles, |s, l, r| s.source_radial(l, r)).unwrap();
        assert!(sum.terms < SERIES_MAX_TERMS);
        for w in sum.increments[1..].windows(2) {
            assert!(w[1] < w[0], "d={d}: {:?}", sum.increments);
        }
    }
}

#[test]
fn spherical_source_vanishes_at_the_surface() {
    for d in [1usize, 2, 3] {
        let mut spec = SphericalSourceSpec::new(d).unwrap();
        let angles = [(0.4, 0.3), (1.3, 2.0), (2.9, 5.5)];
        let sum = spec.sum(&[1.0 - 1e-14], &angles, |s, l, r| s.source_radial(l, r)).unwrap();
        assert!(sum.values.iter().all(|v| v.abs() < 1e-12), "d={d}");
    }
}

#[test]
fn spherical_effective_matrix_is_diagonally_dominant() {
    let n = 64;
    let case = spherical_poisson(1, n).unwrap();
    let g = &case.problem;
    let rows = g.effective_rows();
    assert_eq!(rows.len(), n - 1);

    // First unknown after folding u_0 = u_1 = u_2; the r² scaling makes
    // the coefficients independent of Δr.
    let (first, row) = rows.iter().min_by_key(|(i, _)| *i).unwrap();
    let coeff = |c: usize| row.iter().find(|e| e.0 == c).map(|e| e.1).unwrap();
    assert!((coeff(*first) + 15.0 / 4.0).abs() < 1e-12);
    assert!((coeff(first + 1) - 15.0 / 4.0).abs() < 1e-12);

    let mut col_off = std::collections::HashMap::new();
    let mut diag = std::collections::HashMap::new();
    let mut strict = false;
    for (i, row) in &rows {
        let mut off = 0.0;
        for &(j, v) in row {
            if j == *i {
                diag.insert(*i, v.abs());
            } else {
                off += v.abs();
                *col_off.entry(j).or_insert(0.0) += v.abs();
            }
        }
        let d = diag[i];
        assert!(d >= off * (1.0 - 1e-12), "row {i}: {d} < {off}");
        strict |= d > off * (1.0 + 1e-12);
    }
    for (j, d) in &diag {
        let off = col_off.get(j).copied().unwrap_or(0.0);
        assert!(*d >= off * (1.0 - 1e-12), "column {j}");
    }
    assert!(strict);
}

#[test]
fn spherical_1d_meets_the_accuracy_target() {
    let n = 64;
    let mut case = spherical_poisson(1, n).unwrap();
    let tol = 1e-5 / (n * n) as f64;
    let h = srj_solve(&mut case.problem, &cycle(6, n), tol, 1_000_000).unwrap();
    assert!(h.converged);
    assert!(case.error() <= 2.0 / (n * n) as f64);
}

#[test]
fn gs_test_b_region_and_boundary() {
    assert_eq!(gs_inner_b(GS_THETA1), 0.0);
    assert_eq!(gs_inner_b(GS_THETA2), 0.0);
    assert!((gs_inner_b(0.5 * (GS_THETA1 + GS_THETA2)) - 1.0).abs() < 1e-15);
    assert!(gs_region_b(1.05, 1.2));
    assert!(!gs_region_b(9.5, 1.2));
    let g = grad_shafranov(GsTest::B, 0.0, 64).unwrap();
    let active = g.active_indices().len();
    let total = g.interior_indices().len();
    assert!(active > total / 10 && active < total);
}

#[test]
fn gs_flux_barely_moves_for_small_c() {
    let n = 100;
    let solve = |c: f64| {
        let mut g = grad_shafranov(GsTest::A, c, n).unwrap();
        let h = srj_solve(&mut g, &cycle(14, n), 1e-12, 2_000_000).unwrap();
        assert!(h.converged);
        g
    };
    let a = solve(0.0);
    let b = solve(0.1);
    let scale = a.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff / scale < 0.02, "relative change {}", diff / scale);
    let err = a.max_error(|p| p[1].sin().powi(2) / p[0]);
    assert!(err < 1e-3);
}
