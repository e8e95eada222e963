//! Benchmark problems: the 2D Neumann Laplace model problem, a Cartesian
//! Poisson problem with closed-form solution, Poisson in spherical
//! coordinates with a Bessel-harmonic series solution, and the linear
//! Grad-Shafranov equation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{FaceBc, GridBuilder, GridError, GridProblem, StencilSpec};
use crate::special::{associated_legendre, spherical_bessel_first_root, spherical_bessel_j};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid problem parameters: {0}")]
    Invalid(String),
    #[error("series did not settle within {terms} terms")]
    SeriesStall { terms: usize },
}

/// A grid problem together with its analytic solution sampled on the padded
/// grid layout (interior cells, plus ghosts where the solution is defined).
#[derive(Debug, Clone)]
pub struct AnalyticCase {
    pub problem: GridProblem,
    pub exact: Vec<f64>,
    pub description: String,
}

impl AnalyticCase {
    /// max |u − exact| over the active cells.
    pub fn error(&self) -> f64 {
        self.problem
            .active_indices()
            .into_iter()
            .map(|i| (self.problem.u[i] - self.exact[i]).abs())
            .fold(0.0, f64::max)
    }

    /// u = exact · (1 + ran(−½, ½)/n) on the active cells.
    pub fn perturb_from_exact(&mut self, n: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let exact = &self.exact;
        self.problem
            .set_active(|i, _| exact[i] * (1.0 + rng.gen_range(-0.5..0.5) / n as f64));
    }

    /// Starts from the exact solution on every interior cell.
    pub fn set_exact(&mut self) {
        for i in self.problem.interior_indices() {
            self.problem.u[i] = self.exact[i];
        }
        self.problem.refresh_ghosts();
    }
}

/// Adds `amplitude · ran(−½, ½)` to every active cell.
pub fn add_seeded_noise(g: &mut GridProblem, amplitude: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = g.u.clone();
    g.set_active(|i, _| u[i] + amplitude * rng.gen_range(-0.5..0.5));
}

/// ∇²u = 0 on the unit square, homogeneous Neumann on every face.
pub fn laplace2d_neumann(n: usize) -> Result<GridProblem, ProblemError> {
    if n < 4 {
        return Err(ProblemError::Invalid(format!("N = {n} < 4")));
    }
    let h = 1.0 / n as f64;
    Ok(GridBuilder::new(&[n, n], &[h, h], &[0.0, 0.0])
        .all_faces(|| FaceBc::Neumann)
        .stencil(StencilSpec::laplacian(&[h, h]))
        .build()?)
}

fn minus_exp_xy(p: &[f64]) -> f64 {
    -(p[0] * p[1]).exp()
}

/// ∇²u = −e^{xy}(x² + y²) with u = −e^{xy} on the boundary. Both axes share
/// the spacing h = 1/max(nx, ny), so the domain is [0, nx·h] × [0, ny·h].
/// Ghosts hold −e^{xy} at their own centres.
pub fn poisson2d_dirichlet(nx: usize, ny: usize) -> Result<AnalyticCase, ProblemError> {
    if nx < 4 || ny < 4 {
        return Err(ProblemError::Invalid(format!("{nx}×{ny} below 4×4")));
    }
    let h = 1.0 / nx.max(ny) as f64;
    let problem = GridBuilder::new(&[nx, ny], &[h, h], &[0.0, 0.0])
        .all_faces(|| FaceBc::DirichletGhost(Box::new(minus_exp_xy)))
        .stencil(StencilSpec::laplacian(&[h, h]))
        .source(|p| -(p[0] * p[1]).exp() * (p[0] * p[0] + p[1] * p[1]))
        .build()?;
    let mut exact = vec![0.0; problem.len()];
    for i in problem.interior_indices() {
        exact[i] = minus_exp_xy(&problem.position(i));
    }
    Ok(AnalyticCase {
        problem,
        exact,
        description: format!("poisson2d {nx}x{ny}"),
    })
}

/// Stopping threshold of the spherical series, relative to the running sum.
pub const SERIES_REL_TOL: f64 = 1e-16;
/// Terms summed before the series is declared stalled.
pub const SERIES_MAX_TERMS: usize = 200;

/// The series source s = −Σ a_l k_l² j_l(k_l r) Σ_m Re Y_l^m and its
/// solution, over even l = 2n with a_l = 2^{−l} and k_l the first zero of j_l.
#[derive(Debug, Clone)]
pub struct SphericalSourceSpec {
    pub d: usize,
    /// `Some(0)` in 1D; otherwise the series runs until the stopping rule.
    pub n_max: Option<usize>,
    roots: Vec<f64>,
}

/// Outcome of summing the series on a tensor grid.
#[derive(Debug, Clone)]
pub struct SeriesSum {
    /// Indexed `[ir + nr·ia]`, `ia` over the angular points.
    pub values: Vec<f64>,
    pub terms: usize,
    /// max |term| of each term.
    pub increments: Vec<f64>,
}

impl SphericalSourceSpec {
    pub fn new(d: usize) -> Result<Self, ProblemError> {
        if !(1..=3).contains(&d) {
            return Err(ProblemError::Invalid(format!("dimension {d}")));
        }
        Ok(SphericalSourceSpec {
            d,
            n_max: if d == 1 { Some(0) } else { None },
            roots: Vec::new(),
        })
    }

    pub fn degree(n: usize) -> usize {
        2 * n
    }

    pub fn a(l: usize) -> f64 {
        0.5f64.powi(l as i32)
    }

    pub fn k(&mut self, l: usize) -> f64 {
        while self.roots.len() <= l {
            let next = self.roots.len();
            self.roots.push(spherical_bessel_first_root(next));
        }
        self.roots[l]
    }

    /// b_l = c_l = a_l k_l j_{l+1}(k_l)/(2l + 1), from continuity of u and
    /// ∂u/∂r at r = 1.
    pub fn b(&mut self, l: usize) -> f64 {
        let k = self.k(l);
        Self::a(l) * k * spherical_bessel_j(l + 1, k) / (2 * l + 1) as f64
    }

    /// Radial factor of the source term of degree l.
    pub fn source_radial(&mut self, l: usize, r: f64) -> f64 {
        let k = self.k(l);
        if r >= 1.0 {
            return 0.0;
        }
        -Self::a(l) * k * k * spherical_bessel_j(l, k * r)
    }

    /// Radial factor of the solution term of degree l; the exterior branch
    /// for r > 1.
    pub fn solution_radial(&mut self, l: usize, r: f64) -> f64 {
        let k = self.k(l);
        let b = self.b(l);
        if r <= 1.0 {
            Self::a(l) * spherical_bessel_j(l, k * r) + b * r.powi(l as i32)
        } else {
            b / r.powi(l as i32 + 1)
        }
    }

    /// Σ_m Re Y_l^m(θ, φ) over m = 0 (d ≤ 2) or |m| ≤ l (d = 3).
    /// Re Y_l^{−m} = (−1)^m Re Y_l^m, so odd m cancel.
    fn angular(&self, l: usize, angles: &[(f64, f64)]) -> Vec<f64> {
        let norm = |m: usize| {
            let mut ratio = 1.0;
            for k in l - m + 1..=l + m {
                ratio /= k as f64;
            }
            ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
        };
        let m_top = if self.d == 3 { l } else { 0 };
        let coef: Vec<f64> = (0..=m_top).map(norm).collect();
        angles
            .iter()
            .map(|&(t, p)| {
                let x = t.cos();
                let mut acc = coef[0] * associated_legendre(l, 0, x);
                for m in (2..=m_top).step_by(2) {
                    acc += 2.0 * coef[m] * associated_legendre(l, m, x) * (m as f64 * p).cos();
                }
                acc
            })
            .collect()
    }

    /// Sums `radial(l, r) · angular_l` over the product of `rs` and `angles`.
    /// Stops once |term| ≤ 10⁻¹⁶ |sum| at the point where the previous term
    /// peaked.
    pub fn sum(
        &mut self,
        rs: &[f64],
        angles: &[(f64, f64)],
        radial: impl Fn(&mut Self, usize, f64) -> f64,
    ) -> Result<SeriesSum, ProblemError> {
        let nr = rs.len();
        let mut values = vec![0.0; nr * angles.len()];
        let mut increments = Vec::new();
        let mut peak = 0usize;
        for n in 0..SERIES_MAX_TERMS {
            let l = Self::degree(n);
            let rad: Vec<f64> = rs.iter().map(|&r| radial(self, l, r)).collect();
            let ang = self.angular(l, angles);
            let mut term_peak = (0usize, 0.0f64);
            let mut term_at_prev_peak = 0.0;
            for (ia, a) in ang.iter().enumerate() {
                for (ir, rv) in rad.iter().enumerate() {
                    let idx = ir + nr * ia;
                    let t = rv * a;
                    values[idx] += t;
                    if idx == peak {
                        term_at_prev_peak = t;
                    }
                    if t.abs() > term_peak.1 {
                        term_peak = (idx, t.abs());
                    }
                }
            }
            increments.push(term_peak.1);
            let done = match self.n_max {
                Some(m) => n >= m,
                None => n > 0 && term_at_prev_peak.abs() <= SERIES_REL_TOL * values[peak].abs(),
            };
            if done {
                return Ok(SeriesSum {
                    values,
                    terms: n + 1,
                    increments,
                });
            }
            peak = term_peak.0;
        }
        Err(ProblemError::SeriesStall {
            terms: SERIES_MAX_TERMS,
        })
    }
}

/// Spherical-coordinate Poisson problem ∇²u = s on the unit ball (r, θ, φ),
/// multiplied by r². N cells per axis; u_0 = u_1 = u_2 at the origin,
/// mirrored at the θ ends, periodic in φ, and Dirichlet at r = 1 from the
/// exterior solution evaluated at the ghost centres.
pub fn spherical_poisson(d: usize, n: usize) -> Result<AnalyticCase, ProblemError> {
    if n < 8 {
        return Err(ProblemError::Invalid(format!("N = {n} < 8")));
    }
    let mut spec = SphericalSourceSpec::new(d)?;
    let dr = 1.0 / n as f64;
    let dt = PI / n as f64;
    let dp = 2.0 * PI / n as f64;
    let dims = vec![n; d];
    let spacing = [dr, dt, dp][..d].to_vec();
    let origin = vec![0.0; d];
    let stencil = StencilSpec::Variable(Box::new(move |p: &[f64]| {
        let r = p[0];
        let mut off = vec![(r - dr) * r / (dr * dr), (r + dr) * r / (dr * dr)];
        let mut center = -2.0 * r * r / (dr * dr);
        if p.len() > 1 {
            let cot = 1.0 / p[1].tan();
            off.push(1.0 / (dt * dt) - cot / (2.0 * dt));
            off.push(1.0 / (dt * dt) + cot / (2.0 * dt));
            center -= 2.0 / (dt * dt);
        }
        if p.len() > 2 {
            let w = 1.0 / (p[1].sin().powi(2) * dp * dp);
            off.extend([w, w]);
            center -= 2.0 * w;
        }
        (center, off)
    }));
    let mut b = GridBuilder::new(&dims, &spacing, &origin)
        .stencil(stencil)
        .face(0, 0, FaceBc::SphericalOrigin)
        .face(0, 1, FaceBc::DirichletGhost(Box::new(|_| 0.0)));
    if d > 1 {
        b = b.face(1, 0, FaceBc::Neumann).face(1, 1, FaceBc::Neumann);
    }
    if d > 2 {
        b = b.face(2, 0, FaceBc::Periodic).face(2, 1, FaceBc::Periodic);
    }
    let mut g = b.build()?;

    // Radii of cells 1..=N and of the outer ghost; angular cell centres.
    let rs: Vec<f64> = (1..=n + 1).map(|i| (i as f64 - 0.5) * dr).collect();
    let nt = if d > 1 { n } else { 1 };
    let np = if d > 2 { n } else { 1 };
    let mut angles = Vec::with_capacity(nt * np);
    for k in 1..=np {
        for j in 1..=nt {
            angles.push(((j as f64 - 0.5) * dt, (k as f64 - 0.5) * dp));
        }
    }
    let source = spec.sum(&rs[..n], &angles, |s, l, r| s.source_radial(l, r))?;
    let solution = spec.sum(&rs, &angles, |s, l, r| s.solution_radial(l, r))?;

    let locate = |g: &GridProblem, idx: usize| {
        let ir = g.axis_index(idx, 0) - 1;
        let j = if d > 1 { g.axis_index(idx, 1) - 1 } else { 0 };
        let k = if d > 2 { g.axis_index(idx, 2) - 1 } else { 0 };
        (ir, j + nt * k)
    };
    let mut exact = vec![0.0; g.len()];
    for idx in g.interior_indices() {
        let (ir, ia) = locate(&g, idx);
        let r = rs[ir];
        exact[idx] = solution.values[ir + (n + 1) * ia];
        g.source[idx] = r * r * source.values[ir + n * ia];
    }
    let mut ghosts = std::mem::take(&mut g.ghosts);
    for rule in ghosts.iter_mut() {
        if g.position(rule.dst)[0] > 1.0 {
            let (ir, ia) = locate(&g, rule.dst);
            rule.b = solution.values[ir + (n + 1) * ia];
            exact[rule.dst] = rule.b;
        }
    }
    g.ghosts = ghosts;
    g.refresh_ghosts();
    Ok(AnalyticCase {
        problem: g,
        exact,
        description: format!(
            "spherical poisson d={d} N={n} ({} source terms, {} solution terms)",
            source.terms, solution.terms
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsTest {
    /// Dirichlet Ψ = sin²θ/r on both radial faces.
    A,
    /// Masked region touching r = 1 between θ₁ and θ₂.
    B,
}

pub const GS_THETA1: f64 = 0.3037;
pub const GS_THETA2: f64 = 2.8903;
pub const GS_R_IN: f64 = 1.0;
pub const GS_R_OUT: f64 = 10.0;

/// Test-B region: inside the lobe shape and outside the disk of radius 1
/// centred at (x, z) = (4, 1.6).
pub fn gs_region_b(r: f64, theta: f64) -> bool {
    let s = theta.sin();
    let shape = (4.5 * s * s + 2.5 * (2.0 * theta).sin().powi(2))
        * (1.0 - 0.4 * (3.0 * theta).cos() + 0.3 * (5.0 * theta).cos() + 0.05 * (25.0 * theta).sin());
    let disk = (r * s - 4.0).powi(2) + (r * theta.cos() - 1.6).powi(2);
    r < shape && disk > 1.0
}

/// Ψ at r = 1 for test B.
pub fn gs_inner_b(theta: f64) -> f64 {
    if theta > GS_THETA1 && theta < GS_THETA2 {
        ((theta - GS_THETA1) / (GS_THETA2 - GS_THETA1) * PI).sin().powi(2)
    } else {
        0.0
    }
}

/// Δ*Ψ + C²Ψ = 0 on r ∈ [1, 10], θ ∈ [0, π],
/// Δ* = ∂_rr + r⁻²∂_θθ − r⁻² cot θ ∂_θ, on a node grid with N intervals per
/// axis. The N − 1 interior nodes per axis are the unknowns; the boundary
/// nodes are the ghost layer and hold the Dirichlet data exactly.
pub fn grad_shafranov(test: GsTest, c: f64, n: usize) -> Result<GridProblem, ProblemError> {
    if n < 16 {
        return Err(ProblemError::Invalid(format!("N = {n} < 16")));
    }
    let dr = (GS_R_OUT - GS_R_IN) / n as f64;
    let dt = PI / n as f64;
    let c2 = c * c;
    let stencil = StencilSpec::Variable(Box::new(move |p: &[f64]| {
        let (r, t) = (p[0], p[1]);
        let ang = 1.0 / (r * r * dt * dt);
        let cot = 1.0 / (t.tan() * 2.0 * r * r * dt);
        let off = vec![1.0 / (dr * dr), 1.0 / (dr * dr), ang + cot, ang - cot];
        (-2.0 / (dr * dr) - 2.0 * ang + c2, off)
    }));
    let zero = || FaceBc::DirichletGhost(Box::new(|_| 0.0));
    // Cell i sits at origin + (i − ½)h, so ghost 0 lands on r = 1, θ = 0.
    let origin = [GS_R_IN + 0.5 * dr, 0.5 * dt];
    let b = GridBuilder::new(&[n - 1, n - 1], &[dr, dt], &origin)
        .stencil(stencil)
        .face(1, 0, zero())
        .face(1, 1, zero());
    let b = match test {
        GsTest::A => {
            let psi = |p: &[f64]| p[1].sin().powi(2) / p[0];
            b.face(0, 0, FaceBc::DirichletGhost(Box::new(psi)))
                .face(0, 1, FaceBc::DirichletGhost(Box::new(psi)))
        }
        GsTest::B => b
            .face(0, 0, FaceBc::DirichletGhost(Box::new(|p| gs_inner_b(p[1]))))
            .face(0, 1, zero())
            .mask(|p| gs_region_b(p[0], p[1])),
    };
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_boundary_corner() {
        let case = poisson2d_dirichlet(8, 8).unwrap();
        assert_eq!(minus_exp_xy(&[0.0, 0.0]), -1.0);
        assert!(case.description.contains("8x8"));
    }

    #[test]
    fn spherical_1d_coefficient() {
        let mut s = SphericalSourceSpec::new(1).unwrap();
        assert!((s.k(0) - PI).abs() < 1e-12);
        assert!((s.b(0) - 1.0).abs() < 1e-12);
        assert!(s.source_radial(0, 1.0 - 1e-15).abs() < 1e-12);
    }

    #[test]
    fn gs_region_touches_inner_sphere() {
        assert!(gs_region_b(1.01, 1.5));
        assert!(!gs_region_b(1.01, 0.2));
        assert!(!gs_region_b(4.0, (4.0f64).atan2(1.6)));
    }
}
