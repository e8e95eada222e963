//! Structured cell-centred grids with one ghost layer per face.
//!
//! Interior cell `i` (1-based) on axis k sits at `origin_k + (i − ½)·h_k`;
//! indices 0 and n_k + 1 are ghosts. Storage is flat with axis 0 fastest.
//! Every boundary condition is an affine ghost rule `u[dst] = a·u[src] + b`
//! applied after each relaxation step.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("field overflow at iteration {iteration}")]
    Overflow { iteration: usize },
}

/// Boundary values are given as a function of position.
pub type PointFn = Box<dyn Fn(&[f64]) -> f64>;

pub enum FaceBc {
    /// The ghost holds the function's value at the ghost centre.
    DirichletGhost(PointFn),
    /// The boundary value at the face point; ghost = 2g − u_adjacent.
    /// The checkerboard mode has Jacobi eigenvalue exactly −1 under this
    /// rule, so it converges only for weights ω < 1 on that mode.
    DirichletFace(PointFn),
    /// Ghost mirrors the adjacent interior cell.
    Neumann,
    /// Ghost copies the interior cell at the opposite end of the axis.
    Periodic,
    /// Low side of a radial axis starting at r = 0: u_0 = u_1 = u_2, with
    /// cell 1 removed from the unknowns.
    SphericalOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostRule {
    pub dst: usize,
    pub src: usize,
    pub a: f64,
    pub b: f64,
}

/// Row coefficients of the discrete operator 𝒜. `off[2k]` couples to the
/// lower neighbour on axis k, `off[2k + 1]` to the upper one.
#[derive(Debug, Clone, PartialEq)]
pub enum Stencil {
    Uniform { center: f64, off: Vec<f64> },
    Variable { center: Vec<f64>, off: Vec<Vec<f64>> },
}

impl Stencil {
    pub fn center(&self, idx: usize) -> f64 {
        match self {
            Stencil::Uniform { center, .. } => *center,
            Stencil::Variable { center, .. } => center[idx],
        }
    }

    pub fn off(&self, idx: usize, slot: usize) -> f64 {
        match self {
            Stencil::Uniform { off, .. } => off[slot],
            Stencil::Variable { off, .. } => off[slot][idx],
        }
    }
}

/// Per-cell stencil rows as a function of cell-centre position.
pub type StencilFn = Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)>;

pub enum StencilSpec {
    Uniform { center: f64, off: Vec<f64> },
    Variable(StencilFn),
}

impl StencilSpec {
    /// Second-order Laplacian with spacing `h` on each axis.
    pub fn laplacian(h: &[f64]) -> Self {
        let mut off = Vec::with_capacity(2 * h.len());
        let mut center = 0.0;
        for hk in h {
            let w = 1.0 / (hk * hk);
            off.extend([w, w]);
            center -= 2.0 * w;
        }
        StencilSpec::Uniform { center, off }
    }
}

/// Discretized linear problem 𝒜u = s on a structured grid.
#[derive(Debug, Clone)]
pub struct GridProblem {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub u: Vec<f64>,
    pub source: Vec<f64>,
    pub stencil: Stencil,
    pub ghosts: Vec<GhostRule>,
    /// true where the equation is solved; `None` means every interior cell
    /// except those removed by a spherical-origin face.
    pub mask: Option<Vec<bool>>,
    pub(crate) ext: [usize; 3],
    pub(crate) stride: [usize; 3],
    pub(crate) active: Vec<bool>,
    /// Maximal contiguous runs of active cells along axis 0, as [start, end).
    pub(crate) runs: Vec<(usize, usize)>,
}

pub struct GridBuilder {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    faces: Vec<[Option<FaceBc>; 2]>,
    stencil: Option<StencilSpec>,
    source: Option<PointFn>,
    mask: Option<Box<dyn Fn(&[f64]) -> bool>>,
}

impl GridBuilder {
    pub fn new(dims: &[usize], spacing: &[f64], origin: &[f64]) -> Self {
        GridBuilder {
            dims: dims.to_vec(),
            spacing: spacing.to_vec(),
            origin: origin.to_vec(),
            faces: dims.iter().map(|_| [None, None]).collect(),
            stencil: None,
            source: None,
            mask: None,
        }
    }

    /// `side` 0 is the low end of the axis, 1 the high end.
    pub fn face(mut self, axis: usize, side: usize, bc: FaceBc) -> Self {
        self.faces[axis][side] = Some(bc);
        self
    }

    /// Same condition on both ends of every axis.
    pub fn all_faces(mut self, make: impl Fn() -> FaceBc) -> Self {
        for f in &mut self.faces {
            *f = [Some(make()), Some(make())];
        }
        self
    }

    pub fn stencil(mut self, s: StencilSpec) -> Self {
        self.stencil = Some(s);
        self
    }

    pub fn source(mut self, f: impl Fn(&[f64]) -> f64 + 'static) -> Self {
        self.source = Some(Box::new(f));
        self
    }

    pub fn mask(mut self, f: impl Fn(&[f64]) -> bool + 'static) -> Self {
        self.mask = Some(Box::new(f));
        self
    }

    pub fn build(self) -> Result<GridProblem, GridError> {
        let d = self.dims.len();
        if !(1..=3).contains(&d) || self.spacing.len() != d || self.origin.len() != d {
            return Err(GridError::Invalid(format!("{d} axes with mismatched spacing/origin")));
        }
        if self.dims.iter().any(|&n| n < 2) {
            return Err(GridError::Invalid("every axis needs at least 2 cells".into()));
        }
        let mut ext = [1usize; 3];
        for k in 0..d {
            ext[k] = self.dims[k] + 2;
        }
        let stride = [1, ext[0], ext[0] * ext[1]];
        let total = ext[0] * ext[1] * ext[2];
        let mut g = GridProblem {
            dims: self.dims.clone(),
            spacing: self.spacing.clone(),
            origin: self.origin.clone(),
            u: vec![0.0; total],
            source: vec![0.0; total],
            stencil: Stencil::Uniform {
                center: 0.0,
                off: vec![],
            },
            ghosts: Vec::new(),
            mask: None,
            ext,
            stride,
            active: vec![false; total],
            runs: Vec::new(),
        };
        let interior = g.interior_indices();
        let stencil = self
            .stencil
            .ok_or_else(|| GridError::Invalid("no stencil".into()))?;
        g.stencil = match stencil {
            StencilSpec::Uniform { center, off } => {
                if off.len() != 2 * d {
                    return Err(GridError::Invalid(format!("{} stencil offsets for {d} axes", off.len())));
                }
                Stencil::Uniform { center, off }
            }
            StencilSpec::Variable(f) => {
                let mut center = vec![0.0; total];
                let mut off = vec![vec![0.0; total]; 2 * d];
                for &idx in &interior {
                    let (c, o) = f(&g.position(idx));
                    if o.len() != 2 * d {
                        return Err(GridError::Invalid(format!("{} stencil offsets for {d} axes", o.len())));
                    }
                    center[idx] = c;
                    for (slot, v) in o.into_iter().enumerate() {
                        off[slot][idx] = v;
                    }
                }
                Stencil::Variable { center, off }
            }
        };
        if let Some(f) = &self.source {
            for &idx in &interior {
                g.source[idx] = f(&g.position(idx));
            }
        }
        if let Some(f) = &self.mask {
            let mut m = vec![false; total];
            for &idx in &interior {
                m[idx] = f(&g.position(idx));
            }
            g.mask = Some(m);
        }
        for &idx in &interior {
            g.active[idx] = g.mask.as_ref().map_or(true, |m| m[idx]);
        }
        let mut origin_rules = Vec::new();
        for (axis, pair) in self.faces.into_iter().enumerate() {
            for (side, bc) in pair.into_iter().enumerate() {
                let bc = bc.ok_or_else(|| {
                    GridError::Invalid(format!("no boundary condition on axis {axis} side {side}"))
                })?;
                if matches!(bc, FaceBc::SphericalOrigin) {
                    if axis != 0 || side != 0 || g.dims[0] < 3 {
                        return Err(GridError::Invalid(
                            "spherical origin rule only on the low end of axis 0 with ≥ 3 cells".into(),
                        ));
                    }
                    origin_rules = g.face_rules(axis, side, &bc);
                } else {
                    let rules = g.face_rules(axis, side, &bc);
                    g.ghosts.extend(rules);
                }
            }
        }
        // Both origin rules read cell 2 directly, so their order is free.
        for r in &origin_rules {
            g.active[r.dst] = false;
        }
        g.ghosts.extend(origin_rules);
        g.runs = g.compute_runs();
        g.refresh_ghosts();
        Ok(g)
    }
}

impl GridProblem {
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.stride[axis]
    }

    /// Padded index along `axis` of flat index `idx`.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride[axis]) % self.ext[axis]
    }

    pub fn flat(&self, ijk: &[usize]) -> usize {
        ijk.iter().zip(&self.stride).map(|(i, s)| i * s).sum()
    }

    /// Cell-centre coordinates of a flat index (ghosts included).
    pub fn position(&self, idx: usize) -> Vec<f64> {
        (0..self.ndim())
            .map(|k| {
                let i = self.axis_index(idx, k) as f64;
                self.origin[k] + (i - 0.5) * self.spacing[k]
            })
            .collect()
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        let d = self.ndim();
        let hi = |k: usize| if k < d { self.dims[k] } else { 0 };
        let lo = |k: usize| if k < d { 1 } else { 0 };
        let mut out = Vec::new();
        for c in lo(2)..=hi(2) {
            for b in lo(1)..=hi(1) {
                for a in 1..=self.dims[0] {
                    out.push(a + b * self.stride[1] + c * self.stride[2]);
                }
            }
        }
        out
    }

    /// Cells updated by the relaxation sweeps, in lexicographic order.
    pub fn active_indices(&self) -> Vec<usize> {
        self.runs.iter().flat_map(|&(a, b)| a..b).collect()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.active[idx]
    }

    fn face_rules(&self, axis: usize, side: usize, bc: &FaceBc) -> Vec<GhostRule> {
        let n = self.dims[axis];
        let s = self.stride[axis];
        let mut out = Vec::new();
        for idx in self.interior_indices() {
            let i = self.axis_index(idx, axis);
            let (edge, ghost, inward) = if side == 0 {
                (1, idx - s, idx)
            } else {
                (n, idx + s, idx)
            };
            if i != edge {
                continue;
            }
            let face_pos = |g: &GridProblem| {
                let mut p = g.position(inward);
                p[axis] += if side == 0 { -0.5 } else { 0.5 } * g.spacing[axis];
                p
            };
            let rule = match bc {
                FaceBc::DirichletGhost(f) => GhostRule {
                    dst: ghost,
                    src: inward,
                    a: 0.0,
                    b: f(&self.position(ghost)),
                },
                FaceBc::DirichletFace(f) => GhostRule {
                    dst: ghost,
                    src: inward,
                    a: -1.0,
                    b: 2.0 * f(&face_pos(self)),
                },
                FaceBc::Neumann => GhostRule {
                    dst: ghost,
                    src: inward,
                    a: 1.0,
                    b: 0.0,
                },
                FaceBc::Periodic => GhostRule {
                    dst: ghost,
                    src: if side == 0 {
                        idx + (n - 1) * s
                    } else {
                        idx - (n - 1) * s
                    },
                    a: 1.0,
                    b: 0.0,
                },
                FaceBc::SphericalOrigin => {
                    out.push(GhostRule {
                        dst: idx,
                        src: idx + s,
                        a: 1.0,
                        b: 0.0,
                    });
                    GhostRule {
                        dst: ghost,
                        src: idx + s,
                        a: 1.0,
                        b: 0.0,
                    }
                }
            };
            out.push(rule);
        }
        out
    }

    fn compute_runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = None;
        for idx in 0..self.u.len() {
            match (self.active[idx], start) {
                (true, None) => start = Some(idx),
                (false, Some(s)) => {
                    runs.push((s, idx));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, self.u.len()));
        }
        runs
    }

    pub fn refresh_ghosts(&mut self) {
        refresh(&self.ghosts, &mut self.u);
    }

    /// Sets every interior cell (active or not) from a function of position
    /// and refreshes the ghosts.
    pub fn set_interior(&mut self, f: impl Fn(&[f64]) -> f64) {
        for idx in self.interior_indices() {
            self.u[idx] = f(&self.position(idx));
        }
        self.refresh_ghosts();
    }

    /// Sets active cells only; masked-out cells keep their values.
    pub fn set_active(&mut self, mut f: impl FnMut(usize, &[f64]) -> f64) {
        for idx in self.active_indices() {
            let p = self.position(idx);
            self.u[idx] = f(idx, &p);
        }
        self.refresh_ghosts();
    }

    /// (𝒜u)_idx with the current ghosts.
    pub fn apply(&self, idx: usize) -> f64 {
        let mut acc = self.stencil.center(idx) * self.u[idx];
        for k in 0..self.ndim() {
            let s = self.stride[k];
            acc += self.stencil.off(idx, 2 * k) * self.u[idx - s];
            acc += self.stencil.off(idx, 2 * k + 1) * self.u[idx + s];
        }
        acc
    }

    /// ‖s − 𝒜u‖∞ over the active cells.
    pub fn residual_inf(&self) -> f64 {
        self.active_indices()
            .into_iter()
            .map(|i| (self.source[i] - self.apply(i)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest |u − f| over the active cells.
    pub fn max_error(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.active_indices()
            .into_iter()
            .map(|i| (self.u[i] - f(&self.position(i))).abs())
            .fold(0.0, f64::max)
    }

    /// Rows of the matrix acting on the active unknowns once every ghost
    /// rule is substituted: `(row, [(col, coefficient)])`. Constant parts of
    /// the rules move to the right-hand side and are dropped here.
    pub fn effective_rows(&self) -> Vec<(usize, Vec<(usize, f64)>)> {
        let mut rule_of = std::collections::HashMap::new();
        for r in &self.ghosts {
            rule_of.insert(r.dst, *r);
        }
        let resolve = |mut idx: usize, mut w: f64| -> Option<(usize, f64)> {
            for _ in 0..4 {
                if self.active[idx] {
                    return Some((idx, w));
                }
                let r = rule_of.get(&idx)?;
                w *= r.a;
                idx = r.src;
            }
            None
        };
        self.active_indices()
            .into_iter()
            .map(|idx| {
                let mut row: Vec<(usize, f64)> = vec![(idx, self.stencil.center(idx))];
                for k in 0..self.ndim() {
                    let s = self.stride[k];
                    for (slot, nb) in [(2 * k, idx - s), (2 * k + 1, idx + s)] {
                        let w = self.stencil.off(idx, slot);
                        if let Some((col, v)) = resolve(nb, w) {
                            match row.iter_mut().find(|e| e.0 == col) {
                                Some(e) => e.1 += v,
                                None => row.push((col, v)),
                            }
                        }
                    }
                }
                (idx, row)
            })
            .collect()
    }
}

pub(crate) fn refresh(rules: &[GhostRule], u: &mut [f64]) {
    for r in rules {
        u[r.dst] = r.a * u[r.src] + r.b;
    }
}
