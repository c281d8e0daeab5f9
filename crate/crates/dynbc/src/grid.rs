//! Structured 1D/2D grids carrying the weighted measure `dμ = dx ⊕ dS/b`.
//!
//! A [`GridDomain`] owns the node coordinates, trapezoid volume weights
//! (summing exactly to `|Ω|`), the boundary nodes with their surface weights
//! and the sampled boundary weight `b ≥ b₀ > 0`, plus second-order one-sided
//! normal-derivative stencils.  The flux quadrature samples (cell corners,
//! trapezoid rule) used by the discrete operator live here too, so every
//! module integrates with the same weights.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("need at least 3 nodes per direction, got {0}")]
    TooFewNodes(usize),
    #[error("domain extent must be positive, got {0}")]
    BadExtent(f64),
    #[error("boundary weight must satisfy b >= b0 > 0, found {0}")]
    BadBoundaryWeight(f64),
    #[error("boundary weight table has {got} entries, grid has {expected} boundary nodes")]
    BadTable { expected: usize, got: usize },
}

/// Boundary weight `b` on Γ: a named preset or a nodal table
/// (1D order: left, right; 2D order: ascending node index along the perimeter).
#[derive(Debug, Clone, PartialEq)]
pub enum BProfile {
    One,
    Const(f64),
    Table(Vec<f64>),
}

impl BProfile {
    fn value(&self, boundary_idx: usize) -> f64 {
        match self {
            BProfile::One => 1.0,
            BProfile::Const(c) => *c,
            BProfile::Table(t) => t[boundary_idx],
        }
    }
}

/// A node on Γ: surface quadrature weight, sampled `b`, outward normal and
/// the one-sided stencil for `∂ₙ`.
#[derive(Debug, Clone)]
pub struct BoundaryNode {
    pub node: usize,
    pub surface_w: f64,
    pub b: f64,
    pub normal: [f64; 2],
    /// coefficients of the second-order one-sided `∂ₙ` approximation
    pub normal_stencil: Vec<(usize, f64)>,
    /// which gradient components at this node point outward (x, y)
    pub normal_dirs: (bool, bool),
}

/// One quadrature sample of the flux energy `∫ (1/2) A(|∇u|²)`:
/// a cell-corner gradient with its weight (weights sum to `|Ω|`).
#[derive(Debug, Clone)]
pub struct GradSample {
    pub w: f64,
    pub x_stencil: [(usize, f64); 2],
    pub y_stencil: Option<[(usize, f64); 2]>,
}

impl GradSample {
    #[inline]
    pub fn grad(&self, u: &[f64]) -> [f64; 2] {
        let gx = self.x_stencil[0].1 * u[self.x_stencil[0].0]
            + self.x_stencil[1].1 * u[self.x_stencil[1].0];
        let gy = match &self.y_stencil {
            Some(s) => s[0].1 * u[s[0].0] + s[1].1 * u[s[1].0],
            None => 0.0,
        };
        [gx, gy]
    }
}

/// Discretised `Ω ∪ Γ` with all quadrature data.  Immutable after
/// construction; safe to share across concurrent runs.
#[derive(Debug, Clone)]
pub struct GridDomain {
    pub dim: usize,
    /// (nx, ny); ny = 1 in 1D
    pub shape: (usize, usize),
    pub extents: (f64, f64),
    coords: Vec<[f64; 2]>,
    vol_w: Vec<f64>,
    boundary: Vec<BoundaryNode>,
    boundary_of_node: Vec<Option<usize>>,
    samples: Vec<GradSample>,
    omega: f64,
    lambda: f64,
    b_min: f64,
}

impl GridDomain {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }
    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }
    pub fn coords(&self, i: usize) -> [f64; 2] {
        self.coords[i]
    }
    pub fn vol_weight(&self, i: usize) -> f64 {
        self.vol_w[i]
    }
    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }
    pub fn boundary_index(&self, node: usize) -> Option<usize> {
        self.boundary_of_node[node]
    }
    pub fn samples(&self) -> &[GradSample] {
        &self.samples
    }
    /// |Ω| (sum of volume weights)
    pub fn omega(&self) -> f64 {
        self.omega
    }
    /// λ = (∫_Γ b⁻¹ dS)⁻¹
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn b_min(&self) -> f64 {
        self.b_min
    }
    /// Jacobian bandwidth of nearest-neighbour coupling on this grid.
    pub fn bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.shape.0 + 1
        }
    }
    /// μ-mass of the X² pairing at a node: volume weight plus, on Γ, dS/b.
    pub fn x2_mass(&self, node: usize) -> f64 {
        let mut m = self.vol_w[node];
        if let Some(bi) = self.boundary_of_node[node] {
            let bn = &self.boundary[bi];
            m += bn.surface_w / bn.b;
        }
        m
    }
    /// Apply a boundary node's `∂ₙ` stencil to a bulk field.
    pub fn normal_derivative(&self, bn: &BoundaryNode, u: &[f64]) -> f64 {
        bn.normal_stencil.iter().map(|&(i, c)| c * u[i]).sum()
    }

    fn validate_b(b: f64) -> Result<f64, GridError> {
        if !(b > 0.0) || !b.is_finite() {
            Err(GridError::BadBoundaryWeight(b))
        } else {
            Ok(b)
        }
    }

    fn finish(
        dim: usize,
        shape: (usize, usize),
        extents: (f64, f64),
        coords: Vec<[f64; 2]>,
        vol_w: Vec<f64>,
        mut boundary: Vec<BoundaryNode>,
        samples: Vec<GradSample>,
        b_profile: &BProfile,
    ) -> Result<GridDomain, GridError> {
        if let BProfile::Table(t) = b_profile {
            if t.len() != boundary.len() {
                return Err(GridError::BadTable {
                    expected: boundary.len(),
                    got: t.len(),
                });
            }
        }
        let mut b_min = f64::INFINITY;
        for (k, bn) in boundary.iter_mut().enumerate() {
            bn.b = Self::validate_b(b_profile.value(k))?;
            b_min = b_min.min(bn.b);
        }
        let omega: f64 = vol_w.iter().sum();
        let lambda_inv: f64 = boundary.iter().map(|bn| bn.surface_w / bn.b).sum();
        let n = coords.len();
        let mut boundary_of_node = vec![None; n];
        for (k, bn) in boundary.iter().enumerate() {
            boundary_of_node[bn.node] = Some(k);
        }
        Ok(GridDomain {
            dim,
            shape,
            extents,
            coords,
            vol_w,
            boundary,
            boundary_of_node,
            samples,
            omega,
            lambda: 1.0 / lambda_inv,
            b_min,
        })
    }
}

/// Uniform grid on the interval `(0, length)` with the two endpoints as Γ.
pub fn build_interval_grid(
    n: usize,
    length: f64,
    b_profile: &BProfile,
) -> Result<GridDomain, GridError> {
    if n < 3 {
        return Err(GridError::TooFewNodes(n));
    }
    if !(length > 0.0) {
        return Err(GridError::BadExtent(length));
    }
    let h = length / (n - 1) as f64;
    let coords: Vec<[f64; 2]> = (0..n).map(|i| [i as f64 * h, 0.0]).collect();
    let mut vol_w = vec![h; n];
    vol_w[0] = 0.5 * h;
    vol_w[n - 1] = 0.5 * h;
    let c = 1.0 / (2.0 * h);
    let boundary = vec![
        BoundaryNode {
            node: 0,
            surface_w: 1.0,
            b: 1.0,
            normal: [-1.0, 0.0],
            normal_stencil: vec![(0, 3.0 * c), (1, -4.0 * c), (2, c)],
            normal_dirs: (true, false),
        },
        BoundaryNode {
            node: n - 1,
            surface_w: 1.0,
            b: 1.0,
            normal: [1.0, 0.0],
            normal_stencil: vec![(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)],
            normal_dirs: (true, false),
        },
    ];
    let inv_h = 1.0 / h;
    let samples = (0..n - 1)
        .map(|i| GradSample {
            w: h,
            x_stencil: [(i, -inv_h), (i + 1, inv_h)],
            y_stencil: None,
        })
        .collect();
    GridDomain::finish(1, (n, 1), (length, 0.0), coords, vol_w, boundary, samples, b_profile)
}

/// Tensor grid on a rectangle; Γ is the perimeter, corner surface weights
/// split by the trapezoid rule between the two adjacent edges.
pub fn build_rectangle_grid(
    nx: usize,
    ny: usize,
    lengths: (f64, f64),
    b_profile: &BProfile,
) -> Result<GridDomain, GridError> {
    if nx < 3 {
        return Err(GridError::TooFewNodes(nx));
    }
    if ny < 3 {
        return Err(GridError::TooFewNodes(ny));
    }
    if !(lengths.0 > 0.0) {
        return Err(GridError::BadExtent(lengths.0));
    }
    if !(lengths.1 > 0.0) {
        return Err(GridError::BadExtent(lengths.1));
    }
    let (lx, ly) = lengths;
    let hx = lx / (nx - 1) as f64;
    let hy = ly / (ny - 1) as f64;
    let id = |i: usize, j: usize| j * nx + i;
    let n = nx * ny;
    let mut coords = vec![[0.0; 2]; n];
    let mut vol_w = vec![0.0; n];
    for j in 0..ny {
        let wy = if j == 0 || j == ny - 1 { 0.5 * hy } else { hy };
        for i in 0..nx {
            let wx = if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
            coords[id(i, j)] = [i as f64 * hx, j as f64 * hy];
            vol_w[id(i, j)] = wx * wy;
        }
    }
    // boundary nodes in ascending node-index order
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let on_x = i == 0 || i == nx - 1;
            let on_y = j == 0 || j == ny - 1;
            if !on_x && !on_y {
                continue;
            }
            // surface weight: tangential trapezoid along each edge the node
            // belongs to; corners collect half-weights from both edges
            let mut sw = 0.0;
            if on_y {
                sw += if on_x { 0.5 * hx } else { hx };
            }
            if on_x {
                sw += if on_y { 0.5 * hy } else { hy };
            }
            let mut normal = [0.0f64; 2];
            if i == 0 {
                normal[0] = -1.0;
            }
            if i == nx - 1 {
                normal[0] = 1.0;
            }
            if j == 0 {
                normal[1] = -1.0;
            }
            if j == ny - 1 {
                normal[1] = 1.0;
            }
            let norm = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
            normal[0] /= norm;
            normal[1] /= norm;
            // one-sided ∂ₙ: |n_x|·(outward ∂x) + |n_y|·(outward ∂y), each via the
            // universal inward-ray pattern (3·u_at − 4·u_in1 + u_in2)/(2h)
            let mut stencil: Vec<(usize, f64)> = Vec::new();
            let push = |node: usize, c: f64, st: &mut Vec<(usize, f64)>| {
                if c == 0.0 {
                    return;
                }
                if let Some(e) = st.iter_mut().find(|e| e.0 == node) {
                    e.1 += c;
                } else {
                    st.push((node, c));
                }
            };
            if normal[0] != 0.0 {
                let c = normal[0].abs() / (2.0 * hx);
                let (i1, i2) = if i == 0 { (1, 2) } else { (nx - 2, nx - 3) };
                push(id(i, j), 3.0 * c, &mut stencil);
                push(id(i1, j), -4.0 * c, &mut stencil);
                push(id(i2, j), c, &mut stencil);
            }
            if normal[1] != 0.0 {
                let c = normal[1].abs() / (2.0 * hy);
                let (j1, j2) = if j == 0 { (1, 2) } else { (ny - 2, ny - 3) };
                push(id(i, j), 3.0 * c, &mut stencil);
                push(id(i, j1), -4.0 * c, &mut stencil);
                push(id(i, j2), c, &mut stencil);
            }
            boundary.push(BoundaryNode {
                node: id(i, j),
                surface_w: sw,
                b: 1.0,
                normal,
                normal_stencil: stencil,
                normal_dirs: (on_x, on_y),
            });
        }
    }
    // corner-quadrature flux samples: 4 per cell
    let mut samples = Vec::with_capacity(4 * (nx - 1) * (ny - 1));
    let qw = hx * hy / 4.0;
    let (ix, iy) = (1.0 / hx, 1.0 / hy);
    for cj in 0..ny - 1 {
        for ci in 0..nx - 1 {
            for &(a, b) in &[(0usize, 0usize), (1, 0), (0, 1), (1, 1)] {
                samples.push(GradSample {
                    w: qw,
                    x_stencil: [(id(ci, cj + b), -ix), (id(ci + 1, cj + b), ix)],
                    y_stencil: Some([(id(ci + a, cj), -iy), (id(ci + a, cj + 1), iy)]),
                });
            }
        }
    }
    GridDomain::finish(2, (nx, ny), lengths, coords, vol_w, boundary, samples, b_profile)
}

/// Paired bulk/boundary state `U = (u, v)`.  `v` is indexed like
/// `GridDomain::boundary_nodes` and need not equal `trace(u)` at `t = 0`;
/// after any coupled implicit step it does.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StateField {
    pub fn zeros(grid: &GridDomain) -> Self {
        StateField {
            u: vec![0.0; grid.n_nodes()],
            v: vec![0.0; grid.n_boundary()],
        }
    }
    /// Build from a nodal function; `v` is set to the trace.
    pub fn from_fn(grid: &GridDomain, f: impl Fn([f64; 2]) -> f64) -> Self {
        let u: Vec<f64> = (0..grid.n_nodes()).map(|i| f(grid.coords(i))).collect();
        let v = trace(&u, grid);
        StateField { u, v }
    }
    /// Couple `v` to the trace of `u`.
    pub fn coupled(u: Vec<f64>, grid: &GridDomain) -> Self {
        let v = trace(&u, grid);
        StateField { u, v }
    }
    pub fn matches(&self, grid: &GridDomain) -> bool {
        self.u.len() == grid.n_nodes() && self.v.len() == grid.n_boundary()
    }
    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
    /// Is `v` the boundary restriction of `u` (up to `tol`)?
    pub fn is_trace_coupled(&self, grid: &GridDomain, tol: f64) -> bool {
        grid.boundary_nodes()
            .iter()
            .enumerate()
            .all(|(k, bn)| (self.v[k] - self.u[bn.node]).abs() <= tol)
    }
}

/// Lebesgue exponent for the product norms; `Inf` selects the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl From<f64> for Exponent {
    fn from(s: f64) -> Self {
        Exponent::Finite(s)
    }
}

/// `‖U‖_{X^{s1,s2}} = (∫_Ω|u|^{s1})^{1/s1} + (∫_Γ|v|^{s2} dS/b)^{1/s2}`;
/// for `∞`, the max of the two sup norms.
pub fn x_norm(state: &StateField, s1: Exponent, s2: Exponent, grid: &GridDomain) -> f64 {
    assert!(state.matches(grid), "state does not match grid");
    let bulk = match s1 {
        Exponent::Finite(s) => {
            assert!(s >= 1.0, "exponent must be >= 1");
            state
                .u
                .iter()
                .enumerate()
                .map(|(i, &ui)| grid.vol_weight(i) * ui.abs().powf(s))
                .sum::<f64>()
                .powf(1.0 / s)
        }
        Exponent::Inf => state.u.iter().fold(0.0f64, |m, &x| m.max(x.abs())),
    };
    let bnd = match s2 {
        Exponent::Finite(s) => {
            assert!(s >= 1.0, "exponent must be >= 1");
            grid.boundary_nodes()
                .iter()
                .zip(&state.v)
                .map(|(bn, &vj)| bn.surface_w / bn.b * vj.abs().powf(s))
                .sum::<f64>()
                .powf(1.0 / s)
        }
        Exponent::Inf => state.v.iter().fold(0.0f64, |m, &x| m.max(x.abs())),
    };
    match (s1, s2) {
        (Exponent::Inf, Exponent::Inf) => bulk.max(bnd),
        _ => bulk + bnd,
    }
}

/// Shorthand for the gradient-flow norm `‖U‖_{X²}`.
pub fn x2_norm(state: &StateField, grid: &GridDomain) -> f64 {
    x_norm(state, Exponent::Finite(2.0), Exponent::Finite(2.0), grid)
}

/// X² inner product of two nodal (trace-coupled) vectors.
pub fn x2_dot(a: &[f64], b: &[f64], grid: &GridDomain) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| grid.x2_mass(i) * x * y)
        .sum()
}

/// Lower-order term of the equivalent `W^{1,p}` norm.
#[derive(Debug, Clone, Copy)]
pub enum LowerOrder {
    /// `(∫_Ω |u|^s)^{1/s}`
    Volume { s: f64 },
    /// `(∫_Γ |u|^s dS/b)^{1/s}`
    Boundary { s: f64 },
}

/// Equivalent `W^{1,p}` norm `‖∇u‖_{L^p} + l(u)`.
pub fn w1p_norm(u: &[f64], p: f64, grid: &GridDomain, l: LowerOrder) -> f64 {
    assert!(p > 1.0, "w1p_norm needs p > 1");
    assert_eq!(u.len(), grid.n_nodes());
    let grad: f64 = grid
        .samples()
        .iter()
        .map(|s| {
            let g = s.grad(u);
            s.w * (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p)
        })
        .sum::<f64>()
        .powf(1.0 / p);
    let lower = match l {
        LowerOrder::Volume { s } => u
            .iter()
            .enumerate()
            .map(|(i, &ui)| grid.vol_weight(i) * ui.abs().powf(s))
            .sum::<f64>()
            .powf(1.0 / s),
        LowerOrder::Boundary { s } => grid
            .boundary_nodes()
            .iter()
            .map(|bn| bn.surface_w / bn.b * u[bn.node].abs().powf(s))
            .sum::<f64>()
            .powf(1.0 / s),
    };
    grad + lower
}

/// Restriction of a bulk field to Γ, in boundary-node order.
pub fn trace(u: &[f64], grid: &GridDomain) -> Vec<f64> {
    grid.boundary_nodes().iter().map(|bn| u[bn.node]).collect()
}

/// Nodal gradient: second-order central differences in the interior,
/// second-order one-sided at the boundary.
pub fn gradient(u: &[f64], grid: &GridDomain) -> Vec<[f64; 2]> {
    assert_eq!(u.len(), grid.n_nodes());
    let (nx, ny) = grid.shape;
    let (lx, ly) = grid.extents;
    let hx = lx / (nx - 1) as f64;
    let mut out = vec![[0.0; 2]; u.len()];
    let id = |i: usize, j: usize| j * nx + i;
    let one_sided = |um0: f64, um1: f64, um2: f64, h: f64| (-3.0 * um0 + 4.0 * um1 - um2) / (2.0 * h);
    for j in 0..ny {
        for i in 0..nx {
            let k = id(i, j);
            out[k][0] = if i == 0 {
                one_sided(u[id(0, j)], u[id(1, j)], u[id(2, j)], hx)
            } else if i == nx - 1 {
                -one_sided(u[id(nx - 1, j)], u[id(nx - 2, j)], u[id(nx - 3, j)], hx)
            } else {
                (u[id(i + 1, j)] - u[id(i - 1, j)]) / (2.0 * hx)
            };
            if grid.dim == 2 {
                let hy = ly / (ny - 1) as f64;
                out[k][1] = if j == 0 {
                    one_sided(u[id(i, 0)], u[id(i, 1)], u[id(i, 2)], hy)
                } else if j == ny - 1 {
                    -one_sided(u[id(i, ny - 1)], u[id(i, ny - 2)], u[id(i, ny - 3)], hy)
                } else {
                    (u[id(i, j + 1)] - u[id(i, j - 1)]) / (2.0 * hy)
                };
            }
        }
    }
    out
}
