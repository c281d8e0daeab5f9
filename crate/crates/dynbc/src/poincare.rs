//! Numeric estimation of the Poincaré constant `C_{Ω,b}` in
//! `‖φ − λ⟨φ/b, 1⟩_{1,Γ}‖_{L^s(Ω)} ≤ C_{Ω,b} ‖∇φ‖_{L^s(Ω)}`
//! and of the trace-interpolation constant `C_ε` in
//! `‖u‖^s_{L^s(Γ)} ≤ ε‖∇u‖^p_{L^p} + C_ε(‖u‖^γ_{L^γ} + 1)`,
//! `γ = max(s, p(s−1)/(p−1))`.
//!
//! Both searches maximise over discrete fields, so they produce lower bounds
//! of the true constants; `s = 2` uses a dense generalised eigensolve, other
//! exponents projected gradient ascent from multiple random starts (an
//! uncertified lower bound, flagged as such).

use crate::grid::GridDomain;
use crate::linalg::dense_generalized_symmetric;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoincareError {
    #[error("exponent must satisfy s >= 1, got {0}")]
    BadExponent(f64),
    #[error("eigensolve failed: {0}")]
    Eigen(#[from] crate::linalg::LinalgError),
    #[error("degenerate grid")]
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct PoincareEstimate {
    /// supremum of the Rayleigh ratio found (a lower bound of the constant)
    pub c: f64,
    /// true for the s = 2 eigensolve route; ascent results are uncertified
    pub certified_route: bool,
    /// maximising field
    pub extremal: Vec<f64>,
}

/// The boundary-mean weights `m_j = λ·sw_j/b_j` scattered to node indices.
fn boundary_mean_weights(grid: &GridDomain) -> Vec<f64> {
    let mut m = vec![0.0; grid.n_nodes()];
    for bn in grid.boundary_nodes() {
        m[bn.node] = grid.lambda() * bn.surface_w / bn.b;
    }
    m
}

/// `(Pφ)_i = φ_i − λ⟨φ/b, 1⟩_{1,Γ}` for all bulk nodes.
pub fn project_boundary_mean(phi: &[f64], grid: &GridDomain) -> Vec<f64> {
    let m = boundary_mean_weights(grid);
    let mean: f64 = phi.iter().zip(&m).map(|(p, w)| p * w).sum();
    phi.iter().map(|p| p - mean).collect()
}

fn stiffness_dense(grid: &GridDomain) -> DMatrix<f64> {
    let n = grid.n_nodes();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for s in grid.samples() {
        let stencils: Vec<&[(usize, f64); 2]> = match &s.y_stencil {
            Some(ys) => vec![&s.x_stencil, ys],
            None => vec![&s.x_stencil],
        };
        for st in stencils {
            for &(i, ci) in st.iter() {
                for &(j, cj) in st.iter() {
                    k[(i, j)] += s.w * ci * cj;
                }
            }
        }
    }
    k
}

fn ratio(phi: &[f64], s: f64, grid: &GridDomain) -> f64 {
    let proj = project_boundary_mean(phi, grid);
    let num: f64 = proj
        .iter()
        .enumerate()
        .map(|(i, &x)| grid.vol_weight(i) * x.abs().powf(s))
        .sum::<f64>()
        .powf(1.0 / s);
    let den: f64 = grid
        .samples()
        .iter()
        .map(|sm| {
            let g = sm.grad(phi);
            sm.w * (g[0] * g[0] + g[1] * g[1]).sqrt().powf(s)
        })
        .sum::<f64>()
        .powf(1.0 / s);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Maximise `‖φ − λ⟨φ/b,1⟩_{1,Γ}‖_{L^s(Ω)} / ‖∇φ‖_{L^s(Ω)}` over discrete φ.
///
/// `s = 2`: the largest eigenvalue of `A x = θ (K + penalty) x` with
/// `A = Pᵀ M_Ω P` (both forms annihilate constants; the penalty removes the
/// stiffness null space).  `s ≠ 2`: projected gradient ascent on the log
/// ratio from 8 random starts.
pub fn estimate_poincare_constant(
    grid: &GridDomain,
    s: f64,
) -> Result<PoincareEstimate, PoincareError> {
    if !(s >= 1.0) {
        return Err(PoincareError::BadExponent(s));
    }
    if grid.n_nodes() < 3 {
        return Err(PoincareError::Degenerate);
    }
    let n = grid.n_nodes();
    if (s - 2.0).abs() < 1e-14 {
        let m = boundary_mean_weights(grid);
        let vol: Vec<f64> = (0..n).map(|i| grid.vol_weight(i)).collect();
        let omega = grid.omega();
        // A = M_Ω − (M1)mᵀ − m(M1)ᵀ + |Ω| m mᵀ
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] += vol[i];
            for j in 0..n {
                a[(i, j)] += -vol[i] * m[j] - m[i] * vol[j] + omega * m[i] * m[j];
            }
        }
        let mut k = stiffness_dense(grid);
        // rank-one penalty against the constant null space of K
        let scale = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n as f64;
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] += scale * vol[i] * vol[j] / omega;
            }
        }
        let (vals, vecs) = dense_generalized_symmetric(&a, &k)?;
        let theta = *vals.last().unwrap();
        let extremal = vecs.last().unwrap().iter().cloned().collect::<Vec<f64>>();
        return Ok(PoincareEstimate {
            c: theta.max(0.0).sqrt(),
            certified_route: true,
            extremal,
        });
    }
    // projected gradient ascent on ln(num/den)
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut best = (0.0f64, vec![0.0; n]);
    for _start in 0..8 {
        let mut phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut step = 0.1;
        let mut cur = ratio(&phi, s, grid);
        for _it in 0..300 {
            // numeric gradient of the log ratio (cheap at desk scale)
            let mut grad = vec![0.0; n];
            let d = 1e-6;
            for i in 0..n {
                let old = phi[i];
                phi[i] = old + d;
                let up = ratio(&phi, s, grid);
                phi[i] = old - d;
                let dn = ratio(&phi, s, grid);
                phi[i] = old;
                grad[i] = (up.ln() - dn.ln()) / (2.0 * d);
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                break;
            }
            let trial: Vec<f64> = phi
                .iter()
                .zip(&grad)
                .map(|(p, g)| p + step * g / gnorm)
                .collect();
            let val = ratio(&trial, s, grid);
            if val > cur {
                phi = trial;
                cur = val;
                step *= 1.2;
            } else {
                step *= 0.5;
                if step < 1e-10 {
                    break;
                }
            }
        }
        if cur > best.0 {
            best = (cur, phi);
        }
    }
    Ok(PoincareEstimate {
        c: best.0,
        certified_route: false,
        extremal: best.1,
    })
}

#[derive(Debug, Clone)]
pub struct TraceEstimate {
    pub c_eps: f64,
    /// which stress field drives the bound
    pub binding: String,
    pub gamma: f64,
}

/// Smallest `C_ε` on the grid such that
/// `‖u‖^s_{L^s(Γ)} ≤ ε‖∇u‖^p_{L^p} + C_ε(‖u‖^γ_{L^γ} + 1)` holds over a
/// stress ensemble of constants, random smooth fields and boundary layers.
pub fn estimate_trace_constant(grid: &GridDomain, s: f64, p: f64, eps: f64) -> TraceEstimate {
    assert!(s > 1.0 && p > 1.0 && eps > 0.0);
    let gamma = s.max(p * (s - 1.0) / (p - 1.0));
    let mut fields: Vec<(String, Vec<f64>)> = Vec::new();
    for &c in &[1.0, 2.0, -0.5] {
        fields.push((format!("const {c}"), vec![c; grid.n_nodes()]));
    }
    fields.push((
        "linear x".into(),
        (0..grid.n_nodes()).map(|i| grid.coords(i)[0]).collect(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..6 {
        let f = crate::stepper::random_smooth_field(grid, &mut rng, 1.0 + k as f64 * 0.5);
        fields.push((format!("random smooth {k}"), f.u));
    }
    let (lx, ly) = grid.extents;
    for &delta in &[0.02, 0.05, 0.1, 0.2] {
        let u: Vec<f64> = (0..grid.n_nodes())
            .map(|i| {
                let c = grid.coords(i);
                let dx = c[0].min(lx - c[0]);
                let d = if grid.dim == 2 {
                    dx.min(c[1].min(ly - c[1]))
                } else {
                    dx
                };
                (-d / delta).exp()
            })
            .collect();
        fields.push((format!("boundary layer δ={delta}"), u));
    }
    let mut c_eps = 0.0f64;
    let mut binding = "none".to_string();
    for (name, u) in &fields {
        let lhs: f64 = grid
            .boundary_nodes()
            .iter()
            .map(|bn| bn.surface_w * u[bn.node].abs().powf(s))
            .sum();
        let grad_p: f64 = grid
            .samples()
            .iter()
            .map(|sm| {
                let g = sm.grad(u);
                sm.w * (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p)
            })
            .sum();
        let lgamma: f64 = u
            .iter()
            .enumerate()
            .map(|(i, &ui)| grid.vol_weight(i) * ui.abs().powf(gamma))
            .sum();
        let need = (lhs - eps * grad_p) / (lgamma + 1.0);
        if need > c_eps {
            c_eps = need;
            binding = name.clone();
        }
    }
    TraceEstimate {
        c_eps,
        binding,
        gamma,
    }
}
