//! The discrete monotone operator `B_p` and its energy form.
//!
//! Everything is derived from one scalar functional, the flux energy
//! `Φ(u) = Σ_samples w · ½ A_ε(|∇u|²)` plus the bulk power term
//! `Σ_i vol_i |u_i|^p / p`.  The operator action is the exact gradient of
//! that functional re-expressed in the `dμ`-weighted pairing, so the discrete
//! duality `⟨B_p U, W⟩_{X²} = B̃_p(U, W)` holds to rounding by construction
//! (summation by parts is the bookkeeping of the chain rule, not a separate
//! approximation).  The boundary rows expose `b·a_ε(|∇u|²)·∂ₙu` with the
//! energy-consistent one-sided normal derivative.

use crate::grid::{GridDomain, StateField};
use crate::linalg::BandMatrix;
use crate::nonlin::FluxSpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("coercivity probe needs a nonzero state")]
    ZeroState,
}

/// Flux energy `Σ_samples w · ½ A_ε(|∇u|²)`.
pub fn flux_energy(u: &[f64], flux: &FluxSpec, grid: &GridDomain) -> f64 {
    grid.samples()
        .iter()
        .map(|s| {
            let g = s.grad(u);
            s.w * 0.5 * flux.a_eps_primitive(g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// `∫_Ω a_ε(|∇u|²)|∇u|² dx` (the flux dissipation integrand of the
/// absorbing-set functional).
pub fn flux_dissipation(u: &[f64], flux: &FluxSpec, grid: &GridDomain) -> f64 {
    grid.samples()
        .iter()
        .map(|s| {
            let g = s.grad(u);
            let sq = g[0] * g[0] + g[1] * g[1];
            s.w * flux.a_eps(sq) * sq
        })
        .sum()
}

/// Gradient of the flux energy, assembled per node.
pub fn flux_grad(u: &[f64], flux: &FluxSpec, grid: &GridDomain) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for s in grid.samples() {
        let g = s.grad(u);
        let a = flux.a_eps(g[0] * g[0] + g[1] * g[1]);
        for &(i, c) in &s.x_stencil {
            out[i] += s.w * a * g[0] * c;
        }
        if let Some(ys) = &s.y_stencil {
            for &(i, c) in ys {
                out[i] += s.w * a * g[1] * c;
            }
        }
    }
    out
}

/// Gradient of the flux energy together with, per boundary node, the part of
/// it that points along the outward normal (the discrete `∫_Γ a ∂ₙu · w dS`).
pub fn flux_grad_split(u: &[f64], flux: &FluxSpec, grid: &GridDomain) -> (Vec<f64>, Vec<f64>) {
    let mut total = vec![0.0; u.len()];
    let mut normal = vec![0.0; grid.n_boundary()];
    for s in grid.samples() {
        let g = s.grad(u);
        let a = flux.a_eps(g[0] * g[0] + g[1] * g[1]);
        for &(i, c) in &s.x_stencil {
            let t = s.w * a * g[0] * c;
            total[i] += t;
            if let Some(bi) = grid.boundary_index(i) {
                if grid.boundary_nodes()[bi].normal_dirs.0 {
                    normal[bi] += t;
                }
            }
        }
        if let Some(ys) = &s.y_stencil {
            for &(i, c) in ys {
                let t = s.w * a * g[1] * c;
                total[i] += t;
                if let Some(bi) = grid.boundary_index(i) {
                    if grid.boundary_nodes()[bi].normal_dirs.1 {
                        normal[bi] += t;
                    }
                }
            }
        }
    }
    (total, normal)
}

/// The form `B̃_p(U, W) = ∫ a_ε(|∇u|²)∇u·∇w + ∫ |u|^{p−2} u w`.
pub fn bp_form(u: &[f64], w: &[f64], flux: &FluxSpec, grid: &GridDomain) -> f64 {
    let p = flux.p();
    let mut acc = 0.0;
    for s in grid.samples() {
        let gu = s.grad(u);
        let gw = s.grad(w);
        let a = flux.a_eps(gu[0] * gu[0] + gu[1] * gu[1]);
        acc += s.w * a * (gu[0] * gw[0] + gu[1] * gw[1]);
    }
    for i in 0..u.len() {
        if u[i] != 0.0 {
            acc += grid.vol_weight(i) * u[i].abs().powf(p - 2.0) * u[i] * w[i];
        }
    }
    acc
}

/// Discrete `B_p U` in strong (nodal) form:
/// bulk rows `−div(a_ε(|∇u|²)∇u) + |u|^{p−2}u`, boundary rows
/// `b·a_ε(|∇u|²)·∂ₙu`, split so that the `dμ`-weighted pairing reproduces
/// [`bp_form`] exactly.
pub fn assemble_bp(state: &StateField, flux: &FluxSpec, grid: &GridDomain) -> StateField {
    assert!(state.matches(grid));
    let p = flux.p();
    let (total, normal) = flux_grad_split(&state.u, flux, grid);
    let mut out = StateField::zeros(grid);
    for i in 0..state.u.len() {
        let mut t = total[i];
        if let Some(bi) = grid.boundary_index(i) {
            t -= normal[bi];
        }
        let ui = state.u[i];
        let pterm = if ui == 0.0 {
            0.0
        } else {
            ui.abs().powf(p - 2.0) * ui
        };
        out.u[i] = t / grid.vol_weight(i) + pterm;
    }
    for (bi, bn) in grid.boundary_nodes().iter().enumerate() {
        out.v[bi] = bn.b / bn.surface_w * normal[bi];
    }
    out
}

/// `⟨A, W⟩_{X²}` for an assembled action `A` against a state `W`.
pub fn x2_pairing(action: &StateField, w: &StateField, grid: &GridDomain) -> f64 {
    let mut acc = 0.0;
    for i in 0..action.u.len() {
        acc += grid.vol_weight(i) * action.u[i] * w.u[i];
    }
    for (bi, bn) in grid.boundary_nodes().iter().enumerate() {
        acc += bn.surface_w / bn.b * action.v[bi] * w.v[bi];
    }
    acc
}

/// `⟨B_p U − B_p V, U − V⟩` in the discrete pairing; nonnegative up to
/// rounding by monotonicity, strictly positive when the bulk parts differ.
pub fn monotonicity_check(
    u: &StateField,
    v: &StateField,
    flux: &FluxSpec,
    grid: &GridDomain,
) -> f64 {
    let bu = assemble_bp(u, flux, grid);
    let bv = assemble_bp(v, flux, grid);
    let diff = StateField {
        u: u.u.iter().zip(&v.u).map(|(a, b)| a - b).collect(),
        v: u.v.iter().zip(&v.v).map(|(a, b)| a - b).collect(),
    };
    let db = StateField {
        u: bu.u.iter().zip(&bv.u).map(|(a, b)| a - b).collect(),
        v: bu.v.iter().zip(&bv.v).map(|(a, b)| a - b).collect(),
    };
    x2_pairing(&db, &diff, grid)
}

/// `B̃_p(cU, cU) / ‖cU‖_{V^p}` over a list of scales.  The `V^p` norm is the
/// equivalent `W^{1,p}` norm `‖∇u‖_p + ‖u‖_{L^p(Ω)}`.
pub fn coercivity_probe(
    state: &StateField,
    flux: &FluxSpec,
    grid: &GridDomain,
    scales: &[f64],
) -> Result<Vec<(f64, f64)>, OperatorError> {
    let p = flux.p();
    let norm1 = crate::grid::w1p_norm(&state.u, p, grid, crate::grid::LowerOrder::Volume { s: p });
    if norm1 == 0.0 {
        return Err(OperatorError::ZeroState);
    }
    let mut out = Vec::with_capacity(scales.len());
    for &c in scales {
        let scaled: Vec<f64> = state.u.iter().map(|x| c * x).collect();
        let form = bp_form(&scaled, &scaled, flux, grid);
        let norm =
            crate::grid::w1p_norm(&scaled, p, grid, crate::grid::LowerOrder::Volume { s: p });
        out.push((c, form / norm));
    }
    Ok(out)
}

/// Accumulate the Hessian of the flux energy into a banded matrix.
///
/// Per sample the Hessian in gradient space is `a_ε I + 2 a_ε' g gᵀ`
/// (eigenvalues `a_ε` transverse and `a_ε + 2 a_ε' |g|²` radial, both
/// positive for p > 1), pushed through the sample stencils.
pub fn add_flux_hessian(mat: &mut BandMatrix, u: &[f64], flux: &FluxSpec, grid: &GridDomain) {
    for s in grid.samples() {
        let g = s.grad(u);
        let sq = g[0] * g[0] + g[1] * g[1];
        let a = flux.a_eps(sq);
        let radial = flux.radial(sq);
        // assembled as a δ_kl + coef g_k g_l with coef = (radial − a)/|g|²
        let coef = if sq > 0.0 { (radial - a) / sq } else { 0.0 };
        let stencils: [Option<(&[(usize, f64); 2], f64)>; 2] = [
            Some((&s.x_stencil, g[0])),
            s.y_stencil.as_ref().map(|ys| (ys, g[1])),
        ];
        for (k, sk) in stencils.iter().enumerate() {
            let Some((stk, gk)) = sk else { continue };
            for (l, sl) in stencils.iter().enumerate() {
                let Some((stl, gl)) = sl else { continue };
                let diag = if k == l { a } else { 0.0 };
                let h_kl = diag + coef * gk * gl;
                if h_kl == 0.0 {
                    continue;
                }
                for &(i, ci) in stk.iter() {
                    for &(j, cj) in stl.iter() {
                        mat.add(i, j, s.w * h_kl * ci * cj);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_interval_grid, build_rectangle_grid, BProfile};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_state(grid: &GridDomain, rng: &mut ChaCha8Rng) -> StateField {
        let u: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        StateField::coupled(u, grid)
    }

    #[test]
    fn constant_state_rows() {
        let grid = build_interval_grid(9, 1.0, &BProfile::One).unwrap();
        let flux = FluxSpec::constant(1.0);
        let state = StateField::from_fn(&grid, |_| 3.0);
        let bp = assemble_bp(&state, &flux, &grid);
        for &row in &bp.u {
            assert!((row - 3.0).abs() < 1e-12, "bulk rows should be |u|^(p-2)u = c");
        }
        for &row in &bp.v {
            assert!(row.abs() < 1e-12, "flux rows vanish for constants");
        }
    }

    #[test]
    fn linear_state_rows_match_analytic() {
        let grid = build_interval_grid(33, 1.0, &BProfile::One).unwrap();
        let flux = FluxSpec::constant(1.0);
        let state = StateField::from_fn(&grid, |x| x[0]);
        let bp = assemble_bp(&state, &flux, &grid);
        // interior: -u'' + u = x
        for i in 1..grid.n_nodes() - 1 {
            assert!((bp.u[i] - grid.coords(i)[0]).abs() < 1e-12);
        }
        // boundary: b·a·∂ₙu = -1 at x=0, +1 at x=1 (energy-consistent stencil)
        assert!((bp.v[0] + 1.0).abs() < 1e-12);
        assert!((bp.v[1] - 1.0).abs() < 1e-12);
        // bulk rows at the boundary nodes only keep the |u|^{p-2}u part
        assert!(bp.u[0].abs() < 1e-12);
        assert!((bp.u[grid.n_nodes() - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duality_identity_1d_and_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grids = [
            build_interval_grid(41, 1.3, &BProfile::Const(2.0)).unwrap(),
            build_rectangle_grid(7, 6, (1.0, 0.8), &BProfile::Const(0.7)).unwrap(),
        ];
        let flux = FluxSpec::p_laplace(3.0, 1e-8);
        for grid in &grids {
            let state = rand_state(grid, &mut rng);
            let bp = assemble_bp(&state, &flux, grid);
            for _ in 0..100 {
                let w = rand_state(grid, &mut rng);
                let lhs = x2_pairing(&bp, &w, grid);
                let rhs = bp_form(&state.u, &w.u, &flux, grid);
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * scale,
                    "duality violated: {lhs} vs {rhs} (dim {})",
                    grid.dim
                );
            }
        }
    }

    #[test]
    fn monotonicity_zero_and_positive() {
        let grid = build_interval_grid(21, 1.0, &BProfile::One).unwrap();
        let flux = FluxSpec::constant(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = rand_state(&grid, &mut rng);
        assert_eq!(monotonicity_check(&u, &u, &flux, &grid), 0.0);
        // bulk bump: strictly positive for the quadratic form
        let mut bumped = u.clone();
        bumped.u[10] += 0.5;
        assert!(monotonicity_check(&u, &bumped, &flux, &grid) > 0.0);
    }

    #[test]
    fn monotonicity_random_pairs_all_p() {
        let grid = build_interval_grid(31, 1.0, &BProfile::One).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &p in &[2.0, 3.0, 4.0] {
            let flux = FluxSpec::p_laplace(p, 1e-8);
            for _ in 0..200 {
                let a = rand_state(&grid, &mut rng);
                let b = rand_state(&grid, &mut rng);
                let m = monotonicity_check(&a, &b, &flux, &grid);
                assert!(m >= -1e-12, "p={p}: {m}");
            }
        }
    }

    #[test]
    fn coercivity_probe_growth() {
        let grid = build_interval_grid(41, 1.0, &BProfile::One).unwrap();
        let state = StateField::from_fn(&grid, |x| (2.0 * x[0]).sin());
        let flux3 = FluxSpec::p_laplace(3.0, 0.0);
        let table = coercivity_probe(&state, &flux3, &grid, &[1.0, 10.0, 100.0]).unwrap();
        // ratio ~ c^{p-1}: each ×10 in scale multiplies the ratio by ~100
        assert!(table[1].1 / table[0].1 > 50.0);
        assert!(table[2].1 / table[1].1 > 50.0);
        assert!(table[0].1 <= table[1].1 && table[1].1 <= table[2].1);
        // p = 2 constant flux: ratio grows like c
        let flux2 = FluxSpec::constant(1.0);
        let t2 = coercivity_probe(&state, &flux2, &grid, &[1.0, 10.0]).unwrap();
        let growth = t2[1].1 / t2[0].1;
        assert!((growth - 10.0).abs() < 1.0, "quadratic form growth {growth}");
        // zero state refused
        let zero = StateField::zeros(&grid);
        assert!(coercivity_probe(&zero, &flux3, &grid, &[1.0]).is_err());
    }

    #[test]
    fn flux_hessian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (grid, band) in [
            (build_interval_grid(13, 1.0, &BProfile::One).unwrap(), 1usize),
            (
                build_rectangle_grid(5, 4, (1.0, 1.0), &BProfile::One).unwrap(),
                6usize,
            ),
        ] {
            for &p in &[2.0, 3.0, 4.0] {
                let flux = FluxSpec::p_laplace(p, 1e-6);
                let u: Vec<f64> =
                    (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w: Vec<f64> =
                    (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut h = BandMatrix::zeros(grid.n_nodes(), band);
                add_flux_hessian(&mut h, &u, &flux, &grid);
                let hw = h.matvec(&w);
                let eta = 1e-6;
                let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + eta * b).collect();
                let um: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - eta * b).collect();
                let gp = flux_grad(&up, &flux, &grid);
                let gm = flux_grad(&um, &flux, &grid);
                for i in 0..grid.n_nodes() {
                    let fd = (gp[i] - gm[i]) / (2.0 * eta);
                    assert!(
                        (fd - hw[i]).abs() < 5e-5 * (1.0 + fd.abs()),
                        "p={p} dim={} node {i}: fd {fd} vs H {}",
                        grid.dim,
                        hw[i]
                    );
                }
            }
        }
    }

    #[test]
    fn flux_energy_gradient_consistency() {
        // d/dη Φ(u + ηw) at 0 equals ⟨flux_grad(u), w⟩ (plain dot)
        let grid = build_rectangle_grid(6, 5, (1.2, 0.9), &BProfile::One).unwrap();
        let flux = FluxSpec::p_laplace(2.7, 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = flux_grad(&u, &flux, &grid);
        let dot: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
        let eta = 1e-6;
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + eta * b).collect();
        let um: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - eta * b).collect();
        let fd = (flux_energy(&up, &flux, &grid) - flux_energy(&um, &flux, &grid)) / (2.0 * eta);
        assert!((fd - dot).abs() < 1e-8 * (1.0 + dot.abs()));
    }
}
