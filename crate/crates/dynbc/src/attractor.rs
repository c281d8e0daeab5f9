//! Tangent linearisation of the semilinear system, Lyapunov spectra via
//! tangent-QR accumulation in the X² inner product, Kaplan–Yorke dimensions,
//! diffusion sweeps and the closed-form upper-bound calculator.
//!
//! The Kaplan–Yorke dimension computed from the tangent flow stands in for
//! the fractal dimension of the attractor: it shares the trace structure
//! that the dimension bound controls, and the testable content is its
//! scaling in the diffusion ν, not the constant.

use crate::fit::{linear_fit, LinFit};
use crate::grid::{x2_dot, GridDomain, StateField};
use crate::linalg::BandMatrix;
use crate::nonlin::{FluxKind, NonlinearitySpec};
use crate::stepper::{step_implicit, SolverConfig, TrajectoryRecord};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttractorError {
    #[error("tangent dynamics requires the semilinear case (constant flux, p = 2)")]
    NotSemilinear,
    #[error("base flow failed at t = {t:.4e}: {detail}")]
    BaseFlow { t: f64, detail: String },
    #[error("linear solve failed: {0}")]
    Linear(#[from] crate::linalg::LinalgError),
    #[error("exponents must be sorted in descending order")]
    Unsorted,
    #[error("inputs must be positive")]
    NonPositive,
    #[error("record tail is empty")]
    EmptyTail,
}

fn require_semilinear(cfg: &SolverConfig) -> Result<f64, AttractorError> {
    match cfg.flux.kind {
        FluxKind::Constant { nu } => Ok(nu),
        FluxKind::PowerLaw { .. } => Err(AttractorError::NotSemilinear),
    }
}

/// System matrix of one backward-Euler tangent step with coefficients frozen
/// at `base`: `M/dt + K_ν + M_Ω f'(u) + M_Γ g'(v)`.
fn tangent_matrix(
    base: &StateField,
    dt: f64,
    cfg: &SolverConfig,
    grid: &GridDomain,
) -> BandMatrix {
    let mut mat = BandMatrix::zeros(grid.n_nodes(), grid.bandwidth());
    crate::operator::add_flux_hessian(&mut mat, &base.u, &cfg.flux, grid);
    for i in 0..grid.n_nodes() {
        mat.add(
            i,
            i,
            grid.vol_weight(i) * (1.0 / dt + cfg.f.deriv(base.u[i])),
        );
    }
    for (bi, bn) in grid.boundary_nodes().iter().enumerate() {
        let m = bn.surface_w / bn.b;
        mat.add(bn.node, bn.node, m * (1.0 / dt + cfg.g.deriv(base.v[bi])));
    }
    mat
}

fn tangent_rhs(phi: &StateField, dt: f64, grid: &GridDomain) -> Vec<f64> {
    let mut rhs: Vec<f64> = phi
        .u
        .iter()
        .enumerate()
        .map(|(i, &x)| grid.vol_weight(i) / dt * x)
        .collect();
    for (bi, bn) in grid.boundary_nodes().iter().enumerate() {
        rhs[bn.node] += bn.surface_w / bn.b / dt * phi.v[bi];
    }
    rhs
}

/// One backward-Euler step of the variational system
/// `∂ₜv = νΔv − f'(u(t))v`, `∂ₜφ + νb∂ₙv + g'(u|_Γ)v = 0`
/// with coefficients frozen at the supplied base state.  Refuses `p ≠ 2`.
pub fn tangent_step(
    phi: &StateField,
    base: &StateField,
    dt: f64,
    cfg: &SolverConfig,
    grid: &GridDomain,
) -> Result<StateField, AttractorError> {
    require_semilinear(cfg)?;
    let lu = tangent_matrix(base, dt, cfg, grid).factor()?;
    let sol = lu.solve(&tangent_rhs(phi, dt, grid));
    Ok(StateField::coupled(sol, grid))
}

/// Modified Gram–Schmidt (applied twice) in the X² inner product; returns the
/// stretching factors (diagonal of R).  Degenerate directions are replaced by
/// fresh random vectors drawn from `rng`.
fn orthonormalize(
    tangents: &mut [StateField],
    grid: &GridDomain,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    fn project_out(tangents: &mut [StateField], i: usize, grid: &GridDomain, passes: usize) {
        for _ in 0..passes {
            for j in 0..i {
                let proj = x2_dot(&tangents[i].u, &tangents[j].u, grid);
                let (head, tail) = tangents.split_at_mut(i);
                let tj = &head[j];
                let ti = &mut tail[0];
                for (a, b) in ti.u.iter_mut().zip(&tj.u) {
                    *a -= proj * b;
                }
                for (a, b) in ti.v.iter_mut().zip(&tj.v) {
                    *a -= proj * b;
                }
            }
        }
    }
    let m = tangents.len();
    let mut norms = vec![0.0; m];
    for i in 0..m {
        let before = x2_dot(&tangents[i].u, &tangents[i].u, grid).sqrt();
        project_out(tangents, i, grid, 2);
        let nrm = x2_dot(&tangents[i].u, &tangents[i].u, grid).sqrt();
        if nrm <= 1e-7 * before.max(1e-300) {
            // direction cancelled (duplicated starts): reseed; no stretching
            // information survives, so the reported factor is the residual
            let fresh: Vec<f64> =
                (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            tangents[i] = StateField::coupled(fresh, grid);
            project_out(tangents, i, grid, 2);
            let fresh_nrm = x2_dot(&tangents[i].u, &tangents[i].u, grid).sqrt();
            for a in tangents[i].u.iter_mut() {
                *a /= fresh_nrm;
            }
            for a in tangents[i].v.iter_mut() {
                *a /= fresh_nrm;
            }
            norms[i] = nrm.max(1e-300);
            continue;
        }
        for a in tangents[i].u.iter_mut() {
            *a /= nrm;
        }
        for a in tangents[i].v.iter_mut() {
            *a /= nrm;
        }
        norms[i] = nrm;
    }
    norms
}

#[derive(Debug, Clone, Copy)]
pub struct LyapunovParams {
    /// tangent directions (≤ 32)
    pub m: usize,
    pub t_transient: f64,
    /// tangent warm-up after the base transient: QR runs but nothing is
    /// accumulated, so the random-initialisation alignment does not bias the
    /// averages
    pub t_warmup: f64,
    pub t_average: f64,
    pub dt: f64,
    /// reorthonormalisation stride in steps
    pub stride: usize,
    pub seed: u64,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        LyapunovParams {
            m: 8,
            t_transient: 5.0,
            t_warmup: 5.0,
            t_average: 40.0,
            dt: 1e-2,
            stride: 5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// exponents sorted descending
    pub exponents: Vec<f64>,
    /// relative drift between the two halves of the averaging window
    pub drift: Vec<f64>,
    /// drift ≤ 10% per exponent
    pub converged: Vec<bool>,
}

impl SpectrumReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Lyapunov spectrum by tangent-QR accumulation along the base flow from
/// `u0`: evolve `m` tangents, reorthonormalise in X² every `stride` steps,
/// average the log stretching factors over `t_average` after discarding
/// `t_transient`.
pub fn lyapunov_spectrum(
    u0: &StateField,
    cfg: &SolverConfig,
    grid: &GridDomain,
    params: &LyapunovParams,
) -> Result<SpectrumReport, AttractorError> {
    require_semilinear(cfg)?;
    assert!(params.m >= 1 && params.m <= 32, "tangent count must be 1..=32");
    let dt = params.dt;
    let mut state = u0.clone();
    let mut t = 0.0;
    while t < params.t_transient {
        let (next, _) = step_implicit(&state, dt, cfg, grid, t + dt).map_err(|e| {
            AttractorError::BaseFlow {
                t,
                detail: e.to_string(),
            }
        })?;
        state = next;
        t += dt;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tangents: Vec<StateField> = (0..params.m)
        .map(|_| {
            let u: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            StateField::coupled(u, grid)
        })
        .collect();
    orthonormalize(&mut tangents, grid, &mut rng);
    let warm_steps = (params.t_warmup / dt).round() as usize;
    let steps = (params.t_average / dt).round() as usize;
    let mut accum = vec![0.0; params.m];
    let mut accum_first_half = vec![0.0; params.m];
    let half = steps / 2;
    for step in 0..warm_steps + steps {
        let (next, _) = step_implicit(&state, dt, cfg, grid, t + dt).map_err(|e| {
            AttractorError::BaseFlow {
                t,
                detail: e.to_string(),
            }
        })?;
        let lu = tangent_matrix(&next, dt, cfg, grid).factor()?;
        for phi in tangents.iter_mut() {
            let sol = lu.solve(&tangent_rhs(phi, dt, grid));
            *phi = StateField::coupled(sol, grid);
        }
        state = next;
        t += dt;
        if (step + 1) % params.stride == 0 || step + 1 == warm_steps + steps {
            let norms = orthonormalize(&mut tangents, grid, &mut rng);
            if step < warm_steps {
                continue;
            }
            for (acc, n) in accum.iter_mut().zip(&norms) {
                *acc += n.ln();
            }
            if step < warm_steps + half {
                for (acc, n) in accum_first_half.iter_mut().zip(&norms) {
                    *acc += n.ln();
                }
            }
        }
    }
    let t_avg = steps as f64 * dt;
    let t_half = half as f64 * dt;
    let mut triple: Vec<(f64, f64)> = accum
        .iter()
        .zip(&accum_first_half)
        .map(|(&a, &a1)| {
            let full = a / t_avg;
            let first = a1 / t_half;
            let second = (a - a1) / (t_avg - t_half);
            let scale = full.abs().max(0.05 * accum.iter().map(|x| (x / t_avg).abs()).fold(0.0, f64::max)).max(1e-12);
            (full, (first - second).abs() / scale)
        })
        .collect();
    triple.sort_by(|a, b| b.0.total_cmp(&a.0));
    let exponents: Vec<f64> = triple.iter().map(|x| x.0).collect();
    let drift: Vec<f64> = triple.iter().map(|x| x.1).collect();
    let converged: Vec<bool> = drift.iter().map(|&d| d <= 0.1).collect();
    Ok(SpectrumReport {
        exponents,
        drift,
        converged,
    })
}

/// Kaplan–Yorke interpolation of a descending exponent sequence: the largest
/// `j` with nonnegative partial sum, plus the fractional part; 0 when the
/// leading exponent is negative.
pub fn kaplan_yorke(exponents: &[f64]) -> Result<f64, AttractorError> {
    if exponents.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(AttractorError::Unsorted);
    }
    if exponents.is_empty() || exponents[0] < 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut j = 0;
    let mut sum_j = 0.0;
    for (k, &lam) in exponents.iter().enumerate() {
        sum += lam;
        if sum >= 0.0 {
            j = k + 1;
            sum_j = sum;
        } else {
            break;
        }
    }
    if j == exponents.len() {
        // every partial sum is nonnegative: the dimension is not resolved
        // with this many exponents; report the count itself
        return Ok(j as f64);
    }
    Ok(j as f64 + sum_j / exponents[j].abs())
}

/// Closed-form dimension upper bound: the root
/// `y* = (1 + C*/(ν c₁ C_W))^{N−1}` for `N ≥ 2`; the `N = 1` branch uses
/// exponent 1/2.  Decreasing in ν, increasing in `C*`.
pub fn upper_bound_dim(c_star: f64, nu: f64, c1_cw: f64, n_dim: usize) -> Result<f64, AttractorError> {
    if !(c_star > 0.0) || !(nu > 0.0) || !(c1_cw > 0.0) || n_dim == 0 {
        return Err(AttractorError::NonPositive);
    }
    let base = 1.0 + c_star / (nu * c1_cw);
    let expo = if n_dim == 1 {
        0.5
    } else {
        (n_dim - 1) as f64
    };
    Ok(base.powf(expo))
}

/// `max sup { ‖f'(u(t))‖_∞, ‖g'(v(t))‖_∞ }` over the trailing fraction of a
/// record's snapshots (the attractor proxy).
pub fn estimate_c_star(
    record: &TrajectoryRecord,
    f: &NonlinearitySpec,
    g: &NonlinearitySpec,
    tail_fraction: f64,
) -> Result<f64, AttractorError> {
    let t_cut = (1.0 - tail_fraction) * record.t_end();
    let mut c_star = f64::NEG_INFINITY;
    let mut seen = false;
    for (t, snap) in &record.snapshots {
        if *t < t_cut {
            continue;
        }
        seen = true;
        for &ui in &snap.u {
            c_star = c_star.max(f.deriv(ui).abs());
        }
        for &vj in &snap.v {
            c_star = c_star.max(g.deriv(vj).abs());
        }
    }
    if !seen {
        return Err(AttractorError::EmptyTail);
    }
    Ok(c_star)
}

#[derive(Debug, Clone)]
pub struct NuSweepEntry {
    pub nu: f64,
    pub dimension: f64,
    pub exponents: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub entries: Vec<NuSweepEntry>,
    /// log-log slope of dimension vs ν with its fit diagnostics
    pub slope: Option<LinFit>,
    /// 95% half-width of the slope
    pub slope_ci: Option<f64>,
    /// true when some spectrum failed to converge or was degenerate
    pub partial: bool,
}

/// Run [`lyapunov_spectrum`] per ν (independent parallel jobs) and fit the
/// log-log slope of Kaplan–Yorke dimension against ν.  Degenerate entries
/// (dimension 0) are excluded from the fit and flagged as partial.
pub fn sweep_nu<F>(
    nu_list: &[f64],
    build: F,
    grid: &GridDomain,
    params: &LyapunovParams,
) -> SweepReport
where
    F: Fn(f64) -> (SolverConfig, StateField) + Sync,
{
    let mut entries: Vec<NuSweepEntry> = nu_list
        .par_iter()
        .map(|&nu| {
            let (cfg, u0) = build(nu);
            match lyapunov_spectrum(&u0, &cfg, grid, params) {
                Ok(spec) => {
                    let dim = kaplan_yorke(&spec.exponents).unwrap_or(0.0);
                    NuSweepEntry {
                        nu,
                        dimension: dim,
                        exponents: spec.exponents.clone(),
                        converged: spec.all_converged(),
                    }
                }
                Err(_) => NuSweepEntry {
                    nu,
                    dimension: 0.0,
                    exponents: Vec::new(),
                    converged: false,
                },
            }
        })
        .collect();
    entries.sort_by(|a, b| a.nu.total_cmp(&b.nu));
    let usable: Vec<&NuSweepEntry> = entries
        .iter()
        .filter(|e| e.dimension > 0.0 && e.converged)
        .collect();
    let partial = usable.len() < entries.len();
    let slope = if usable.len() >= 3 {
        let xs: Vec<f64> = usable.iter().map(|e| e.nu.ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|e| e.dimension.ln()).collect();
        linear_fit(&xs, &ys)
    } else {
        None
    };
    let slope_ci = slope.map(|f| 1.96 * f.slope_se);
    SweepReport {
        entries,
        slope,
        slope_ci,
        partial,
    }
}

/// Chafee–Infante-type dissipative scenario: `f(u) = u³ − βu`, `g(u) = u`,
/// no sources, base trajectory at the homogeneous equilibrium `u ≡ 0`, where
/// the destabilisation is maximal (the point the trace bound controls).
pub fn chafee_infante_builder(
    beta: f64,
    grid: &GridDomain,
) -> impl Fn(f64) -> (SolverConfig, StateField) + Sync + '_ {
    move |nu: f64| {
        let f = NonlinearitySpec::poly(vec![0.0, -beta, 0.0, 1.0]);
        let g = NonlinearitySpec::linear(1.0);
        let cfg = SolverConfig::new(crate::nonlin::FluxSpec::constant(nu), f, g).fixed_dt(1e-2);
        (cfg, StateField::zeros(grid))
    }
}

/// Eigenvalues (ascending) of the linearisation pencil at `u = 0` with
/// diffusion ν and unit boundary damping: `(K_ν + M_Γ) x = λ M x`.
pub fn linearization_spectrum_at_zero(grid: &GridDomain, nu: f64) -> Vec<f64> {
    use nalgebra::DMatrix;
    let n = grid.n_nodes();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for s in grid.samples() {
        let stencils: Vec<&[(usize, f64); 2]> = match &s.y_stencil {
            Some(ys) => vec![&s.x_stencil, ys],
            None => vec![&s.x_stencil],
        };
        for st in stencils {
            for &(i, ci) in st.iter() {
                for &(j, cj) in st.iter() {
                    a[(i, j)] += s.w * nu * ci * cj;
                }
            }
        }
    }
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = grid.x2_mass(i);
    }
    for bn in grid.boundary_nodes() {
        a[(bn.node, bn.node)] += bn.surface_w / bn.b; // g'(0) = 1
    }
    crate::linalg::dense_generalized_symmetric(&a, &b)
        .map(|(vals, _)| vals)
        .unwrap_or_default()
}

/// Pick β so the scenario has at least `k` unstable tangent modes at the
/// largest diffusion of the sweep (β sits between the k-th and (k+1)-th
/// eigenvalues of the ν_max linearisation).
pub fn choose_beta(grid: &GridDomain, nu_max: f64, k: usize) -> f64 {
    let vals = linearization_spectrum_at_zero(grid, nu_max);
    assert!(vals.len() > k, "grid too small for {k} unstable modes");
    0.5 * (vals[k - 1] + vals[k])
}

/// Number of unstable tangent modes of the scenario at diffusion ν.
pub fn count_unstable_modes(grid: &GridDomain, nu: f64, beta: f64) -> usize {
    linearization_spectrum_at_zero(grid, nu)
        .iter()
        .filter(|&&lam| lam < beta)
        .count()
}

/// Expected Kaplan–Yorke dimension of the scenario at diffusion ν, from the
/// eigenvalues of the linearisation (exponents `β − λ_j`).
pub fn expected_dimension(grid: &GridDomain, nu: f64, beta: f64) -> f64 {
    let mut exps: Vec<f64> = linearization_spectrum_at_zero(grid, nu)
        .iter()
        .map(|&lam| beta - lam)
        .collect();
    exps.sort_by(|a, b| b.total_cmp(a));
    kaplan_yorke(&exps).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_interval_grid, x2_norm, BProfile};
    use crate::nonlin::FluxSpec;

    fn heat_cfg(nu: f64) -> SolverConfig {
        SolverConfig::new(
            FluxSpec::constant(nu),
            NonlinearitySpec::zero(),
            NonlinearitySpec::zero(),
        )
    }

    #[test]
    fn tangent_refuses_degenerate_flux() {
        let grid = build_interval_grid(11, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::p_laplace(3.0, 1e-8),
            NonlinearitySpec::zero(),
            NonlinearitySpec::zero(),
        );
        let phi = StateField::from_fn(&grid, |_| 1.0);
        assert!(matches!(
            tangent_step(&phi, &phi, 1e-2, &cfg, &grid),
            Err(AttractorError::NotSemilinear)
        ));
    }

    #[test]
    fn constant_tangent_scalar_decay() {
        // f' ≡ λ and g' ≡ λ with constant-in-space Φ: exact 1/(1+λdt) decay
        let grid = build_interval_grid(21, 1.0, &BProfile::One).unwrap();
        let lam = 0.7;
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::linear(lam),
            NonlinearitySpec::linear(lam),
        );
        let base = StateField::zeros(&grid);
        let phi = StateField::from_fn(&grid, |_| 1.0);
        let dt = 5e-2;
        let next = tangent_step(&phi, &base, dt, &cfg, &grid).unwrap();
        let target = 1.0 / (1.0 + lam * dt);
        for &x in &next.u {
            assert!((x - target).abs() < 1e-12, "{x} vs {target}");
        }
    }

    #[test]
    fn tangent_matches_dense_heat_oracle() {
        let grid = build_interval_grid(31, 1.0, &BProfile::One).unwrap();
        let cfg = heat_cfg(1.0);
        let base = StateField::zeros(&grid);
        let phi = StateField::from_fn(&grid, |x| (2.0 * x[0]).cos());
        let dt = 1e-2;
        let next = tangent_step(&phi, &base, dt, &cfg, &grid).unwrap();
        use nalgebra::{DMatrix, DVector};
        let n = grid.n_nodes();
        let h = 1.0 / (n as f64 - 1.0);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..n {
            a[(i, i)] += grid.x2_mass(i) / dt;
            rhs[i] = grid.x2_mass(i) / dt * phi.u[i];
        }
        for c in 0..n - 1 {
            a[(c, c)] += 1.0 / h;
            a[(c + 1, c + 1)] += 1.0 / h;
            a[(c, c + 1)] -= 1.0 / h;
            a[(c + 1, c)] -= 1.0 / h;
        }
        let sol = a.lu().solve(&rhs).unwrap();
        for i in 0..n {
            assert!((next.u[i] - sol[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn tangent_is_first_order_derivative_of_flow() {
        // ‖(S(U₀+ηΦ) − S(U₀))/η − LΦ‖ = O(η)
        let grid = build_interval_grid(31, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::cubic(),
            NonlinearitySpec::cubic(),
        );
        let u0 = StateField::from_fn(&grid, |x| 0.8 * (3.0 * x[0]).sin() + 0.4);
        let phi = StateField::from_fn(&grid, |x| (1.0 + x[0]).cos());
        let dt = 1e-2;
        let (base_next, _) = step_implicit(&u0, dt, &cfg, &grid, dt).unwrap();
        let lphi = tangent_step(&phi, &base_next, dt, &cfg, &grid).unwrap();
        let mut residuals = Vec::new();
        for &eta in &[1e-3, 1e-4, 1e-5] {
            let pert = StateField::coupled(
                u0.u.iter().zip(&phi.u).map(|(a, b)| a + eta * b).collect(),
                &grid,
            );
            let (pert_next, _) = step_implicit(&pert, dt, &cfg, &grid, dt).unwrap();
            let fd = StateField {
                u: pert_next
                    .u
                    .iter()
                    .zip(&base_next.u)
                    .zip(&lphi.u)
                    .map(|((a, b), l)| (a - b) / eta - l)
                    .collect(),
                v: pert_next
                    .v
                    .iter()
                    .zip(&base_next.v)
                    .zip(&lphi.v)
                    .map(|((a, b), l)| (a - b) / eta - l)
                    .collect(),
            };
            residuals.push(x2_norm(&fd, &grid));
        }
        // O(η): each decade of η buys about a decade of residual
        assert!(residuals[1] < 0.2 * residuals[0], "{residuals:?}");
        assert!(residuals[2] < 0.2 * residuals[1], "{residuals:?}");
    }

    #[test]
    fn lyapunov_pure_diffusion_matches_eigenvalues() {
        let grid = build_interval_grid(41, 1.0, &BProfile::One).unwrap();
        let cfg = heat_cfg(1.0).fixed_dt(1e-3);
        let params = LyapunovParams {
            m: 4,
            t_transient: 0.1,
            t_warmup: 2.0,
            t_average: 4.0,
            dt: 1e-3,
            stride: 5,
            seed: 3,
        };
        let spec = lyapunov_spectrum(&StateField::zeros(&grid), &cfg, &grid, &params).unwrap();
        // oracle: exponents are −(pencil eigenvalues) with g' = 0 here
        use nalgebra::DMatrix;
        let n = grid.n_nodes();
        let h = 1.0 / (n as f64 - 1.0);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DMatrix::<f64>::zeros(n, n);
        for c in 0..n - 1 {
            a[(c, c)] += 1.0 / h;
            a[(c + 1, c + 1)] += 1.0 / h;
            a[(c, c + 1)] -= 1.0 / h;
            a[(c + 1, c)] -= 1.0 / h;
        }
        for i in 0..n {
            b[(i, i)] = grid.x2_mass(i);
        }
        let (vals, _) = crate::linalg::dense_generalized_symmetric(&a, &b).unwrap();
        for k in 0..3 {
            let expect = -vals[k];
            let got = spec.exponents[k];
            assert!(
                (got - expect).abs() <= 0.05 * expect.abs().max(0.5),
                "exponent {k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn lyapunov_stable_equilibrium_leading_exponent() {
        // f = u³ + u: f'(0) = 1, g = u: leading exponent ≈ −λ₁(K + M_Ω + M_Γ)
        let grid = build_interval_grid(41, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::poly(vec![0.0, 1.0, 0.0, 1.0]),
            NonlinearitySpec::linear(1.0),
        )
        .fixed_dt(1e-3);
        let params = LyapunovParams {
            m: 2,
            t_transient: 0.1,
            t_warmup: 2.0,
            t_average: 4.0,
            dt: 1e-3,
            stride: 5,
            seed: 5,
        };
        let spec = lyapunov_spectrum(&StateField::zeros(&grid), &cfg, &grid, &params).unwrap();
        // oracle pencil (K + M_Ω f'(0) + M_Γ g'(0)) vs M, assembled densely
        use nalgebra::DMatrix;
        let n = grid.n_nodes();
        let h = 1.0 / (n as f64 - 1.0);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DMatrix::<f64>::zeros(n, n);
        for c in 0..n - 1 {
            a[(c, c)] += 1.0 / h;
            a[(c + 1, c + 1)] += 1.0 / h;
            a[(c, c + 1)] -= 1.0 / h;
            a[(c + 1, c)] -= 1.0 / h;
        }
        for i in 0..n {
            a[(i, i)] += grid.vol_weight(i);
            b[(i, i)] = grid.x2_mass(i);
        }
        for bn in grid.boundary_nodes() {
            a[(bn.node, bn.node)] += bn.surface_w / bn.b;
        }
        let (vals, _) = crate::linalg::dense_generalized_symmetric(&a, &b).unwrap();
        let expect = -vals[0];
        assert!(
            (spec.exponents[0] - expect).abs() <= 0.03 * expect.abs(),
            "{} vs {}",
            spec.exponents[0],
            expect
        );
    }

    #[test]
    fn duplicated_tangents_recover() {
        let grid = build_interval_grid(21, 1.0, &BProfile::One).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let base = StateField::from_fn(&grid, |x| x[0]);
        let mut tangents = vec![base.clone(), base.clone(), base];
        let norms = orthonormalize(&mut tangents, &grid, &mut rng);
        assert!(norms.iter().all(|n| n.is_finite()));
        for i in 0..3 {
            for j in 0..3 {
                let dot = x2_dot(&tangents[i].u, &tangents[j].u, &grid);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot - expect).abs() < 1e-10,
                    "⟨{i},{j}⟩ = {dot}"
                );
            }
        }
    }

    #[test]
    fn reorthonormalization_stride_insensitive() {
        let grid = build_interval_grid(31, 1.0, &BProfile::One).unwrap();
        let cfg = heat_cfg(0.5).fixed_dt(2e-3);
        let run = |stride: usize| {
            let params = LyapunovParams {
                m: 3,
                t_transient: 0.1,
                t_warmup: 2.0,
                t_average: 3.0,
                dt: 2e-3,
                stride,
                seed: 11,
            };
            lyapunov_spectrum(&StateField::zeros(&grid), &cfg, &grid, &params)
                .unwrap()
                .exponents
        };
        let (e5, e10) = (run(5), run(10));
        for k in 0..3 {
            let rel = (e5[k] - e10[k]).abs() / e5[k].abs().max(1e-9);
            assert!(rel < 0.05, "exponent {k}: {} vs {}", e5[k], e10[k]);
        }
    }

    #[test]
    fn kaplan_yorke_formula() {
        assert_eq!(kaplan_yorke(&[1.0, -2.0]).unwrap(), 1.5);
        assert_eq!(kaplan_yorke(&[-0.1, -1.0]).unwrap(), 0.0);
        assert!((kaplan_yorke(&[2.0, 1.0, -1.0, -5.0]).unwrap() - 3.4).abs() < 1e-14);
        assert!(matches!(
            kaplan_yorke(&[1.0, 2.0]),
            Err(AttractorError::Unsorted)
        ));
        // monotone under uniform positive shift
        let base = [0.5, 0.1, -0.4, -2.0];
        let d0 = kaplan_yorke(&base).unwrap();
        let shifted: Vec<f64> = base.iter().map(|x| x + 0.2).collect();
        let d1 = kaplan_yorke(&shifted).unwrap();
        assert!(d1 >= d0);
    }

    #[test]
    fn upper_bound_dim_exact_and_monotone() {
        assert_eq!(upper_bound_dim(1.0, 1.0, 1.0, 2).unwrap(), 2.0);
        assert_eq!(upper_bound_dim(3.0, 1.0, 1.0, 3).unwrap(), 16.0);
        assert!((upper_bound_dim(1.0, 1e9, 1.0, 2).unwrap() - 1.0).abs() < 1e-8);
        assert!(upper_bound_dim(-1.0, 1.0, 1.0, 2).is_err());
        // ∂/∂ν < 0 by finite differences over a 5×5 grid of (C*, c₁C_W)
        for i in 1..=5 {
            for j in 1..=5 {
                let (c, k) = (i as f64 * 0.5, j as f64 * 0.7);
                for &nu in &[0.1, 0.5, 1.0, 2.0] {
                    let d = 1e-6;
                    let up = upper_bound_dim(c, nu + d, k, 2).unwrap();
                    let dn = upper_bound_dim(c, nu - d, k, 2).unwrap();
                    assert!(up < dn, "not decreasing in ν at ({c},{k},{nu})");
                }
            }
        }
    }

    #[test]
    fn c_star_formulas() {
        let grid = build_interval_grid(21, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::linear(1.0),
            NonlinearitySpec::linear(1.0),
        )
        .fixed_dt(1e-2)
        .with_snapshot_stride(2);
        let u0 = StateField::from_fn(&grid, |x| x[0]);
        let rec = crate::stepper::simulate(&u0, 0.2, &cfg, &grid);
        // linear f, g: C* = 1 exactly
        let c = estimate_c_star(&rec, &cfg.f, &cfg.g, 0.5).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
        // cubic f on a tail with ‖u‖_∞ = M: C* = 3M²
        let cubic = NonlinearitySpec::cubic();
        let c3 = estimate_c_star(&rec, &cubic, &cfg.g, 0.5).unwrap();
        let m_inf = rec
            .snapshots
            .iter()
            .filter(|(t, _)| *t >= 0.5 * rec.t_end())
            .flat_map(|(_, s)| s.u.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!((c3 - 3.0 * m_inf * m_inf).abs() < 1e-12);
    }
}
