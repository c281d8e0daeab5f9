//! Finite-time blow-up made executable: Dirichlet eigenpairs, the
//! subsolution `w₀ = δφ₁ + A`, the tail-integral criterion on the dominating
//! function, scalar ODE companions and the numerically verified comparison
//! principle.
//!
//! The construction: when the bulk reaction is dominated by a decreasing
//! concave `h < 0` with `∫ ds/|h| < ∞` and tail slope below `−λ_{1,D}`, the
//! Dirichlet companion `v_t − νΔv + f(v) = 0`, `v|_Γ = 0` blows up for large
//! data, and `w₀ + v` is a subsolution of the dynamic-boundary problem, so
//! every solution starting above `w₀ + v₀` blows up no later than the
//! companion.

use crate::grid::{GridDomain, StateField};
use crate::linalg::{adaptive_simpson, smallest_eigenpair_banded, BandMatrix, LinalgError};
use crate::nonlin::{FluxSpec, NonlinearitySpec};
use crate::stepper::{simulate, SolverConfig, Termination, TrajectoryRecord};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlowupError {
    #[error("eigensolve failed: {0}")]
    Eigen(#[from] LinalgError),
    #[error("discrete ground state is not interior-positive")]
    NonPositiveEigenfunction,
    #[error("∂ₙφ₁ is not negative at boundary node {0}")]
    BadNormalDerivative(usize),
    #[error("dominating function is not decreasing on the tail (at s = {0:.3e})")]
    NonMonotone(f64),
    #[error("no dominating h: f is not negative on a tail")]
    NoDominatingH,
    #[error("tail slope of h does not drop below -λ_1D")]
    TailSlopeTooShallow,
    #[error("tail integral ∫ ds/|h| does not converge")]
    IntegralDiverges,
    #[error("domination f ≤ h fails at s = {0:.3e}")]
    DominationFails(f64),
    #[error("companion run did not blow up: {0}")]
    CompanionDidNotBlowUp(String),
    #[error("trajectories live on incompatible grids")]
    GridMismatch,
}

/// Smallest Dirichlet eigenpair of `−νΔ`: `(λ_{1,D}, φ₁)` with `φ₁ > 0` in
/// the interior and `‖φ₁‖_{L¹(Ω)} = 1`; `φ₁` is returned on all nodes (zero
/// on Γ).
pub fn dirichlet_eigenpair(grid: &GridDomain, nu: f64) -> Result<(f64, Vec<f64>), BlowupError> {
    let n = grid.n_nodes();
    // interior indexing
    let mut map = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for i in 0..n {
        if grid.boundary_index(i).is_none() {
            map[i] = interior.len();
            interior.push(i);
        }
    }
    let ni = interior.len();
    // full stiffness of the quadratic flux with a ≡ ν, then restrict
    let mut full = BandMatrix::zeros(n, grid.bandwidth());
    crate::operator::add_flux_hessian(&mut full, &vec![0.0; n], &FluxSpec::constant(nu), grid);
    let band_int = if grid.dim == 1 { 1 } else { grid.shape.0 - 1 };
    let mut k_int = BandMatrix::zeros(ni, band_int);
    for (ii, &i) in interior.iter().enumerate() {
        let jlo = i.saturating_sub(grid.bandwidth());
        let jhi = (i + grid.bandwidth()).min(n - 1);
        for j in jlo..=jhi {
            if map[j] != usize::MAX {
                let v = full.get(i, j);
                if v != 0.0 {
                    k_int.add(ii, map[j], v);
                }
            }
        }
    }
    let m_int: Vec<f64> = interior.iter().map(|&i| grid.vol_weight(i)).collect();
    let (lambda, phi_int) = smallest_eigenpair_banded(&k_int, &m_int, 1e-13, 1000)?;
    if phi_int.iter().any(|&x| x <= 0.0) {
        return Err(BlowupError::NonPositiveEigenfunction);
    }
    let mut phi = vec![0.0; n];
    for (ii, &i) in interior.iter().enumerate() {
        phi[i] = phi_int[ii];
    }
    let l1: f64 = (0..n).map(|i| grid.vol_weight(i) * phi[i].abs()).sum();
    for x in &mut phi {
        *x /= l1;
    }
    Ok((lambda, phi))
}

/// Verdict of the blow-up criterion on a dominating function `h`.
#[derive(Debug, Clone)]
pub struct HCriterion {
    /// threshold past which `h' < −λ_{1,D}` holds
    pub s0_prime: f64,
    /// partial integrals `∫_{s_start}^{10^k} ds/|h|`
    pub partials: Vec<f64>,
    pub integral_converges: bool,
    /// concavity is checked and reported, not enforced
    pub concave_on_tail: bool,
}

/// Check `lim sup h' < −λ_{1,D}` and the Cauchy convergence of
/// `∫ ds/|h(s)|` on `[s_start, 10^k]`, `k ≤ 12`.  The lower endpoint is
/// `max(s₀, 1) + 1`: only the tail decides convergence and this avoids the
/// spurious divergence at a zero of `h`.
pub fn check_h_criterion(
    h: &NonlinearitySpec,
    s0: f64,
    lambda_1d: f64,
) -> Result<HCriterion, BlowupError> {
    // monotone decreasing and negative past s0 (sampled)
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let s = (s0.max(1e-3) * 1.001) * (1e8f64 / s0.max(1e-3)).powf(k as f64 / 199.0);
        let hs = h.eval(s);
        if hs > prev + 1e-12 * prev.abs().max(1.0) {
            return Err(BlowupError::NonMonotone(s));
        }
        prev = hs;
    }
    // tail slope
    let tail_slope = (0..50)
        .map(|k| h.deriv(1e4 * (1e4f64).powf(k as f64 / 49.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    if tail_slope >= -lambda_1d {
        return Err(BlowupError::TailSlopeTooShallow);
    }
    // s0': onset of h' < -λ_{1,D}, by log scan + bisection
    let mut s0_prime = 0.0;
    let mut last_above: Option<f64> = None;
    for k in 0..400 {
        let s = 1e-6 * (1e14f64).powf(k as f64 / 399.0);
        if h.deriv(s) >= -lambda_1d {
            last_above = Some(s);
        }
    }
    if let Some(mut lo) = last_above {
        let mut hi = lo * (1e14f64).powf(1.0 / 399.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h.deriv(mid) >= -lambda_1d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        s0_prime = hi;
    }
    // concavity probe on the tail (reported, not enforced)
    let concave_on_tail = (0..50).all(|k| {
        let s = 1.0 * (1e6f64).powf(k as f64 / 49.0);
        let d = s * 1e-4;
        h.eval(s + d) + h.eval(s - d) - 2.0 * h.eval(s) <= 1e-9 * h.eval(s).abs().max(1.0)
    });
    // Cauchy partial integrals
    let s_start = s0.max(1.0) + 1.0;
    let mut partials = Vec::new();
    let mut lo = s_start;
    let mut total = 0.0;
    let mut increments = Vec::new();
    for k in 1..=12 {
        let hi = 10f64.powi(k);
        if hi <= lo {
            continue;
        }
        let inc = adaptive_simpson(&|s| 1.0 / h.eval(s).abs().max(1e-300), lo, hi, 1e-10);
        total += inc;
        partials.push(total);
        increments.push(inc);
        lo = hi;
    }
    let integral_converges = increments.len() >= 4 && {
        let first = increments[0];
        let last = *increments.last().unwrap();
        let decreasing = increments.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
        decreasing && last < 0.05 * first
    };
    if !integral_converges {
        return Err(BlowupError::IntegralDiverges);
    }
    Ok(HCriterion {
        s0_prime,
        partials,
        integral_converges,
        concave_on_tail,
    })
}

/// The subsolution data of the blow-up construction.
#[derive(Debug, Clone)]
pub struct SubsolutionRecipe {
    /// level shift `A = max(s₀, s₀', 0)`
    pub a_level: f64,
    /// eigenfunction scale, minimal admissible × (1 + 1e−6)
    pub delta: f64,
    pub lambda_1d: f64,
    /// L¹-normalised ground state on all nodes (zero on Γ)
    pub phi1: Vec<f64>,
    /// `w₀ = δφ₁ + A`
    pub w0: Vec<f64>,
    pub s0: f64,
    pub s0_prime: f64,
    /// set when `g(A) ≤ 0` makes every δ admissible
    pub note: Option<String>,
}

/// Last sign change of `f` on a logarithmic grid: the `s₀` with `f(s) < 0`
/// for all sampled `s > s₀`.
fn detect_s0(f: &NonlinearitySpec) -> Result<f64, BlowupError> {
    let mut s0 = 0.0;
    let mut any_negative = false;
    for k in 0..800 {
        let s = 1e-6 * (1e12f64).powf(k as f64 / 799.0);
        if f.eval(s) >= 0.0 {
            s0 = s;
            any_negative = false;
        } else {
            any_negative = true;
        }
    }
    if !any_negative {
        return Err(BlowupError::NoDominatingH);
    }
    Ok(s0)
}

/// Build the subsolution `w₀ = δφ₁ + A` for bulk reaction `f`, boundary
/// reaction `g` and diffusion `ν`.  The dominating function defaults to `f`
/// itself (`f ≤ h` with equality); δ is the minimal value satisfying
/// `νb∂ₙw + g(A) ≤ 0` at every boundary node, times `1 + 1e−6`.
pub fn construct_subsolution(
    f: &NonlinearitySpec,
    g: &NonlinearitySpec,
    grid: &GridDomain,
    nu: f64,
    h: Option<&NonlinearitySpec>,
) -> Result<SubsolutionRecipe, BlowupError> {
    let h = h.unwrap_or(f);
    let s0 = detect_s0(h)?;
    // domination f ≤ h on the sampled tail
    for k in 0..400 {
        let s = (s0 + 1e-9) * (1e6f64 / (s0 + 1e-9)).powf(k as f64 / 399.0);
        if f.eval(s) > h.eval(s) + 1e-9 * h.eval(s).abs().max(1.0) {
            return Err(BlowupError::DominationFails(s));
        }
    }
    let (lambda_1d, phi1) = dirichlet_eigenpair(grid, nu)?;
    let crit = check_h_criterion(h, s0, lambda_1d)?;
    let a_level = s0.max(crit.s0_prime).max(0.0);
    // δ from νb∂ₙw + g(A) ≤ 0 nodewise, with the discrete ∂ₙφ₁ < 0
    let ga = g.eval(a_level);
    let mut delta = 1.0;
    let mut note = None;
    if ga <= 0.0 {
        note = Some("g(A) <= 0: every delta > 0 is admissible, using 1".to_string());
    } else {
        let mut need: f64 = 0.0;
        for bn in grid.boundary_nodes() {
            let dn = grid.normal_derivative(bn, &phi1);
            if dn >= 0.0 {
                return Err(BlowupError::BadNormalDerivative(bn.node));
            }
            need = need.max(ga / (nu * bn.b * (-dn)));
        }
        delta = need * (1.0 + 1e-6);
    }
    let w0: Vec<f64> = phi1.iter().map(|&p| delta * p + a_level).collect();
    Ok(SubsolutionRecipe {
        a_level,
        delta,
        lambda_1d,
        phi1,
        w0,
        s0,
        s0_prime: crit.s0_prime,
        note,
    })
}

/// Scalar companion trajectory of `u' + h(u) = 0`.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub series: Vec<(f64, f64)>,
    /// abort time when |u| reached the threshold; None = ran to horizon
    pub t_star: Option<f64>,
}

/// Integrate `u_t + h(u) = 0` with adaptive step-doubling RK4, aborting at
/// the same sup-norm threshold as the PDE solver.
pub fn ode_compare(h: &NonlinearitySpec, u0: f64, horizon: f64, abort: f64) -> OdeTrajectory {
    let rhs = |u: f64| -h.eval(u);
    let rk4 = |u: f64, dt: f64| {
        let k1 = rhs(u);
        let k2 = rhs(u + 0.5 * dt * k1);
        let k3 = rhs(u + 0.5 * dt * k2);
        let k4 = rhs(u + dt * k3);
        u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut t = 0.0;
    let mut u = u0;
    let mut dt = (horizon / 1000.0).min(1e-3);
    let mut series = vec![(0.0, u0)];
    let tol = 1e-10;
    while t < horizon {
        let dt_step = dt.min(horizon - t);
        let full = rk4(u, dt_step);
        let half = rk4(rk4(u, 0.5 * dt_step), 0.5 * dt_step);
        let err = (full - half).abs() / half.abs().max(1.0);
        if err > tol || !half.is_finite() {
            let dt_min = 1e-15 * t.abs().max(1.0);
            if dt_step > dt_min {
                dt = 0.5 * dt_step;
                continue;
            }
            // the error control cannot refine further: the solution is
            // escaping through the step floor — terminate here rather than
            // accept an uncontrolled overshoot
            return OdeTrajectory {
                series,
                t_star: Some(t),
            };
        }
        u = half;
        t += dt_step;
        series.push((t, u));
        if !u.is_finite() || u.abs() >= abort {
            return OdeTrajectory {
                series,
                t_star: Some(t),
            };
        }
        if err < 0.1 * tol {
            dt = (dt_step * 1.5).min(horizon / 100.0);
        }
    }
    OdeTrajectory {
        series,
        t_star: None,
    }
}

/// Outcome of a nodewise sub/solution(/super) ordering check.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub pass: bool,
    /// worst signed violation (positive = ordering violated by that much)
    pub worst_violation: f64,
    /// (t, node) where the worst violation occurred
    pub location: (f64, usize),
    pub tol: f64,
}

fn interp_snapshot(series: &[(f64, StateField)], t: f64) -> Option<Vec<f64>> {
    if series.is_empty() || t < series[0].0 - 1e-12 || t > series.last().unwrap().0 + 1e-12 {
        return None;
    }
    let mut k = 0;
    while k + 1 < series.len() && series[k + 1].0 < t {
        k += 1;
    }
    if k + 1 >= series.len() {
        return Some(series[k].1.u.clone());
    }
    let (t0, s0) = (&series[k].0, &series[k].1);
    let (t1, s1) = (&series[k + 1].0, &series[k + 1].1);
    let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
    Some(
        s0.u.iter()
            .zip(&s1.u)
            .map(|(a, b)| a + w * (b - a))
            .collect(),
    )
}

/// Verify `sub ≤ sol (≤ sup)` nodewise on the common time range, resampling
/// by linear interpolation onto the solution's snapshot times.
pub fn verify_comparison(
    sub: &[(f64, StateField)],
    sol: &[(f64, StateField)],
    sup: Option<&[(f64, StateField)]>,
    tol: f64,
) -> Result<ComparisonReport, BlowupError> {
    if sub.is_empty() || sol.is_empty() {
        return Err(BlowupError::GridMismatch);
    }
    if sub[0].1.u.len() != sol[0].1.u.len() {
        return Err(BlowupError::GridMismatch);
    }
    let mut worst = f64::NEG_INFINITY;
    let mut loc = (0.0, 0usize);
    let t_max = sub.last().unwrap().0.min(sol.last().unwrap().0);
    for (t, s) in sol.iter().filter(|(t, _)| *t <= t_max + 1e-12) {
        let Some(sub_u) = interp_snapshot(sub, *t) else {
            continue;
        };
        for (i, (&lo, &mid)) in sub_u.iter().zip(&s.u).enumerate() {
            let viol = lo - mid;
            if viol > worst {
                worst = viol;
                loc = (*t, i);
            }
        }
        if let Some(sup_series) = sup {
            if let Some(sup_u) = interp_snapshot(sup_series, *t) {
                for (i, (&mid, &hi)) in s.u.iter().zip(&sup_u).enumerate() {
                    let viol = mid - hi;
                    if viol > worst {
                        worst = viol;
                        loc = (*t, i);
                    }
                }
            }
        }
    }
    Ok(ComparisonReport {
        pass: worst <= tol,
        worst_violation: worst,
        location: loc,
        tol,
    })
}

/// Full blow-up experiment: recipe, Dirichlet companion, dynamic-BC run from
/// `u₀ = w₀ + v₀`, ordering check and blow-up time comparison.
#[derive(Debug)]
pub struct BlowupExperiment {
    pub recipe: SubsolutionRecipe,
    pub companion: TrajectoryRecord,
    pub pde: TrajectoryRecord,
    pub t_star_companion: Option<f64>,
    pub t_star_pde: Option<f64>,
    pub comparison: ComparisonReport,
}

/// Run the experiment for bulk `f`, boundary `g`, diffusion `ν` on `grid`.
///
/// The companion initial datum is `κφ₁` with `κ` set three times above the
/// threshold where the eigenfunction-average ODE `y' ≥ −λ₁y − h(y)` turns
/// increasing, which forces companion blow-up for convergent tail integrals.
pub fn blowup_experiment(
    f: &NonlinearitySpec,
    g: &NonlinearitySpec,
    grid: &GridDomain,
    nu: f64,
    horizon: f64,
) -> Result<BlowupExperiment, BlowupError> {
    let recipe = construct_subsolution(f, g, grid, nu, None)?;
    let h = f;
    // Kaplan threshold: smallest y with −h(y) > λ₁·y
    let lam = recipe.lambda_1d;
    let mut y_c = f64::NAN;
    for k in 0..2000 {
        let y = 1e-3 * (1e9f64).powf(k as f64 / 1999.0);
        if -h.eval(y) > lam * y {
            y_c = y;
            break;
        }
    }
    if !y_c.is_finite() {
        return Err(BlowupError::CompanionDidNotBlowUp(
            "no Kaplan threshold found".into(),
        ));
    }
    let phi_sq: f64 = (0..grid.n_nodes())
        .map(|i| grid.vol_weight(i) * recipe.phi1[i] * recipe.phi1[i])
        .sum();
    let kappa = 3.0 * y_c / phi_sq;
    let v0: Vec<f64> = recipe.phi1.iter().map(|&p| kappa * p).collect();

    let companion_cfg = SolverConfig::new(
        FluxSpec::constant(nu),
        f.clone(),
        NonlinearitySpec::zero(),
    )
    .dirichlet()
    .adaptive(1e-4, 0.05)
    .with_snapshot_stride(5);
    let companion = simulate(
        &StateField::coupled(v0.clone(), grid),
        horizon,
        &companion_cfg,
        grid,
    );
    let t_star_companion = match companion.termination {
        Termination::BlowUpAbort { t_star } => Some(t_star),
        ref other => {
            return Err(BlowupError::CompanionDidNotBlowUp(format!("{other:?}")));
        }
    };

    let u0: Vec<f64> = recipe.w0.iter().zip(&v0).map(|(w, v)| w + v).collect();
    let pde_cfg = SolverConfig::new(FluxSpec::constant(nu), f.clone(), g.clone())
        .adaptive(1e-4, 0.05)
        .with_snapshot_stride(5);
    let pde = simulate(&StateField::coupled(u0, grid), horizon, &pde_cfg, grid);
    let t_star_pde = match pde.termination {
        Termination::BlowUpAbort { t_star } => Some(t_star),
        _ => None,
    };

    // subsolution series w₀ + v(t) against the PDE run, until the PDE abort
    let sub_series: Vec<(f64, StateField)> = companion
        .snapshots
        .iter()
        .map(|(t, s)| {
            let u: Vec<f64> = recipe.w0.iter().zip(&s.u).map(|(w, v)| w + v).collect();
            (*t, StateField::coupled(u, grid))
        })
        .collect();
    let h_grid = grid.extents.0 / (grid.shape.0 - 1) as f64;
    let dt_repr = pde
        .rows
        .iter()
        .map(|r| r.dt)
        .fold(0.0f64, f64::max);
    let tol = 10.0 * h_grid * h_grid + 10.0 * dt_repr;
    let comparison = verify_comparison(&sub_series, &pde.snapshots, None, tol)?;
    Ok(BlowupExperiment {
        recipe,
        companion,
        pde,
        t_star_companion,
        t_star_pde,
        comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_interval_grid, build_rectangle_grid, BProfile};
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_eigenpair_interval() {
        let grid = build_interval_grid(401, 1.0, &BProfile::One).unwrap();
        let (lam, phi) = dirichlet_eigenpair(&grid, 1.0).unwrap();
        let exact = PI * PI;
        assert!(
            (lam - exact).abs() / exact < 1e-3,
            "λ {lam} vs π² (rel err {})",
            (lam - exact).abs() / exact
        );
        // φ₁ ≈ (π/2) sin(πx) after L¹ normalisation
        let mid = grid.n_nodes() / 2;
        assert!((phi[mid] - PI / 2.0).abs() < 1e-2);
        // ∂ₙφ₁ < 0 at both endpoints, close to -π²/2
        for bn in grid.boundary_nodes() {
            let dn = grid.normal_derivative(bn, &phi);
            assert!(dn < 0.0);
            assert!((dn + PI * PI / 2.0).abs() < 0.01, "∂ₙφ₁ = {dn}");
        }
        // (0,2): λ = π²/4
        let g2 = build_interval_grid(401, 2.0, &BProfile::One).unwrap();
        let (lam2, _) = dirichlet_eigenpair(&g2, 1.0).unwrap();
        assert!((lam2 - exact / 4.0).abs() / (exact / 4.0) < 1e-3);
    }

    #[test]
    fn dirichlet_eigenpair_square_and_order() {
        let grid = build_rectangle_grid(41, 41, (1.0, 1.0), &BProfile::One).unwrap();
        let (lam, phi) = dirichlet_eigenpair(&grid, 1.0).unwrap();
        let exact = 2.0 * PI * PI;
        assert!((lam - exact).abs() / exact < 5e-3, "λ {lam} vs 2π²");
        assert!(phi.iter().all(|&x| x >= 0.0));

        // second order in h: Richardson against π² on the interval
        let lam_n = |n: usize| {
            let g = build_interval_grid(n, 1.0, &BProfile::One).unwrap();
            dirichlet_eigenpair(&g, 1.0).unwrap().0
        };
        let (e1, e2) = (
            (lam_n(51) - PI * PI).abs(),
            (lam_n(101) - PI * PI).abs(),
        );
        let order = (e1 / e2).log2();
        assert!(
            (1.7..2.3).contains(&order),
            "eigenvalue convergence order {order}"
        );
    }

    #[test]
    fn h_criterion_examples() {
        let lam = PI * PI;
        // h = -s²: ∫ ds/s² converges, h' = -2s -> -∞
        let h2 = NonlinearitySpec::power(3.0, -1.0);
        let crit = check_h_criterion(&h2, 0.0, lam).unwrap();
        assert!(crit.integral_converges);
        assert!((crit.s0_prime - lam / 2.0).abs() < 1e-6, "s0' {}", crit.s0_prime);
        // h = -s: log divergence
        let h1 = NonlinearitySpec::linear(-1.0);
        assert!(matches!(
            check_h_criterion(&h1, 0.0, lam),
            Err(BlowupError::IntegralDiverges) | Err(BlowupError::TailSlopeTooShallow)
        ));
        // h = -s ln(s)² (as -s ln(1+s)² spec): converges, slope -> -∞
        let hl = NonlinearitySpec::custom(
            |y| -y * (1.0 + y.abs()).ln().powi(2),
            |y| {
                let l = (1.0 + y.abs()).ln();
                -(l * l) - 2.0 * y.abs() * l / (1.0 + y.abs())
            },
            2.0,
            -1.0,
        );
        let crl = check_h_criterion(&hl, 0.0, lam).unwrap();
        assert!(crl.integral_converges);
        // h = -s ln(s): genuinely divergent tail integral, must be rejected
        let hl1 = NonlinearitySpec::custom(
            |y| -y * (1.0 + y.abs()).ln(),
            |y| -(1.0 + y.abs()).ln() - y.abs() / (1.0 + y.abs()),
            2.0,
            -1.0,
        );
        assert!(check_h_criterion(&hl1, 0.0, lam).is_err());
    }

    #[test]
    fn subsolution_delta_matches_analytic() {
        // 1D (0,1), ν = 1, b ≡ 1: |∂ₙφ₁| = π²/2, so δ = g(A)·2/π²·(1+1e-6)
        let grid = build_interval_grid(401, 1.0, &BProfile::One).unwrap();
        let f = NonlinearitySpec::power(4.0, -1.0); // -u³
        let g = NonlinearitySpec::power(6.0, 1.0); // u⁵
        let recipe = construct_subsolution(&f, &g, &grid, 1.0, None).unwrap();
        // A = max(s0=0, s0') with s0' = sqrt(λ/3)
        let a_exact = (PI * PI / 3.0f64).sqrt();
        assert!(
            (recipe.a_level - a_exact).abs() / a_exact < 1e-3,
            "A {} vs {}",
            recipe.a_level,
            a_exact
        );
        let delta_exact = 2.0 * g.eval(recipe.a_level) / (PI * PI);
        assert!(
            (recipe.delta - delta_exact).abs() / delta_exact < 0.01,
            "δ {} vs {}",
            recipe.delta,
            delta_exact
        );
        assert!(recipe.note.is_none());

        // g(A) ≤ 0: any δ, note set
        let g_neg = NonlinearitySpec::power(2.0, -1.0);
        let r2 = construct_subsolution(&f, &g_neg, &grid, 1.0, None).unwrap();
        assert_eq!(r2.delta, 1.0);
        assert!(r2.note.is_some());

        // dissipative f: refused
        let fd = NonlinearitySpec::cubic();
        assert!(matches!(
            construct_subsolution(&fd, &g, &grid, 1.0, None),
            Err(BlowupError::NoDominatingH)
        ));
    }

    #[test]
    fn ode_compare_analytic_cases() {
        // h(u) = -u²: u' = u², u(t) = 1/(1-t), T* = 1
        let h = NonlinearitySpec::power(3.0, -1.0);
        let traj = ode_compare(&h, 1.0, 5.0, 1e8);
        let t_star = traj.t_star.expect("blow-up");
        assert!((t_star - 1.0).abs() < 1e-6, "T* {t_star}");
        // h(u) = u: decay, no blow-up
        let hd = NonlinearitySpec::linear(1.0);
        let traj2 = ode_compare(&hd, 1.0, 3.0, 1e8);
        assert!(traj2.t_star.is_none());
        let (t_end, u_end) = *traj2.series.last().unwrap();
        assert!((u_end - (-t_end).exp()).abs() < 1e-8);
        // h(u) = -u³ from 2: T* = 1/(2·4) = 0.125
        let h3 = NonlinearitySpec::power(4.0, -1.0);
        let traj3 = ode_compare(&h3, 2.0, 5.0, 1e8);
        assert!((traj3.t_star.unwrap() - 0.125).abs() < 1e-3);
    }

    #[test]
    fn comparison_trivial_and_swapped() {
        let grid = build_interval_grid(21, 1.0, &BProfile::One).unwrap();
        let mk = |c: f64| {
            (0..5)
                .map(|k| {
                    let t = k as f64 * 0.1;
                    (t, StateField::from_fn(&grid, |x| c + x[0] + t))
                })
                .collect::<Vec<_>>()
        };
        let low = mk(0.0);
        let high = mk(0.5);
        let rep = verify_comparison(&low, &low, None, 1e-12).unwrap();
        assert!(rep.pass && rep.worst_violation.abs() < 1e-15);
        let ok = verify_comparison(&low, &high, None, 1e-9).unwrap();
        assert!(ok.pass);
        let bad = verify_comparison(&high, &low, None, 1e-9).unwrap();
        assert!(!bad.pass);
        assert!((bad.worst_violation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_experiment_cubic_interior() {
        // f = -u³, g = u⁵ on (0,1): blow-up despite strong boundary dissipation
        let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
        let f = NonlinearitySpec::power(4.0, -1.0);
        let g = NonlinearitySpec::power(6.0, 1.0);
        let exp = blowup_experiment(&f, &g, &grid, 1.0, 10.0).unwrap();
        let t_pde = exp.t_star_pde.expect("PDE run must blow up");
        let t_comp = exp.t_star_companion.unwrap();
        assert!(
            t_pde <= t_comp * 1.05 + 1e-3,
            "T*_pde {t_pde} vs companion {t_comp}"
        );
        assert!(
            exp.comparison.pass,
            "ordering violated by {} at {:?}",
            exp.comparison.worst_violation, exp.comparison.location
        );
    }
}
