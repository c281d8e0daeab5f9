//! Post-processing of trajectory records into verdicts on the quantitative
//! claims: absorbing sets, sup-norm bounds via the power ladder, energy
//! decay, exponential decay fits and blow-up rate fits.
//!
//! Everything here is a pure function over immutable records.

use crate::fit::{golden_max, linear_fit};
use crate::grid::{GridDomain, StateField};
use crate::stepper::{scenario_energy, SolverConfig, Termination, TrajectoryRecord};

/// One rung of the power ladder `Y_k = ∫|u|^{1+m_k} dμ`, `m_k = p^k`.
#[derive(Debug, Clone, Copy)]
pub struct LadderRung {
    pub k: usize,
    pub m: f64,
    /// ln Y_k (the ladder is evaluated in log space; Y_k itself overflows
    /// long before k_max for amplitudes above one)
    pub log_y: f64,
    /// Y_k^{1/(1+m_k)} — converges to ‖U‖_{X^∞}
    pub root: f64,
    /// (Y_k/μ(Ω̄))^{1/(1+m_k)} — the probability-normalised root, which is
    /// nondecreasing in k by Jensen
    pub normalized_root: f64,
}

/// The ladder `Y_0 .. Y_{k_max}` of μ-integral powers of the state.
pub fn norm_ladder(state: &StateField, p: f64, k_max: usize, grid: &GridDomain) -> Vec<LadderRung> {
    assert!(p > 1.0);
    let mut weights_logs: Vec<(f64, f64)> = Vec::with_capacity(state.u.len() + state.v.len());
    for (i, &ui) in state.u.iter().enumerate() {
        if ui != 0.0 {
            weights_logs.push((grid.vol_weight(i).ln(), ui.abs().ln()));
        }
    }
    for (bn, &vj) in grid.boundary_nodes().iter().zip(&state.v) {
        if vj != 0.0 {
            weights_logs.push(((bn.surface_w / bn.b).ln(), vj.abs().ln()));
        }
    }
    let mu_total: f64 = (0..grid.n_nodes()).map(|i| grid.vol_weight(i)).sum::<f64>()
        + grid
            .boundary_nodes()
            .iter()
            .map(|bn| bn.surface_w / bn.b)
            .sum::<f64>();
    (0..=k_max)
        .map(|k| {
            let m = p.powi(k as i32);
            let expo = 1.0 + m;
            // log-sum-exp of ln w_i + (1+m) ln|u_i|
            let terms: Vec<f64> = weights_logs.iter().map(|&(lw, lu)| lw + expo * lu).collect();
            let log_y = if terms.is_empty() {
                f64::NEG_INFINITY
            } else {
                let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
            };
            let root = (log_y / expo).exp();
            let normalized_root = ((log_y - mu_total.ln()) / expo).exp();
            LadderRung {
                k,
                m,
                log_y,
                root,
                normalized_root,
            }
        })
        .collect()
}

/// Largest relative gap between the deepest ladder root and the direct
/// sup-norm across all stored snapshots of a record.
pub fn ladder_vs_sup(
    record: &TrajectoryRecord,
    p: f64,
    k_max: usize,
    grid: &GridDomain,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (_, snap) in &record.snapshots {
        let sup = snap
            .u
            .iter()
            .chain(snap.v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        if sup == 0.0 {
            continue;
        }
        let ladder = norm_ladder(snap, p, k_max, grid);
        let root = ladder.last().unwrap().root;
        worst = worst.max((root - sup).abs() / sup);
    }
    worst
}

/// Absorbing-set verdict over an ensemble of records.
#[derive(Debug, Clone)]
pub struct AbsorbingReport {
    /// common radius: every absorbed record stays below this after its entry
    pub c0: f64,
    /// per-record plateau of the absorbing functional
    pub plateaus: Vec<f64>,
    /// per-record entry time (interpolated); None = "not absorbed"
    pub entry_times: Vec<Option<f64>>,
    /// relative spread of the plateaus across the ensemble
    pub plateau_spread: f64,
}

/// Time series of the absorbing functional
/// `q(t) = ‖U(t)‖_{X²} + ∫_t^{t+1} (∫ a|∇u|² + ∫|u|^{r₁}) ds`
/// evaluated from the per-step diagnostics (valid for `t ≤ T − 1`).
fn absorbing_series(record: &TrajectoryRecord) -> Vec<(f64, f64)> {
    let rows = &record.rows;
    let t_end = record.t_end();
    let mut out = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let t = row.t;
        if t + 1.0 > t_end + 1e-12 {
            break;
        }
        // trapezoid of flux_diss + bulk_lr1 over [t, t+1]
        let mut integral = 0.0;
        let mut j = idx;
        while j + 1 < rows.len() && rows[j].t < t + 1.0 {
            let (a, b) = (&rows[j], &rows[j + 1]);
            let seg_lo = a.t.max(t);
            let seg_hi = b.t.min(t + 1.0);
            if seg_hi > seg_lo {
                // linear interpolation of the integrand at segment ends
                let f = |r: &crate::stepper::StepRow| r.flux_diss + r.bulk_lr1;
                let w = (seg_hi - seg_lo) / (b.t - a.t).max(1e-300);
                let flo = f(a) + (f(b) - f(a)) * ((seg_lo - a.t) / (b.t - a.t).max(1e-300));
                let fhi = f(a) + (f(b) - f(a)) * ((seg_hi - a.t) / (b.t - a.t).max(1e-300));
                integral += 0.5 * (flo + fhi) * (seg_hi - seg_lo);
                let _ = w;
            }
            j += 1;
        }
        out.push((t, row.norm_x2 + integral));
    }
    out
}

/// Detect the common absorbing radius and the per-record entry times over an
/// ensemble started from varied initial data.  Records whose functional never
/// settles under the common radius within their horizon are reported as not
/// absorbed, never extrapolated.
pub fn detect_absorbing_set(records: &[TrajectoryRecord], tail_fraction: f64) -> AbsorbingReport {
    assert!((0.0..1.0).contains(&tail_fraction) && tail_fraction > 0.0);
    let series: Vec<Vec<(f64, f64)>> = records.iter().map(absorbing_series).collect();
    let mut plateaus = Vec::with_capacity(records.len());
    for s in &series {
        if s.is_empty() {
            plateaus.push(f64::INFINITY);
            continue;
        }
        let t_end = s.last().unwrap().0;
        let t_tail = t_end - tail_fraction * (t_end - s[0].0);
        let plateau = s
            .iter()
            .filter(|(t, _)| *t >= t_tail)
            .map(|(_, q)| *q)
            .fold(0.0f64, f64::max);
        plateaus.push(plateau);
    }
    let finite: Vec<f64> = plateaus.iter().cloned().filter(|p| p.is_finite()).collect();
    let c0 = 1.02 * finite.iter().cloned().fold(0.0f64, f64::max);
    let entry_times = series
        .iter()
        .zip(records)
        .map(|(s, rec)| {
            if s.is_empty() || rec.termination != Termination::Horizon {
                return None;
            }
            // last up-crossing of c0, linearly interpolated
            let mut entry = s[0].0;
            let mut above_tail = false;
            for w in s.windows(2) {
                let (t0, q0) = w[0];
                let (t1, q1) = w[1];
                if q1 > c0 {
                    above_tail = true;
                    entry = t1;
                } else if q0 > c0 && q1 <= c0 {
                    let frac = (q0 - c0) / (q0 - q1);
                    entry = t0 + frac * (t1 - t0);
                    above_tail = false;
                } else if q1 <= c0 && above_tail {
                    above_tail = false;
                }
            }
            if above_tail {
                None // still above the radius at the end of the record
            } else {
                Some(entry)
            }
        })
        .collect();
    let spread = if finite.len() > 1 {
        let max = finite.iter().cloned().fold(f64::MIN, f64::max);
        let min = finite.iter().cloned().fold(f64::MAX, f64::min);
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        (max - min) / mean
    } else {
        0.0
    };
    AbsorbingReport {
        c0,
        plateaus,
        entry_times,
        plateau_spread: spread,
    }
}

/// Sup-norm plateau verdict over an ensemble.
#[derive(Debug, Clone)]
pub struct LinfReport {
    /// common post-transient bound (max of the plateaus)
    pub c1: f64,
    /// per-record plateau of ‖U‖_{X^∞}
    pub plateaus: Vec<f64>,
    /// per-record transient exit time (entry into 110% of the plateau)
    pub t_plus: Vec<Option<f64>>,
    /// relative spread of the plateaus — the data-independence score
    pub spread: f64,
}

/// Post-transient plateau of `‖U‖_{X^∞}` per record: the max over the
/// trailing 20% of the record, with the transient cut where the series
/// permanently enters 110% of that value.
pub fn linf_bound(records: &[TrajectoryRecord]) -> LinfReport {
    let mut plateaus = Vec::new();
    let mut t_plus = Vec::new();
    for rec in records {
        if rec.termination != Termination::Horizon || rec.rows.len() < 4 {
            plateaus.push(f64::INFINITY);
            t_plus.push(None);
            continue;
        }
        let t_end = rec.t_end();
        let t_tail = 0.8 * t_end;
        let plateau = rec
            .rows
            .iter()
            .filter(|r| r.t >= t_tail)
            .map(|r| r.norm_xinf)
            .fold(0.0f64, f64::max);
        let threshold = 1.1 * plateau;
        let mut entry = Some(rec.rows[0].t);
        let mut last_above: Option<f64> = None;
        for r in &rec.rows {
            if r.norm_xinf > threshold {
                last_above = Some(r.t);
            }
        }
        if let Some(ta) = last_above {
            entry = rec
                .rows
                .iter()
                .find(|r| r.t > ta)
                .map(|r| r.t);
        }
        plateaus.push(plateau);
        t_plus.push(entry);
    }
    let finite: Vec<f64> = plateaus.iter().cloned().filter(|p| p.is_finite()).collect();
    let c1 = finite.iter().cloned().fold(0.0f64, f64::max);
    let spread = if finite.len() > 1 && c1 > 0.0 {
        let min = finite.iter().cloned().fold(f64::MAX, f64::min);
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        (c1 - min) / mean
    } else {
        0.0
    };
    LinfReport {
        c1,
        plateaus,
        t_plus,
        spread,
    }
}

/// `E(t)` with the scenario shift `C_{F,G}` making the observed range
/// nonnegative: `C_{F,G} = 1 + max(0, −min E_raw)`.
pub fn energy_shift(record: &TrajectoryRecord) -> f64 {
    let min_raw = record
        .rows
        .iter()
        .map(|r| r.energy)
        .fold(f64::INFINITY, f64::min);
    1.0 + (-min_raw).max(0.0)
}

/// Energy functional of a single state with an explicit shift.
pub fn energy_functional(
    state: &StateField,
    cfg: &SolverConfig,
    grid: &GridDomain,
    t: f64,
    c_fg: f64,
) -> f64 {
    scenario_energy(state, cfg, grid, t) + c_fg
}

/// Count of per-step energy increases beyond `tol` (autonomous runs should
/// show none — the proximal step is energy-diminishing).
pub fn energy_decay_violations(record: &TrajectoryRecord, tol: f64) -> usize {
    record
        .rows
        .windows(2)
        .filter(|w| w[1].energy > w[0].energy + tol)
        .count()
}

/// Exponential decay fit `‖U(t)‖² − plateau ~ e^{−ct}`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub c: f64,
    /// the asymptotic level that the squared norm decays to
    pub rhs_const: f64,
    pub quality: f64,
}

/// Least-squares fit of `log(‖U(t)‖² − plateau)` on the transient; `None`
/// when no exponential regime is found (fit quality < 0.9 or c ≤ 0).
pub fn fit_dissipative_decay(record: &TrajectoryRecord) -> Option<DecayFit> {
    let rows = &record.rows;
    if rows.len() < 12 {
        return None;
    }
    let t_end = record.t_end();
    // trailing minimum rather than mean: robust when the trajectory decays
    // all the way to zero and the tail has not fully flattened yet
    let plateau = rows
        .iter()
        .filter(|r| r.t >= 0.8 * t_end)
        .map(|r| r.norm_x2 * r.norm_x2)
        .fold(f64::INFINITY, f64::min);
    let excess0 = rows[0].norm_x2 * rows[0].norm_x2 - plateau;
    if excess0 <= 1e-13 {
        return None; // constant trajectory: no exponential regime
    }
    // fit on the single-mode-dominated part of the transient
    let (lo, hi) = (1e-3 * excess0, 0.3 * excess0);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        let ex = r.norm_x2 * r.norm_x2 - plateau;
        if ex > lo && ex < hi {
            ts.push(r.t);
            ys.push(ex.ln());
        }
    }
    if ts.len() < 8 {
        return None;
    }
    let fit = linear_fit(&ts, &ys)?;
    if fit.r2 >= 0.9 && fit.slope < 0.0 {
        Some(DecayFit {
            c: -fit.slope,
            rhs_const: plateau,
            quality: fit.r2,
        })
    } else {
        None
    }
}

/// Fitted blow-up time and rate.
#[derive(Debug, Clone, Copy)]
pub struct BlowupFit {
    pub t_star: f64,
    /// exponent of ‖U‖ ~ (T*−t)^{exponent}; negative
    pub exponent: f64,
    pub quality: f64,
}

/// Fit `log‖U‖ vs log(T*−t)` over the last decade of growth, estimating `T*`
/// by golden section on the fit quality.
pub fn fit_blowup_rate(series: &[(f64, f64)]) -> Option<BlowupFit> {
    if series.len() < 8 {
        return None;
    }
    let (t_end, u_end) = *series.last().unwrap();
    if !(u_end > 0.0) {
        return None;
    }
    let window: Vec<(f64, f64)> = series
        .iter()
        .cloned()
        .filter(|&(_, u)| u >= u_end / 10.0 && u > 0.0)
        .collect();
    if window.len() < 8 {
        return None;
    }
    let span = (t_end - window[0].0).max(1e-300);
    let quality_for = |delta_log: f64| {
        let t_star = t_end + delta_log.exp();
        let xs: Vec<f64> = window.iter().map(|&(t, _)| (t_star - t).ln()).collect();
        if xs.iter().any(|x| !x.is_finite()) {
            return 0.0;
        }
        let ys: Vec<f64> = window.iter().map(|&(_, u)| u.ln()).collect();
        linear_fit(&xs, &ys).map(|f| f.r2).unwrap_or(0.0)
    };
    // the lower bracket end respects the floating-point spacing of t_end so
    // that t_star − t stays resolvable for every window point
    let delta_floor = (4.0 * f64::EPSILON * t_end.abs()).max(1e-9 * span);
    let (lo, hi) = (delta_floor.min(span * 0.5).ln(), span.ln());
    let (best_log, _) = golden_max(quality_for, lo, hi, 120);
    let t_star = t_end + best_log.exp();
    let xs: Vec<f64> = window.iter().map(|&(t, _)| (t_star - t).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&(_, u)| u.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Some(BlowupFit {
        t_star,
        exponent: fit.slope,
        quality: fit.r2,
    })
}

/// Blow-up verdict for a trajectory record: `None` for horizon-terminated
/// records ("no blow-up"), the fitted `(T*, exponent, quality)` otherwise.
pub fn detect_blowup(record: &TrajectoryRecord) -> Option<BlowupFit> {
    match record.termination {
        Termination::BlowUpAbort { .. } => fit_blowup_rate(&record.sup_norm_series()),
        _ => None,
    }
}

/// Post-transient `W^{1,p}`-type bound: max of `‖∇u‖_p + ‖u‖_{L^p}` over the
/// trailing snapshots.
pub fn vp_bound(record: &TrajectoryRecord, p: f64, grid: &GridDomain) -> f64 {
    let t_cut = 0.5 * record.t_end();
    record
        .snapshots
        .iter()
        .filter(|(t, _)| *t >= t_cut)
        .map(|(_, s)| crate::grid::w1p_norm(&s.u, p, grid, crate::grid::LowerOrder::Volume { s: p }))
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_interval_grid, BProfile};
    use crate::nonlin::{FluxSpec, NonlinearitySpec};
    use crate::stepper::{simulate, SolverConfig};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ladder_constant_states() {
        let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
        let one = StateField::from_fn(&grid, |_| 1.0);
        let ladder = norm_ladder(&one, 2.0, 8, &grid);
        for rung in &ladder {
            // Y_k = μ(Ω̄) = |Ω| + λ⁻¹ = 3 for every k
            assert!((rung.log_y - 3.0f64.ln()).abs() < 1e-10, "k={}", rung.k);
        }
        assert!((ladder.last().unwrap().root - 1.0).abs() < 0.01);

        let two = StateField::from_fn(&grid, |_| 2.0);
        let l2 = norm_ladder(&two, 2.0, 12, &grid);
        // roots converge to 2 and the normalized roots are nondecreasing
        assert!((l2.last().unwrap().root - 2.0).abs() < 2e-3);
        for w in l2.windows(2) {
            assert!(w[1].normalized_root >= w[0].normalized_root - 1e-12);
        }
    }

    #[test]
    fn ladder_root_reaches_sup_norm() {
        let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let state = StateField::coupled(u, &grid);
        let sup = state.u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let ladder = norm_ladder(&state, 2.0, 12, &grid);
        let root = ladder.last().unwrap().root;
        assert!(
            (root - sup).abs() / sup < 0.02,
            "root {root} vs sup {sup} (m = 4096)"
        );
    }

    fn cubic_run(amplitude: f64, horizon: f64) -> (TrajectoryRecord, GridDomain) {
        let grid = build_interval_grid(61, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::cubic().with_source(1.0),
            NonlinearitySpec::cubic().with_source(0.5),
        )
        .adaptive(1e-4, 5e-3)
        .with_snapshot_stride(50);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u0 = crate::stepper::random_smooth_field(&grid, &mut rng, amplitude);
        (simulate(&u0, horizon, &cfg, &grid), grid)
    }

    #[test]
    fn absorbing_set_and_linf_on_ensemble() {
        let (r1, _) = cubic_run(1.0, 8.0);
        let (r10, _) = cubic_run(10.0, 8.0);
        let records = vec![r1, r10];
        let rep = detect_absorbing_set(&records, 0.2);
        assert!(rep.c0.is_finite() && rep.c0 > 0.0);
        assert!(rep.plateau_spread < 0.05, "spread {}", rep.plateau_spread);
        let e: Vec<f64> = rep.entry_times.iter().map(|t| t.unwrap()).collect();
        assert!(
            e[1] > e[0],
            "entry time should grow with initial amplitude: {e:?}"
        );
        let linf = linf_bound(&records);
        assert!(linf.spread < 0.05, "linf spread {}", linf.spread);
        assert!(linf.c1 > 0.0 && linf.c1.is_finite());
    }

    #[test]
    fn energy_monotone_on_autonomous_run() {
        let (rec, _) = cubic_run(2.0, 3.0);
        assert_eq!(energy_decay_violations(&rec, 1e-9), 0);
        let shift = energy_shift(&rec);
        assert!(rec.rows.iter().all(|r| r.energy + shift >= 0.0));
    }

    #[test]
    fn decay_fit_linear_problem_matches_eigenvalue() {
        // f = u, g = u, p = 2: slowest decay rate is 2·(smallest eigenvalue of
        // the linearisation); oracle via dense generalized eigensolve
        let grid = build_interval_grid(41, 1.0, &BProfile::One).unwrap();
        let cfg = SolverConfig::new(
            FluxSpec::constant(1.0),
            NonlinearitySpec::linear(1.0),
            NonlinearitySpec::linear(1.0),
        )
        .fixed_dt(5e-4);
        let u0 = StateField::from_fn(&grid, |_| 1.0);
        let rec = simulate(&u0, 6.0, &cfg, &grid);
        let fit = fit_dissipative_decay(&rec).expect("exponential regime");

        // dense oracle: K + M_f vs M pencil (test-local assembly)
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
            a[(i, i)] += grid.vol_weight(i); // f'(0)=1 bulk
            b[(i, i)] = grid.x2_mass(i);
        }
        for bn in grid.boundary_nodes() {
            a[(bn.node, bn.node)] += bn.surface_w / bn.b; // g'(0)=1
        }
        let (vals, _) = crate::linalg::dense_generalized_symmetric(&a, &b).unwrap();
        let expected = 2.0 * vals[0];
        assert!(
            (fit.c - expected).abs() / expected < 0.1,
            "fitted c {} vs 2λ₁ {}",
            fit.c,
            expected
        );
        // constant trajectory: no regime
        let steady = simulate(&StateField::zeros(&grid), 1.0, &cfg, &grid);
        assert!(fit_dissipative_decay(&steady).is_none());
    }

    #[test]
    fn blowup_fit_on_analytic_series() {
        // u(t) = 1/(1-t): T* = 1, exponent -1
        let series: Vec<(f64, f64)> = (0..4000)
            .map(|i| {
                let t = 1.0 - 10f64.powf(-8.0 * i as f64 / 3999.0);
                (t, 1.0 / (1.0 - t))
            })
            .collect();
        let fit = fit_blowup_rate(&series).unwrap();
        assert!((fit.t_star - 1.0).abs() < 1e-4, "T* {}", fit.t_star);
        assert!((fit.exponent + 1.0).abs() < 0.02, "exponent {}", fit.exponent);
        assert!(fit.quality > 0.99);

        // u(t) = (1-2t)^{-1/2}: T* = 1/2, exponent -1/2
        let series2: Vec<(f64, f64)> = (0..4000)
            .map(|i| {
                let d = 10f64.powf(-8.0 * i as f64 / 3999.0);
                let t = 0.5 * (1.0 - d);
                (t, (1.0 - 2.0 * t).powf(-0.5))
            })
            .collect();
        let fit2 = fit_blowup_rate(&series2).unwrap();
        assert!((fit2.t_star - 0.5).abs() < 1e-4);
        assert!((fit2.exponent + 0.5).abs() < 0.02);
    }

    #[test]
    fn horizon_records_report_no_blowup() {
        let (rec, _) = cubic_run(1.0, 1.0);
        assert!(detect_blowup(&rec).is_none());
    }
}
