//! Config-driven scenario execution: dispatch to the owning module, persist
//! records and reports, and emit a manifest with content hashes.
//!
//! Outputs are deterministic given `(config, seed)`: ensembles derive member
//! seeds from the scenario seed, parallel members are written in index
//! order, and only the manifest carries wall-clock metadata.

use crate::attractor::{
    chafee_infante_builder, choose_beta, estimate_c_star, expected_dimension, sweep_nu,
    upper_bound_dim, LyapunovParams,
};
use crate::blowup::blowup_experiment;
use crate::config::{ExperimentKind, ScenarioConfig};
use crate::diagnostics::{
    detect_absorbing_set, detect_blowup, energy_decay_violations, energy_shift,
    fit_dissipative_decay, ladder_vs_sup, linf_bound, norm_ladder,
};
use crate::grid::GridDomain;
use crate::hypotheses::{
    check_balance_nb, check_h1, check_h2, check_h3, check_weaker_condition, classify_regime,
};
use crate::poincare::{estimate_poincare_constant, estimate_trace_constant};
use crate::stepper::{random_smooth_field, simulate, Termination, TrajectoryRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("grid error: {0}")]
    Grid(#[from] crate::grid::GridError),
    #[error("classification error: {0}")]
    Hypotheses(#[from] crate::hypotheses::HypothesisError),
    #[error("poincare error: {0}")]
    Poincare(#[from] crate::poincare::PoincareError),
    #[error("blow-up lab error: {0}")]
    Blowup(#[from] crate::blowup::BlowupError),
    #[error("config names kind `{config}` but the subcommand is `{requested}`")]
    KindMismatch { config: String, requested: String },
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    kind: String,
    version: String,
    config_sha256: String,
    seed: u64,
    jobs: usize,
    wall_time_s: f64,
    files: Vec<ManifestFile>,
    failures: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    /// 0 = complete, 1 = partial (some member/ν failed)
    pub status: i32,
    pub manifest_path: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

struct ArtifactSink {
    dir: PathBuf,
    files: Vec<ManifestFile>,
    paths: Vec<PathBuf>,
}

impl ArtifactSink {
    fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactSink {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            paths: Vec::new(),
        })
    }
    fn write(&mut self, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(ManifestFile {
            path: name.to_string(),
            sha256: sha256_hex(contents),
        });
        self.paths.push(path.clone());
        Ok(path)
    }
}

fn record_csv(record: &TrajectoryRecord) -> Vec<u8> {
    let mut buf = Vec::new();
    record.write_csv(&mut buf).expect("in-memory write");
    buf
}

fn termination_line(t: &Termination) -> String {
    match t {
        Termination::Horizon => "horizon".into(),
        Termination::BlowUpAbort { t_star } => format!("blow-up-abort (T* = {t_star:.8e})"),
        Termination::SolverFailure { detail } => format!("solver-failure ({detail})"),
    }
}

/// Execute a scenario of the given kind, writing artifacts under `out`.
/// Individual member failures do not abort ensembles or sweeps; they are
/// recorded in the manifest and flagged through a nonzero status.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    kind: ExperimentKind,
    raw_config: &[u8],
    out: &Path,
    jobs: usize,
) -> Result<RunOutcome, RunnerError> {
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(RunnerError::KindMismatch {
                config: k.name().into(),
                requested: kind.name().into(),
            });
        }
    }
    let start = std::time::Instant::now();
    let mut sink = ArtifactSink::new(out)?;
    let grid = cfg.grid.build()?;
    let mut failures: Vec<String> = Vec::new();
    let mut status = 0;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("worker pool");

    match kind {
        ExperimentKind::Simulate => {
            let records = run_ensemble(cfg, &grid, &pool);
            let mut report = String::new();
            for (k, rec) in records.iter().enumerate() {
                sink.write(&format!("trajectory_{k:03}.csv"), &record_csv(rec))?;
                let _ = writeln!(
                    report,
                    "run {k:03}: amplitude {:.3e}, t_end {:.6e}, termination {}",
                    cfg.experiment.amplitudes[k % cfg.experiment.amplitudes.len()],
                    rec.t_end(),
                    termination_line(&rec.termination)
                );
                if let Termination::SolverFailure { detail } = &rec.termination {
                    failures.push(format!("run {k:03}: {detail}"));
                    status = 1;
                }
                if let Some(b) = detect_blowup(rec) {
                    let _ = writeln!(
                        report,
                        "  blow-up fit: T* = {:.6e}, exponent {:.3}, quality {:.3}",
                        b.t_star, b.exponent, b.quality
                    );
                }
                if let Some(d) = fit_dissipative_decay(rec) {
                    let _ = writeln!(
                        report,
                        "  decay fit: c = {:.4e}, level {:.4e}, quality {:.3}",
                        d.c, d.rhs_const, d.quality
                    );
                }
                let _ = writeln!(
                    report,
                    "  energy: shift C_FG = {:.4e}, monotonicity violations (1e-9): {}",
                    energy_shift(rec),
                    energy_decay_violations(rec, 1e-9)
                );
            }
            if records.len() > 1 {
                let absorbing = detect_absorbing_set(&records, 0.2);
                let linf = linf_bound(&records);
                let _ = writeln!(report, "\nensemble diagnostics:");
                let _ = writeln!(
                    report,
                    "  absorbing set: C0 = {:.6e}, plateau spread {:.3e}",
                    absorbing.c0, absorbing.plateau_spread
                );
                for (k, t) in absorbing.entry_times.iter().enumerate() {
                    let _ = writeln!(
                        report,
                        "  entry time t# run {k:03}: {}",
                        t.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "not absorbed".into())
                    );
                }
                let _ = writeln!(
                    report,
                    "  sup-norm plateau: C1 = {:.6e}, spread {:.3e}",
                    linf.c1, linf.spread
                );
            }
            sink.write("report.txt", report.as_bytes())?;
        }
        ExperimentKind::Classify => {
            let rep = classify_regime(&cfg.f, &cfg.g, &cfg.flux, &grid)?;
            let text = format!(
                "verdict: {:?}\ncondition: {}\nmargin: {:.6e}\n",
                rep.verdict, rep.condition, rep.margin
            );
            sink.write("regime.txt", text.as_bytes())?;
        }
        ExperimentKind::CheckHypotheses => {
            let h1 = check_h1(&cfg.flux, 256);
            let h2 = check_h2(&cfg.f, &cfg.g, 257);
            let h3 = check_h3(&cfg.f, &cfg.g);
            let c_b = 1.0 / (grid.omega() * grid.lambda());
            let c_poincare = estimate_poincare_constant(&grid, 2.0)?;
            let mut c_tilde = c_poincare.c * 1.1 * c_b;
            if h3.h3b_g {
                c_tilde *= 0.5;
            }
            let nb = check_balance_nb(&cfg.f, &cfg.g, &cfg.flux, c_tilde, c_b, &[]);
            let weaker = check_weaker_condition(
                &cfg.f,
                &cfg.g,
                &cfg.flux,
                c_tilde,
                c_b,
                &[1.0, 2.0, 4.0, 8.0],
                1e6,
            );
            let mut t = String::new();
            let _ = writeln!(t, "flux coercivity/monotonicity: pass = {}", h1.pass);
            let _ = writeln!(
                t,
                "  c1 envelope {:.4e}, coercivity margin {:.3e}, monotonicity min {:.3e}",
                h1.c1_fit, h1.coercivity_margin, h1.monotonicity_min
            );
            if let Some(w) = &h1.witness {
                let _ = writeln!(t, "  witness: {w}");
            }
            let _ = writeln!(
                t,
                "tail monotonicity of reactions: pass = {} (inf f' {:.3e}, inf g' {:.3e})",
                h2.pass, h2.inf_f_prime, h2.inf_g_prime
            );
            let _ = writeln!(
                t,
                "growth envelopes: r1 {:.3} (c {:.3e}), r2 {:.3} (c {:.3e}), two-sided g: {}",
                h3.r1, h3.c_f_envelope, h3.r2, h3.c_g_envelope, h3.h3b_g
            );
            let _ = writeln!(
                t,
                "poincare constant (s=2): {:.6e} (x1.1 safety -> C~ = {:.6e})",
                c_poincare.c, c_tilde
            );
            let _ = writeln!(
                t,
                "balance: pass = {}, best eps = {:.4e}, margin = {:.4e}, y0 = {:.3e}",
                nb.pass, nb.best_eps, nb.margin, nb.y0
            );
            for c in &weaker.per_m {
                let _ = writeln!(
                    t,
                    "all-moments balance m = {}: pass = {}, Q = {:.4e}",
                    c.m, c.pass, c.q_deficit
                );
            }
            if let Some(tau) = weaker.tau {
                let _ = writeln!(t, "fitted Q(m) growth order tau = {tau:.3}");
            }
            sink.write("hypotheses.txt", t.as_bytes())?;
        }
        ExperimentKind::Poincare => {
            // refinement ladder around the configured grid
            let n = cfg.grid.counts.0;
            let mut csv = String::from("n,c_poincare\n");
            let mut last = Vec::new();
            for factor in [0.5, 1.0, 2.0] {
                let nn = (((n - 1) as f64 * factor) as usize + 1).max(5);
                let mut spec = cfg.grid.clone();
                spec.counts.0 = nn;
                let g = spec.build()?;
                let est = estimate_poincare_constant(&g, cfg.experiment.s)?;
                let _ = writeln!(csv, "{nn},{:.12e}", est.c);
                last.push(est);
            }
            sink.write("poincare.csv", csv.as_bytes())?;
            let mut trace_csv = String::from("eps,c_eps,binding\n");
            for &eps in &[1.0, 0.3, 0.1, 0.03, 0.01] {
                let te = estimate_trace_constant(&grid, 2.0, cfg.experiment.trace_p, eps);
                let _ = writeln!(trace_csv, "{eps},{:.12e},{}", te.c_eps, te.binding);
            }
            sink.write("trace_constant.csv", trace_csv.as_bytes())?;
            let est = last.last().unwrap();
            let report = format!(
                "s = {}\ncertified eigensolve route: {}\nC (finest) = {:.8e}\n{}",
                cfg.experiment.s,
                est.certified_route,
                est.c,
                if est.certified_route {
                    ""
                } else {
                    "note: ascent route yields an uncertified lower bound\n"
                }
            );
            sink.write("report.txt", report.as_bytes())?;
        }
        ExperimentKind::SweepNu => {
            let nu_max = cfg
                .experiment
                .nu_list
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            let nu_min = cfg
                .experiment
                .nu_list
                .iter()
                .cloned()
                .fold(f64::MAX, f64::min);
            let beta = choose_beta(&grid, nu_max, cfg.experiment.unstable_modes);
            let m = cfg.experiment.tangents.unwrap_or_else(|| {
                (2 + expected_dimension(&grid, nu_min, beta).ceil() as usize).min(32)
            });
            let params = LyapunovParams {
                m,
                t_transient: cfg.experiment.t_transient,
                t_warmup: cfg.experiment.t_warmup,
                t_average: cfg.experiment.t_average,
                dt: cfg.experiment.lyap_dt,
                stride: cfg.experiment.stride,
                seed: cfg.seed,
            };
            let builder = chafee_infante_builder(beta, &grid);
            let report =
                pool.install(|| sweep_nu(&cfg.experiment.nu_list, builder, &grid, &params));
            let mut csv = String::from("nu,dimension,converged,lambda1,lambda2,lambda3\n");
            for e in &report.entries {
                let l = |k: usize| e.exponents.get(k).cloned().unwrap_or(f64::NAN);
                let _ = writeln!(
                    csv,
                    "{:.8e},{:.8e},{},{:.8e},{:.8e},{:.8e}",
                    e.nu,
                    e.dimension,
                    e.converged,
                    l(0),
                    l(1),
                    l(2)
                );
            }
            sink.write("sweep.csv", csv.as_bytes())?;
            let mut t = format!("beta = {beta:.6e}\ntangents m = {m}\n");
            match report.slope {
                Some(fit) => {
                    let _ = writeln!(
                        t,
                        "log-log slope of dimension vs nu: {:.4} +/- {:.4} (R2 {:.4})",
                        fit.slope,
                        report.slope_ci.unwrap_or(f64::NAN),
                        fit.r2
                    );
                    let _ = writeln!(t, "target for N=1: -1/2");
                }
                None => {
                    let _ = writeln!(t, "slope: degenerate (fewer than 3 usable points)");
                }
            }
            if report.partial {
                let _ = writeln!(t, "partial: some entries failed or did not converge");
                failures.push("sweep produced at least one unusable entry".into());
                status = 1;
            }
            sink.write("report.txt", t.as_bytes())?;
        }
        ExperimentKind::BlowupLab => {
            let nu = match cfg.flux.kind {
                crate::nonlin::FluxKind::Constant { nu } => nu,
                crate::nonlin::FluxKind::PowerLaw { .. } => cfg.experiment.nu,
            };
            let exp = blowup_experiment(&cfg.f, &cfg.g, &grid, nu, cfg.experiment.horizon)?;
            sink.write("companion.csv", &record_csv(&exp.companion))?;
            sink.write("pde.csv", &record_csv(&exp.pde))?;
            let mut t = String::new();
            let _ = writeln!(t, "lambda_1D = {:.8e}", exp.recipe.lambda_1d);
            let _ = writeln!(t, "A = {:.8e}", exp.recipe.a_level);
            let _ = writeln!(t, "delta = {:.8e}", exp.recipe.delta);
            let _ = writeln!(t, "s0 = {:.4e}, s0' = {:.4e}", exp.recipe.s0, exp.recipe.s0_prime);
            if let Some(n) = &exp.recipe.note {
                let _ = writeln!(t, "note: {n}");
            }
            let _ = writeln!(
                t,
                "T* companion = {}",
                exp.t_star_companion
                    .map(|x| format!("{x:.8e}"))
                    .unwrap_or_else(|| "none".into())
            );
            let _ = writeln!(
                t,
                "T* pde = {}",
                exp.t_star_pde
                    .map(|x| format!("{x:.8e}"))
                    .unwrap_or_else(|| "none".into())
            );
            let _ = writeln!(
                t,
                "ordering: pass = {}, worst violation {:.4e} (tol {:.4e}) at t = {:.4e}, node {}",
                exp.comparison.pass,
                exp.comparison.worst_violation,
                exp.comparison.tol,
                exp.comparison.location.0,
                exp.comparison.location.1
            );
            if let Some(b) = detect_blowup(&exp.pde) {
                let _ = writeln!(
                    t,
                    "pde rate fit: T* = {:.6e}, exponent {:.3}, quality {:.3}",
                    b.t_star, b.exponent, b.quality
                );
            }
            if exp.t_star_pde.is_none() {
                failures.push("dynamic-BC run did not blow up".into());
                status = 1;
            }
            sink.write("report.txt", t.as_bytes())?;
        }
        ExperimentKind::Ladder => {
            let records = run_ensemble(cfg, &grid, &pool);
            let rec = &records[0];
            let p = cfg.flux.p();
            let final_state = rec.final_state();
            let ladder = norm_ladder(final_state, p, cfg.experiment.k_max, &grid);
            let mut csv = String::from("k,m,log_y,root,normalized_root\n");
            for r in &ladder {
                let _ = writeln!(
                    csv,
                    "{},{:.8e},{:.12e},{:.12e},{:.12e}",
                    r.k, r.m, r.log_y, r.root, r.normalized_root
                );
            }
            sink.write("ladder.csv", csv.as_bytes())?;
            let sup = final_state
                .u
                .iter()
                .chain(final_state.v.iter())
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            let worst = ladder_vs_sup(rec, p, cfg.experiment.k_max, &grid);
            let report = format!(
                "final sup-norm = {:.8e}\ndeepest root = {:.8e}\nworst relative gap over snapshots = {:.3e}\n",
                sup,
                ladder.last().map(|r| r.root).unwrap_or(f64::NAN),
                worst
            );
            sink.write("report.txt", report.as_bytes())?;
        }
    }

    // attractor-adjacent extras shared by several kinds could go here; keep
    // the manifest last so it lists every artifact
    let manifest = Manifest {
        kind: kind.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(raw_config),
        seed: cfg.seed,
        jobs,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: sink.files,
        failures,
    };
    let manifest_path = out.join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_vec_pretty(&manifest).expect("manifest serialises"),
    )?;
    Ok(RunOutcome {
        status,
        manifest_path,
        artifacts: sink.paths,
    })
}

/// Deterministic ensemble: member `k` draws its initial data from
/// `ChaCha8(seed + k)` with amplitude `amplitudes[k mod len]`; members run in
/// parallel and are returned in index order.
fn run_ensemble(
    cfg: &ScenarioConfig,
    grid: &GridDomain,
    pool: &rayon::ThreadPool,
) -> Vec<TrajectoryRecord> {
    use rayon::prelude::*;
    let solver = cfg.solver_config();
    let n = cfg.experiment.ensemble;
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
                let amp = cfg.experiment.amplitudes[k % cfg.experiment.amplitudes.len()];
                let u0 = random_smooth_field(grid, &mut rng, amp);
                simulate(&u0, cfg.experiment.horizon, &solver, grid)
            })
            .collect()
    })
}

/// Extra report hook used by examples: the dimension upper bound from a
/// trajectory tail.
pub fn upper_bound_from_record(
    record: &TrajectoryRecord,
    cfg: &ScenarioConfig,
    nu: f64,
    c1_cw: f64,
    n_dim: usize,
) -> Option<(f64, f64)> {
    let c_star = estimate_c_star(record, &cfg.f, &cfg.g, 0.2).ok()?;
    let bound = upper_bound_dim(c_star, nu, c1_cw, n_dim).ok()?;
    Some((c_star, bound))
}

// re-export for the CLI surface
pub use crate::attractor::SweepReport;
