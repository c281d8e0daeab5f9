//! Config-file schema for scenario runs.
//!
//! Configs are TOML.  Validation is strict and total: unknown keys are
//! errors (no silent typo absorption) and *all* schema violations are
//! collected and reported together, not just the first.  See the crate's
//! `configs/` directory for one example per experiment kind.
//!
//! Reaction presets: `zero`, `linear` (`c`), `cubic`, `power` (`r`, `c`),
//! `custom` (polynomial `coeffs`, ascending).  Flux presets: `plaplace`
//! (`p`, optional `epsilon`), `const` (`nu`).  Boundary-weight presets:
//! `"one"`, `{ const = b }`, `{ table = [...] }`.

use crate::grid::{build_interval_grid, build_rectangle_grid, BProfile, GridDomain, GridError};
use crate::nonlin::{FluxSpec, NonlinearitySpec};
use crate::stepper::SolverConfig;
use std::path::{Path, PathBuf};
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config has {} violation(s):\n  - {}", .0.len(), .0.join("\n  - "))]
    Violations(Vec<String>),
    #[error("grid construction failed: {0}")]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Classify,
    CheckHypotheses,
    Poincare,
    SweepNu,
    BlowupLab,
    Ladder,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "simulate" => Some(Self::Simulate),
            "classify" => Some(Self::Classify),
            "check-hypotheses" => Some(Self::CheckHypotheses),
            "poincare" => Some(Self::Poincare),
            "sweep-nu" => Some(Self::SweepNu),
            "blowup-lab" => Some(Self::BlowupLab),
            "ladder" => Some(Self::Ladder),
            _ => None,
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Classify => "classify",
            Self::CheckHypotheses => "check-hypotheses",
            Self::Poincare => "poincare",
            Self::SweepNu => "sweep-nu",
            Self::BlowupLab => "blowup-lab",
            Self::Ladder => "ladder",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub dimension: usize,
    pub counts: (usize, usize),
    pub extents: (f64, f64),
    pub b: BProfile,
}

impl GridSpec {
    pub fn build(&self) -> Result<GridDomain, GridError> {
        if self.dimension == 1 {
            build_interval_grid(self.counts.0, self.extents.0, &self.b)
        } else {
            build_rectangle_grid(self.counts.0, self.counts.1, self.extents, &self.b)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub dt: f64,
    pub dt_max: f64,
    pub adaptive: bool,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub abort_threshold: f64,
    pub dt_floor: f64,
    pub snapshot_stride: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dt: 1e-3,
            dt_max: 0.25,
            adaptive: true,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            abort_threshold: 1e8,
            dt_floor: 1e-12,
            snapshot_stride: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    pub horizon: f64,
    pub ensemble: usize,
    pub amplitudes: Vec<f64>,
    pub nu_list: Vec<f64>,
    pub k_max: usize,
    pub s: f64,
    pub trace_p: f64,
    pub trace_eps: f64,
    pub tangents: Option<usize>,
    pub t_transient: f64,
    pub t_warmup: f64,
    pub t_average: f64,
    pub lyap_dt: f64,
    pub stride: usize,
    pub unstable_modes: usize,
    pub nu: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            horizon: 10.0,
            ensemble: 1,
            amplitudes: vec![1.0],
            nu_list: vec![0.02, 0.01, 0.005, 0.0025],
            k_max: 12,
            s: 2.0,
            trace_p: 2.0,
            trace_eps: 0.1,
            tangents: None,
            t_transient: 2.0,
            t_warmup: 10.0,
            t_average: 40.0,
            lyap_dt: 1e-2,
            stride: 5,
            unstable_modes: 3,
            nu: 1.0,
        }
    }
}

/// A validated scenario; the seed fixes every random ensemble.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub grid: GridSpec,
    pub flux: FluxSpec,
    pub f: NonlinearitySpec,
    pub g: NonlinearitySpec,
    pub solver: SolverSettings,
    pub experiment: ExperimentSettings,
}

impl ScenarioConfig {
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.flux, self.f.clone(), self.g.clone());
        cfg.newton_tol = self.solver.newton_tol;
        cfg.newton_max_iter = self.solver.newton_max_iter;
        cfg.abort_threshold = self.solver.abort_threshold;
        cfg.dt_floor = self.solver.dt_floor;
        cfg.snapshot_stride = self.solver.snapshot_stride;
        if self.solver.adaptive {
            cfg.adaptive(self.solver.dt, self.solver.dt_max.max(self.solver.dt))
        } else {
            cfg.fixed_dt(self.solver.dt)
        }
    }
}

struct Validator<'a> {
    errors: Vec<String>,
    section: &'a str,
}

impl<'a> Validator<'a> {
    fn check_keys(&mut self, table: &toml::value::Table, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.errors
                    .push(format!("[{}] unknown key `{}`", self.section, key));
            }
        }
    }
    fn f64(&mut self, t: &toml::value::Table, key: &str, default: f64) -> f64 {
        match t.get(key) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(x)) => *x as f64,
            Some(other) => {
                self.errors.push(format!(
                    "[{}] `{}` must be a number, got {}",
                    self.section,
                    key,
                    other.type_str()
                ));
                default
            }
        }
    }
    fn usize_(&mut self, t: &toml::value::Table, key: &str, default: usize) -> usize {
        match t.get(key) {
            None => default,
            Some(Value::Integer(x)) if *x >= 0 => *x as usize,
            Some(other) => {
                self.errors.push(format!(
                    "[{}] `{}` must be a nonnegative integer, got {other:?}",
                    self.section, key
                ));
                default
            }
        }
    }
    fn string(&mut self, t: &toml::value::Table, key: &str) -> Option<String> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.errors.push(format!(
                    "[{}] `{}` must be a string, got {}",
                    self.section,
                    key,
                    other.type_str()
                ));
                None
            }
        }
    }
    fn f64_list(&mut self, t: &toml::value::Table, key: &str) -> Option<Vec<f64>> {
        match t.get(key) {
            None => None,
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for it in items {
                    match it {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        other => {
                            self.errors.push(format!(
                                "[{}] `{}` entries must be numbers, got {}",
                                self.section,
                                key,
                                other.type_str()
                            ));
                        }
                    }
                }
                Some(out)
            }
            Some(other) => {
                self.errors.push(format!(
                    "[{}] `{}` must be an array, got {}",
                    self.section,
                    key,
                    other.type_str()
                ));
                None
            }
        }
    }
    fn require(&mut self, condition: bool, message: String) {
        if !condition {
            self.errors.push(message);
        }
    }
}

fn parse_nonlinearity(table: &toml::value::Table, section: &str, errors: &mut Vec<String>) -> NonlinearitySpec {
    let mut v = Validator { errors: Vec::new(), section };
    v.check_keys(table, &["preset", "r", "c", "coeffs", "h"]);
    let preset = v.string(table, "preset").unwrap_or_else(|| "zero".into());
    let r = v.f64(table, "r", 2.0);
    let c = v.f64(table, "c", 1.0);
    let h = v.f64(table, "h", 0.0);
    let spec = match preset.as_str() {
        "zero" => NonlinearitySpec::zero(),
        "cubic" => NonlinearitySpec::cubic(),
        "linear" => NonlinearitySpec::linear(c),
        "power" => {
            v.require(r >= 1.0, format!("[{section}] power preset needs r >= 1, got {r}"));
            NonlinearitySpec::power(r.max(1.0), c)
        }
        "custom" => {
            let coeffs = v.f64_list(table, "coeffs").unwrap_or_default();
            NonlinearitySpec::poly(coeffs)
        }
        other => {
            v.errors.push(format!(
                "[{section}] unknown preset `{other}` (expected zero|linear|cubic|power|custom)"
            ));
            NonlinearitySpec::zero()
        }
    };
    errors.append(&mut v.errors);
    spec.with_source(h)
}

/// Parse and validate a config file; returns the validated scenario or the
/// complete list of schema violations.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let raw = std::fs::read_to_string(path)?;
    parse_config_str(&raw)
}

pub fn parse_config_str(raw: &str) -> Result<ScenarioConfig, ConfigError> {
    let value: Value = raw.parse::<Value>()?;
    let mut errors: Vec<String> = Vec::new();
    let Some(root) = value.as_table() else {
        return Err(ConfigError::Violations(vec!["top level must be a table".into()]));
    };
    {
        let mut v = Validator { errors: Vec::new(), section: "root" };
        v.check_keys(
            root,
            &["kind", "seed", "out", "grid", "flux", "f", "g", "solver", "experiment"],
        );
        errors.append(&mut v.errors);
    }
    // kind / seed / out
    let kind = match root.get("kind") {
        None => None,
        Some(Value::String(s)) => match ExperimentKind::parse(s) {
            Some(k) => Some(k),
            None => {
                errors.push(format!("`kind` = `{s}` is not an experiment kind"));
                None
            }
        },
        Some(other) => {
            errors.push(format!("`kind` must be a string, got {}", other.type_str()));
            None
        }
    };
    let seed = match root.get("seed") {
        None => 0,
        Some(Value::Integer(x)) if *x >= 0 => *x as u64,
        Some(other) => {
            errors.push(format!("`seed` must be a nonnegative integer, got {other:?}"));
            0
        }
    };
    let out = match root.get("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            errors.push(format!("`out` must be a string, got {}", other.type_str()));
            None
        }
    };
    // grid
    let grid = {
        let empty = toml::value::Table::new();
        let table = match root.get("grid") {
            Some(Value::Table(t)) => t,
            Some(other) => {
                errors.push(format!("[grid] must be a table, got {}", other.type_str()));
                &empty
            }
            None => {
                errors.push("missing [grid] section".into());
                &empty
            }
        };
        let mut v = Validator { errors: Vec::new(), section: "grid" };
        v.check_keys(table, &["dimension", "n", "nx", "ny", "length", "lengths", "b"]);
        let dimension = v.usize_(table, "dimension", 1);
        v.require(
            dimension == 1 || dimension == 2,
            format!("[grid] dimension must be 1 or 2, got {dimension}"),
        );
        let (counts, extents) = if dimension == 2 {
            let nx = v.usize_(table, "nx", 0);
            let ny = v.usize_(table, "ny", 0);
            v.require(nx >= 3 && ny >= 3, format!("[grid] nx, ny must be >= 3, got {nx}, {ny}"));
            let lengths = v.f64_list(table, "lengths").unwrap_or(vec![1.0, 1.0]);
            v.require(
                lengths.len() == 2 && lengths.iter().all(|&l| l > 0.0),
                format!("[grid] lengths must be two positive numbers, got {lengths:?}"),
            );
            let lx = lengths.first().copied().unwrap_or(1.0);
            let ly = lengths.get(1).copied().unwrap_or(1.0);
            ((nx.max(3), ny.max(3)), (lx, ly))
        } else {
            let n = v.usize_(table, "n", 0);
            v.require(n >= 3, format!("[grid] n must be >= 3, got {n}"));
            let length = v.f64(table, "length", 1.0);
            v.require(length > 0.0, format!("[grid] length must be positive, got {length}"));
            ((n.max(3), 1), (length.max(1e-12), 0.0))
        };
        let b = match table.get("b") {
            None => BProfile::One,
            Some(Value::String(s)) if s == "one" => BProfile::One,
            Some(Value::String(s)) => {
                v.errors.push(format!("[grid] unknown b preset `{s}`"));
                BProfile::One
            }
            Some(Value::Table(bt)) => {
                if let Some(c) = bt.get("const") {
                    let cv = c.as_float().or(c.as_integer().map(|x| x as f64));
                    match cv {
                        Some(cv) if cv > 0.0 => BProfile::Const(cv),
                        _ => {
                            v.errors.push(format!("[grid] b.const must be a positive number, got {c:?}"));
                            BProfile::One
                        }
                    }
                } else if bt.get("table").is_some() {
                    let vals = v.f64_list(bt, "table").unwrap_or_default();
                    v.require(
                        vals.iter().all(|&x| x > 0.0),
                        "[grid] b.table entries must be positive".into(),
                    );
                    BProfile::Table(vals)
                } else {
                    v.errors.push("[grid] b table must have `const` or `table`".into());
                    BProfile::One
                }
            }
            Some(other) => {
                v.errors.push(format!("[grid] b must be a preset string or table, got {}", other.type_str()));
                BProfile::One
            }
        };
        errors.append(&mut v.errors);
        GridSpec { dimension: dimension.clamp(1, 2), counts, extents, b }
    };
    // flux
    let flux = {
        let empty = toml::value::Table::new();
        let table = match root.get("flux") {
            Some(Value::Table(t)) => t,
            Some(other) => {
                errors.push(format!("[flux] must be a table, got {}", other.type_str()));
                &empty
            }
            None => &empty, // default: constant nu = 1
        };
        let mut v = Validator { errors: Vec::new(), section: "flux" };
        v.check_keys(table, &["kind", "p", "nu", "epsilon"]);
        let kind = v.string(table, "kind").unwrap_or_else(|| "const".into());
        let flux = match kind.as_str() {
            "plaplace" => {
                let p = v.f64(table, "p", 2.0);
                v.require(p > 1.0, format!("[flux] p must exceed 1, got {p}"));
                let default_eps = if (p - 2.0).abs() < 1e-14 { 0.0 } else { 1e-8 };
                let eps = v.f64(table, "epsilon", default_eps);
                v.require(eps >= 0.0, format!("[flux] epsilon must be >= 0, got {eps}"));
                FluxSpec::p_laplace(p.max(1.0 + 1e-9), eps.max(0.0))
            }
            "const" => {
                let nu = v.f64(table, "nu", 1.0);
                v.require(nu > 0.0, format!("[flux] nu must be positive, got {nu}"));
                FluxSpec::constant(nu)
            }
            other => {
                v.errors.push(format!("[flux] unknown kind `{other}` (expected plaplace|const)"));
                FluxSpec::constant(1.0)
            }
        };
        errors.append(&mut v.errors);
        flux
    };
    // f / g
    let f = match root.get("f") {
        Some(Value::Table(t)) => parse_nonlinearity(t, "f", &mut errors),
        Some(other) => {
            errors.push(format!("[f] must be a table, got {}", other.type_str()));
            NonlinearitySpec::zero()
        }
        None => NonlinearitySpec::zero(),
    };
    let g = match root.get("g") {
        Some(Value::Table(t)) => parse_nonlinearity(t, "g", &mut errors),
        Some(other) => {
            errors.push(format!("[g] must be a table, got {}", other.type_str()));
            NonlinearitySpec::zero()
        }
        None => NonlinearitySpec::zero(),
    };
    // solver
    let solver = {
        let mut s = SolverSettings::default();
        if let Some(val) = root.get("solver") {
            match val {
                Value::Table(table) => {
                    let mut v = Validator { errors: Vec::new(), section: "solver" };
                    v.check_keys(
                        table,
                        &["dt", "dt_max", "adaptive", "newton_tol", "newton_max_iter",
                          "abort_threshold", "dt_floor", "snapshot_stride"],
                    );
                    s.dt = v.f64(table, "dt", s.dt);
                    v.require(s.dt > 0.0, format!("[solver] dt must be positive, got {}", s.dt));
                    s.dt_max = v.f64(table, "dt_max", s.dt_max);
                    s.adaptive = match table.get("adaptive") {
                        None => s.adaptive,
                        Some(Value::Boolean(b)) => *b,
                        Some(other) => {
                            v.errors.push(format!("[solver] adaptive must be a boolean, got {}", other.type_str()));
                            s.adaptive
                        }
                    };
                    s.newton_tol = v.f64(table, "newton_tol", s.newton_tol);
                    v.require(s.newton_tol > 0.0, "[solver] newton_tol must be positive".into());
                    s.newton_max_iter = v.usize_(table, "newton_max_iter", s.newton_max_iter);
                    s.abort_threshold = v.f64(table, "abort_threshold", s.abort_threshold);
                    s.dt_floor = v.f64(table, "dt_floor", s.dt_floor);
                    s.snapshot_stride = v.usize_(table, "snapshot_stride", s.snapshot_stride);
                    errors.append(&mut v.errors);
                }
                other => errors.push(format!("[solver] must be a table, got {}", other.type_str())),
            }
        }
        s.dt = s.dt.max(1e-300);
        s
    };
    // experiment
    let experiment = {
        let mut e = ExperimentSettings::default();
        if let Some(val) = root.get("experiment") {
            match val {
                Value::Table(table) => {
                    let mut v = Validator { errors: Vec::new(), section: "experiment" };
                    v.check_keys(
                        table,
                        &["horizon", "ensemble", "amplitudes", "nu_list", "k_max", "s",
                          "trace_p", "trace_eps", "tangents", "t_transient", "t_warmup",
                          "t_average", "lyap_dt", "stride", "unstable_modes", "nu"],
                    );
                    e.horizon = v.f64(table, "horizon", e.horizon);
                    v.require(e.horizon > 0.0, "[experiment] horizon must be positive".into());
                    e.ensemble = v.usize_(table, "ensemble", e.ensemble).max(1);
                    if let Some(a) = v.f64_list(table, "amplitudes") {
                        v.require(!a.is_empty(), "[experiment] amplitudes must be nonempty".into());
                        if !a.is_empty() {
                            e.amplitudes = a;
                        }
                    }
                    if let Some(nl) = v.f64_list(table, "nu_list") {
                        v.require(
                            nl.iter().all(|&x| x > 0.0),
                            "[experiment] nu_list entries must be positive".into(),
                        );
                        if !nl.is_empty() {
                            e.nu_list = nl;
                        }
                    }
                    e.k_max = v.usize_(table, "k_max", e.k_max);
                    e.s = v.f64(table, "s", e.s);
                    e.trace_p = v.f64(table, "trace_p", e.trace_p);
                    e.trace_eps = v.f64(table, "trace_eps", e.trace_eps);
                    e.tangents = match table.get("tangents") {
                        None => None,
                        Some(Value::Integer(x)) if *x >= 1 && *x <= 32 => Some(*x as usize),
                        Some(other) => {
                            v.errors.push(format!("[experiment] tangents must be 1..=32, got {other:?}"));
                            None
                        }
                    };
                    e.t_transient = v.f64(table, "t_transient", e.t_transient);
                    e.t_warmup = v.f64(table, "t_warmup", e.t_warmup);
                    e.t_average = v.f64(table, "t_average", e.t_average);
                    e.lyap_dt = v.f64(table, "lyap_dt", e.lyap_dt);
                    e.stride = v.usize_(table, "stride", e.stride).max(1);
                    e.unstable_modes = v.usize_(table, "unstable_modes", e.unstable_modes).max(1);
                    e.nu = v.f64(table, "nu", e.nu);
                    errors.append(&mut v.errors);
                }
                other => errors.push(format!("[experiment] must be a table, got {}", other.type_str())),
            }
        }
        e
    };
    if !errors.is_empty() {
        return Err(ConfigError::Violations(errors));
    }
    Ok(ScenarioConfig {
        kind,
        seed,
        out,
        grid,
        flux,
        f,
        g,
        solver,
        experiment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "simulate"
seed = 7

[grid]
dimension = 1
n = 101
length = 1.0
b = "one"

[flux]
kind = "const"
nu = 1.0

[f]
preset = "cubic"

[g]
preset = "power"
r = 2.0
c = -1.0

[solver]
dt = 1e-3

[experiment]
horizon = 5.0
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::Simulate));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.counts.0, 101);
        assert_eq!(cfg.f.r, 4.0);
        assert_eq!(cfg.g.c, -1.0);
        let grid = cfg.grid.build().unwrap();
        assert_eq!(grid.n_nodes(), 101);
        let sc = cfg.solver_config();
        assert!(sc.is_autonomous());
    }

    #[test]
    fn misspelled_key_is_named() {
        let bad = MINIMAL.replace("nu = 1.0", "nuu = 1.0");
        match parse_config_str(&bad) {
            Err(ConfigError::Violations(v)) => {
                assert!(v.iter().any(|e| e.contains("nuu")), "{v:?}");
            }
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_reported_not_just_first() {
        let bad = MINIMAL
            .replace("dt = 1e-3", "dt = -1.0")
            .replace("n = 101", "n = 2")
            .replace("nu = 1.0", "nuu = 1.0");
        match parse_config_str(&bad) {
            Err(ConfigError::Violations(v)) => {
                assert!(v.len() >= 3, "want all violations listed: {v:?}");
                assert!(v.iter().any(|e| e.contains("dt")));
                assert!(v.iter().any(|e| e.contains("n must be >= 3")));
                assert!(v.iter().any(|e| e.contains("nuu")));
            }
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn b_profiles_and_2d_grid() {
        let two_d = r#"
[grid]
dimension = 2
nx = 5
ny = 4
lengths = [2.0, 1.0]
b = { const = 2.5 }

[flux]
kind = "plaplace"
p = 3.0
"#;
        let cfg = parse_config_str(two_d).unwrap();
        assert_eq!(cfg.grid.dimension, 2);
        let g = cfg.grid.build().unwrap();
        assert!((g.omega() - 2.0).abs() < 1e-12);
        assert_eq!(cfg.flux.epsilon, 1e-8, "default ε for p ≠ 2");
        assert!(cfg.kind.is_none());
    }
}
