//! Thin CLI over the scenario runner: one subcommand per experiment kind,
//! each reading a TOML config and writing artifacts plus a manifest.

use clap::{Args, Parser, Subcommand};
use dynbc::config::{parse_config_str, ExperimentKind};
use dynbc::runner::run_scenario;
use std::path::PathBuf;
use std::process::ExitCode;

const PRESET_HELP: &str = "\
Config presets:
  reaction presets ([f]/[g]): zero | linear (c) | cubic | power (r, c) |
      custom (coeffs = ascending polynomial coefficients); `h` attaches the
      constant source (h1 for [f], h2 for [g])
  flux presets ([flux]):      plaplace (p, epsilon) | const (nu)
  boundary weight ([grid].b): \"one\" | { const = b } | { table = [...] }

Output directory resolution: --out, then `out` in the config, then
$DYNBC_OUT/<kind>, then ./runs/<kind>.  Exit codes: 0 complete,
1 run failure or partial result, 2 usage error.";

#[derive(Parser)]
#[command(
    name = "dynbc",
    version,
    about = "Scenario runner for quasi-linear parabolic systems with dynamic boundary conditions",
    after_long_help = PRESET_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML scenario config
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config and $DYNBC_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size for independent runs
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the coupled system from a random ensemble to the horizon
    Simulate(RunArgs),
    /// Fire the balance conditions and report the regime with margins
    Classify(RunArgs),
    /// Certify the structural hypotheses numerically
    CheckHypotheses(RunArgs),
    /// Estimate the Poincare and trace-interpolation constants
    Poincare(RunArgs),
    /// Kaplan-Yorke dimension against diffusion: the scaling sweep
    SweepNu(RunArgs),
    /// Subsolution construction, companion run and comparison check
    BlowupLab(RunArgs),
    /// Sup-norm power ladder on a trajectory
    Ladder(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Simulate(a) => (ExperimentKind::Simulate, a),
            Command::Classify(a) => (ExperimentKind::Classify, a),
            Command::CheckHypotheses(a) => (ExperimentKind::CheckHypotheses, a),
            Command::Poincare(a) => (ExperimentKind::Poincare, a),
            Command::SweepNu(a) => (ExperimentKind::SweepNu, a),
            Command::BlowupLab(a) => (ExperimentKind::BlowupLab, a),
            Command::Ladder(a) => (ExperimentKind::Ladder, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let raw = match std::fs::read(&args.config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match parse_config_str(&String::from_utf8_lossy(&raw)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .or_else(|| {
            std::env::var_os("DYNBC_OUT").map(|root| PathBuf::from(root).join(kind.name()))
        })
        .unwrap_or_else(|| PathBuf::from("runs").join(kind.name()));
    match run_scenario(&cfg, kind, &raw, &out, args.jobs) {
        Ok(outcome) => {
            println!("wrote {}", outcome.manifest_path.display());
            for p in &outcome.artifacts {
                println!("  {}", p.display());
            }
            if outcome.status == 0 {
                ExitCode::SUCCESS
            } else {
                eprintln!("completed with recorded failures (see manifest)");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::from(1)
        }
    }
}
