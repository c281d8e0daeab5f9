//! Temporal and spatial convergence orders against the manufactured solution
//! u*(x,t) = e^{-t} cos(pi x).
//!
//! Run: cargo run --release --example manufactured_convergence

use dynbc::grid::{build_interval_grid, x2_norm, BProfile, StateField};
use dynbc::nonlin::{FluxSpec, NonlinearitySpec};
use dynbc::stepper::{simulate, SolverConfig, Source};
use std::f64::consts::PI;

fn exact(x: [f64; 2], t: f64) -> f64 {
    (-t as f64).exp() * (PI * x[0]).cos()
}

fn run(n: usize, dt: f64, horizon: f64) -> StateField {
    let grid = build_interval_grid(n, 1.0, &BProfile::One).unwrap();
    let h1 = Source::space_time(|x, t| (PI * PI - 1.0) * (-t).exp() * (PI * x[0]).cos());
    let h2 = Source::space_time(|x, t| -(-t).exp() * (PI * x[0]).cos());
    let cfg = SolverConfig::new(
        FluxSpec::constant(1.0),
        NonlinearitySpec::zero(),
        NonlinearitySpec::zero(),
    )
    .with_sources(h1, h2)
    .fixed_dt(dt)
    .with_snapshot_stride(0);
    let u0 = StateField::from_fn(&grid, |x| exact(x, 0.0));
    simulate(&u0, horizon, &cfg, &grid).final_state().clone()
}

fn error(state: &StateField, n: usize, t: f64) -> f64 {
    let grid = build_interval_grid(n, 1.0, &BProfile::One).unwrap();
    let exact_final = StateField::from_fn(&grid, |x| exact(x, t));
    let diff = StateField {
        u: state.u.iter().zip(&exact_final.u).map(|(a, b)| a - b).collect(),
        v: state.v.iter().zip(&exact_final.v).map(|(a, b)| a - b).collect(),
    };
    x2_norm(&diff, &grid)
}

fn main() {
    println!("temporal sweep at n = 201, T = 0.5:");
    let mut prev: Option<f64> = None;
    for &dt in &[1e-2, 5e-3, 2.5e-3] {
        let e = error(&run(201, dt, 0.5), 201, 0.5);
        match prev {
            Some(p) => println!("  dt = {dt:.1e}: error {e:.4e}  order {:.3}", (p / e).log2()),
            None => println!("  dt = {dt:.1e}: error {e:.4e}"),
        }
        prev = Some(e);
    }

    println!("spatial sweep (dt-Richardson pair removes the O(dt) part), T = 0.25:");
    let dt = 1e-3;
    let mut prev: Option<f64> = None;
    for &n in &[51usize, 101, 201] {
        let a = run(n, dt, 0.25);
        let b = run(n, dt / 2.0, 0.25);
        let extrap = StateField {
            u: a.u.iter().zip(&b.u).map(|(x, y)| 2.0 * y - x).collect(),
            v: a.v.iter().zip(&b.v).map(|(x, y)| 2.0 * y - x).collect(),
        };
        let e = error(&extrap, n, 0.25);
        match prev {
            Some(p) => println!("  n = {n:>3}: error {e:.4e}  order {:.3}", (p / e).log2()),
            None => println!("  n = {n:>3}: error {e:.4e}"),
        }
        prev = Some(e);
    }
}
