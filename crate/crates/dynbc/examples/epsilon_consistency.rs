//! Consistency of the regularised scheme a_eps(s) = a(s + eps) as eps -> 0
//! for a degenerate p = 3 run: the solution gaps are Cauchy in eps.
//!
//! Run: cargo run --release --example epsilon_consistency

use dynbc::grid::{build_interval_grid, x2_norm, BProfile, StateField};
use dynbc::nonlin::{FluxSpec, NonlinearitySpec};
use dynbc::stepper::{simulate, SolverConfig};
use std::f64::consts::PI;

fn main() {
    let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    let u0 = StateField::from_fn(&grid, |x| (PI * x[0]).sin() + 0.2);
    let run = |eps: f64| {
        let cfg = SolverConfig::new(
            FluxSpec::p_laplace(3.0, eps),
            NonlinearitySpec::cubic(),
            NonlinearitySpec::cubic(),
        )
        .fixed_dt(2e-3)
        .with_snapshot_stride(0);
        simulate(&u0, 1.0, &cfg, &grid).final_state().clone()
    };
    let epses = [1e-2, 1e-4, 1e-6, 1e-8];
    let states: Vec<StateField> = epses.iter().map(|&e| run(e)).collect();
    println!("gaps |U_eps1(1) - U_eps2(1)|_X2 between consecutive regularisations:");
    for k in 0..states.len() - 1 {
        let diff = StateField {
            u: states[k].u.iter().zip(&states[k + 1].u).map(|(a, b)| a - b).collect(),
            v: states[k].v.iter().zip(&states[k + 1].v).map(|(a, b)| a - b).collect(),
        };
        println!(
            "  eps {:>7.0e} vs {:>7.0e}: {:.6e}",
            epses[k],
            epses[k + 1],
            x2_norm(&diff, &grid)
        );
    }
}
