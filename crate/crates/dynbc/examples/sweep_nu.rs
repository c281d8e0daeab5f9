//! Kaplan-Yorke dimension against diffusion: the scaling sweep whose log-log
//! slope probes the nu^{-1/2} law in one space dimension.
//!
//! Run: cargo run --release --example sweep_nu

use dynbc::attractor::{
    chafee_infante_builder, choose_beta, expected_dimension, sweep_nu, LyapunovParams,
};
use dynbc::grid::{build_interval_grid, BProfile};

fn main() {
    let grid = build_interval_grid(129, 1.0, &BProfile::One).unwrap();
    let nu_list = [0.02, 0.01, 0.005, 0.0025];
    let beta = choose_beta(&grid, 0.02, 3);
    let m = (2 + expected_dimension(&grid, 0.0025, beta).ceil() as usize).min(32);
    println!("beta = {beta:.4} (three unstable modes at nu = 0.02), m = {m} tangents");
    let params = LyapunovParams {
        m,
        t_transient: 0.0,
        t_warmup: 10.0,
        t_average: 40.0,
        dt: 1e-2,
        stride: 5,
        seed: 7,
    };
    let rep = sweep_nu(&nu_list, chafee_infante_builder(beta, &grid), &grid, &params);
    println!("{:>8} {:>10} {:>10} {:>10}", "nu", "dimension", "lambda_1", "converged");
    for e in &rep.entries {
        println!(
            "{:>8} {:>10.3} {:>10.4} {:>10}",
            e.nu,
            e.dimension,
            e.exponents.first().cloned().unwrap_or(f64::NAN),
            e.converged
        );
    }
    match rep.slope {
        Some(fit) => println!(
            "log-log slope: {:.3} +/- {:.3} (R2 {:.4}); one-dimensional target -1/2",
            fit.slope,
            rep.slope_ci.unwrap_or(f64::NAN),
            fit.r2
        ),
        None => println!("slope: degenerate (dimension vanished on too many entries)"),
    }
    if rep.partial {
        println!("warning: partial sweep (some entries unusable)");
    }
}
