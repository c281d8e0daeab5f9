//! The power ladder Y_k = ∫|U|^{1+p^k} dμ and the convergence of its roots
//! to the sup norm.
//!
//! Run: cargo run --example moser_ladder

use dynbc::diagnostics::norm_ladder;
use dynbc::grid::{build_interval_grid, BProfile, StateField};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let state = StateField::coupled(
        (0..grid.n_nodes()).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        &grid,
    );
    let sup = state.u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    println!("direct sup norm: {sup:.8}");
    println!("{:>3} {:>10} {:>16} {:>14} {:>16}", "k", "m = 2^k", "ln Y_k", "root", "normalized root");
    for rung in norm_ladder(&state, 2.0, 12, &grid) {
        println!(
            "{:>3} {:>10} {:>16.6} {:>14.8} {:>16.8}",
            rung.k, rung.m, rung.log_y, rung.root, rung.normalized_root
        );
    }
    let deepest = norm_ladder(&state, 2.0, 12, &grid).last().unwrap().root;
    println!(
        "deepest root vs sup: relative gap {:.3e}",
        (deepest - sup).abs() / sup
    );
}
