//! The discrete operator B_p: strong rows, exact duality against its energy
//! form, monotonicity and coercivity probes.
//!
//! Run: cargo run --example operator_checks

use dynbc::grid::{build_interval_grid, BProfile, StateField};
use dynbc::nonlin::FluxSpec;
use dynbc::operator::{assemble_bp, bp_form, coercivity_probe, monotonicity_check, x2_pairing};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    let flux = FluxSpec::p_laplace(3.0, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let state = StateField::coupled(
        (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        &grid,
    );
    let bp = assemble_bp(&state, &flux, &grid);

    // summation-by-parts duality against 100 random test states
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let w = StateField::coupled(
            (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            &grid,
        );
        let lhs = x2_pairing(&bp, &w, &grid);
        let rhs = bp_form(&state.u, &w.u, &flux, &grid);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    println!("duality <B_p U, W> = B~(U, W): worst relative defect {worst:.2e}");

    // monotonicity over random pairs at several p
    for &p in &[2.0, 3.0, 4.0] {
        let fx = FluxSpec::p_laplace(p, 1e-8);
        let mut min_pairing = f64::INFINITY;
        for _ in 0..300 {
            let a = StateField::coupled(
                (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                &grid,
            );
            let b = StateField::coupled(
                (0..grid.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                &grid,
            );
            min_pairing = min_pairing.min(monotonicity_check(&a, &b, &fx, &grid));
        }
        println!("monotonicity, p = {p}: min pairing over 300 pairs = {min_pairing:.3e}");
    }

    // coercivity: the form/norm ratio grows like c^{p-1}
    let probe = StateField::from_fn(&grid, |x| (2.0 * x[0]).sin());
    let table = coercivity_probe(&probe, &flux, &grid, &[1.0, 10.0, 100.0]).unwrap();
    println!("coercivity ratios for p = 3 (expected growth ~ scale^2):");
    for (c, r) in table {
        println!("  scale {c:>5}: B~(cU,cU)/|cU|_Vp = {r:.4e}");
    }
}
