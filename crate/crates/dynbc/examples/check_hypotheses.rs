//! Numeric certification of the structural hypotheses for a degenerate flux
//! with competing reactions.
//!
//! Run: cargo run --example check_hypotheses

use dynbc::grid::{build_interval_grid, BProfile};
use dynbc::hypotheses::{check_balance_nb, check_h1, check_h2, check_h3, check_weaker_condition};
use dynbc::nonlin::{FluxSpec, NonlinearitySpec};
use dynbc::poincare::estimate_poincare_constant;

fn main() {
    let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    let flux = FluxSpec::p_laplace(3.0, 1e-8);
    let f = NonlinearitySpec::cubic();
    let g = NonlinearitySpec::linear(-1.0);

    let h1 = check_h1(&flux, 256);
    println!(
        "flux (p = 3): pass = {}  [c1 = {:.4}, coercivity margin {:.2e}, monotonicity min {:.2e}]",
        h1.pass, h1.c1_fit, h1.coercivity_margin, h1.monotonicity_min
    );

    let h2 = check_h2(&f, &g, 257);
    println!(
        "tail monotonicity: pass = {}  [inf f' = {:.3}, inf g' = {:.3}, tail inf g' = {:.3}]",
        h2.pass, h2.inf_f_prime, h2.inf_g_prime, h2.tail_inf_g_prime
    );

    let h3 = check_h3(&f, &g);
    println!(
        "growth: r1 = {}, r2 = {}, envelopes ({:.3}, {:.3}), two-sided g: {}",
        h3.r1, h3.r2, h3.c_f_envelope, h3.c_g_envelope, h3.h3b_g
    );

    let c_b = 1.0 / (grid.omega() * grid.lambda());
    let poincare = estimate_poincare_constant(&grid, 2.0).unwrap();
    let c_tilde = poincare.c * 1.1 * c_b;
    println!(
        "poincare constant {:.6} -> balance constant {:.6}",
        poincare.c, c_tilde
    );

    let nb = check_balance_nb(&f, &g, &flux, c_tilde, c_b, &[]);
    println!(
        "balance: pass = {}, best eps = {:.4e}, asymptotic margin = {:.4}, y0 = {:.3}",
        nb.pass, nb.best_eps, nb.margin, nb.y0
    );

    let weaker = check_weaker_condition(&f, &g, &flux, c_tilde, c_b, &[1.0, 2.0, 4.0, 8.0], 1e6);
    for c in &weaker.per_m {
        println!(
            "all-moments balance m = {:>2}: pass = {}, Q(m) = {:.4e}",
            c.m, c.pass, c.q_deficit
        );
    }
    if let Some(tau) = weaker.tau {
        println!("fitted Q(m) ~ m^tau with tau = {tau:.3}");
    }
}
