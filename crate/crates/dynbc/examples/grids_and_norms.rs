//! Grids, the weighted measure dμ = dx ⊕ dS/b, and the product norms.
//!
//! Run: cargo run --example grids_and_norms

use dynbc::grid::{
    build_interval_grid, build_rectangle_grid, gradient, trace, w1p_norm, x_norm, BProfile,
    Exponent, LowerOrder, StateField,
};

fn main() {
    let interval = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    println!("interval (0,1), 101 nodes:");
    println!("  |Omega| = {:.12}", interval.omega());
    println!("  lambda  = {:.12}  (1/integral of 1/b over Gamma)", interval.lambda());

    let square = build_rectangle_grid(9, 5, (2.0, 1.0), &BProfile::Const(2.0)).unwrap();
    println!("rectangle 2x1, 9x5 nodes, b = 2:");
    println!("  |Omega| = {:.12}", square.omega());
    println!("  lambda  = {:.12}", square.lambda());

    // norms of u = 2, v = 2 in X^{2,2}: 2 + 2*sqrt(2)
    let two = StateField::from_fn(&interval, |_| 2.0);
    println!(
        "constant state 2: |U|_X2 = {:.12} (analytic {:.12})",
        x_norm(&two, 2.0.into(), 2.0.into(), &interval),
        2.0 + 2.0 * 2.0f64.sqrt()
    );
    println!(
        "                  |U|_Xinf = {}",
        x_norm(&two, Exponent::Inf, Exponent::Inf, &interval)
    );

    // W^{1,p} equivalent norms of u = x
    let linear: Vec<f64> = (0..interval.n_nodes()).map(|i| interval.coords(i)[0]).collect();
    println!(
        "u = x: |grad u|_2 + |u|_L2 = {:.8} (analytic 1 + 1/sqrt(3) = {:.8})",
        w1p_norm(&linear, 2.0, &interval, LowerOrder::Volume { s: 2.0 }),
        1.0 + (1.0f64 / 3.0).sqrt()
    );
    println!(
        "u = x: |grad u|_3 + boundary l (s=1) = {:.8} (analytic 2)",
        w1p_norm(&linear, 3.0, &interval, LowerOrder::Boundary { s: 1.0 })
    );

    // trace and nodal gradient
    let tr = trace(&linear, &interval);
    println!("trace of u = x: {tr:?}");
    let sin: Vec<f64> = (0..interval.n_nodes())
        .map(|i| (std::f64::consts::PI * interval.coords(i)[0]).sin())
        .collect();
    let grads = gradient(&sin, &interval);
    let mid = interval.n_nodes() / 2;
    println!(
        "d/dx sin(pi x) at x = 0.5: {:.6} (analytic 0), at x = 0: {:.6} (analytic pi = {:.6})",
        grads[mid][0],
        grads[0][0],
        std::f64::consts::PI
    );
}
