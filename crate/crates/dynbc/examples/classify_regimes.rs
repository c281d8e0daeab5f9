//! Regime classification over a zoo of bulk/boundary reaction pairs.
//!
//! Run: cargo run --example classify_regimes

use dynbc::grid::{build_interval_grid, BProfile};
use dynbc::hypotheses::classify_regime;
use dynbc::nonlin::{FluxSpec, NonlinearitySpec};

fn main() {
    let grid = build_interval_grid(101, 1.0, &BProfile::One).unwrap();
    let flux = FluxSpec::constant(1.0);
    let zoo: Vec<(&str, NonlinearitySpec, NonlinearitySpec)> = vec![
        ("f = u^3, g = u^3", NonlinearitySpec::cubic(), NonlinearitySpec::cubic()),
        (
            "f = u^3, g = -u",
            NonlinearitySpec::cubic(),
            NonlinearitySpec::linear(-1.0),
        ),
        (
            "f = u^3, g = -|u|u",
            NonlinearitySpec::cubic(),
            NonlinearitySpec::power(3.0, -1.0),
        ),
        (
            "f = 4u^3, g = -|u|u",
            NonlinearitySpec::power(4.0, 4.0),
            NonlinearitySpec::power(3.0, -1.0),
        ),
        (
            "f = -u, g = u",
            NonlinearitySpec::linear(-1.0),
            NonlinearitySpec::linear(1.0),
        ),
        (
            "f = -u^3, g = u^5",
            NonlinearitySpec::power(4.0, -1.0),
            NonlinearitySpec::power(6.0, 1.0),
        ),
        (
            "f = u^3, g = -u^5",
            NonlinearitySpec::cubic(),
            NonlinearitySpec::power(6.0, -1.0),
        ),
    ];
    println!("{:<22} {:<28} {:>12}  condition", "pair", "verdict", "margin");
    for (name, f, g) in &zoo {
        match classify_regime(f, g, &flux, &grid) {
            Ok(rep) => println!(
                "{:<22} {:<28} {:>12.4e}  {}",
                name,
                format!("{:?}", rep.verdict),
                rep.margin,
                rep.condition
            ),
            Err(e) => println!("{name:<22} error: {e}"),
        }
    }
}
