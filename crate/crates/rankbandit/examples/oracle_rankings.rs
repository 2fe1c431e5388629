//! Exact optimal rankings for an instance: per-type optima (personalized
//! treatment), the shared optimum for utilitarian and Nash collective
//! utilities, and the value gap that separates the optimum from the
//! runner-up.
//!
//! Run with `cargo run --example oracle_rankings`.

use rankbandit::harness::solve_oracle;
use rankbandit::{cuf_value, fixtures, UtilityFunction};

fn main() {
    let instance = fixtures::two_type_ads();

    for (name, utility) in [
        ("utilitarian", UtilityFunction::Utilitarian),
        ("nash", UtilityFunction::nash()),
    ] {
        let oracle = solve_oracle(&instance, utility).unwrap();
        println!("collective utility: {name}");
        for (i, solution) in oracle.personalized_optima.iter().enumerate() {
            println!(
                "  type {i} optimum: arms {} (expected value {:.6})",
                solution.perm, solution.value
            );
        }
        println!(
            "  shared optimum:  arms {} (collective value {:.6}, runner-up gap {})",
            oracle.equal_optimum.perm,
            oracle.equal_optimum.value,
            oracle
                .gap
                .map(|g| format!("{g:.6}"))
                .unwrap_or_else(|| "n/a".into())
        );
        // The shared optimum trades the two types off against each other.
        for (i, solution) in oracle.personalized_optima.iter().enumerate() {
            let collectively = cuf_value(&instance, utility, &solution.perm);
            println!("  type {i}'s favorite ranking scores {collectively:.6} collectively");
        }
        println!();
    }
}
