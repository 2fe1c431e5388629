//! Races the ranking policies against the oracle, a uniform-random
//! control, and the single-type baseline on the two-user-type ads
//! fixture, printing cumulative regret and optimal-action rates.
//!
//! Run with `cargo run --example regret_race`.

use rankbandit::harness::{run, PolicySpec, RunSpec};
use rankbandit::optimizer::OptimizerConfig;
use rankbandit::policies::{PolicyConfig, PolicyFamily, Treatment};
use rankbandit::{fixtures, UtilityFunction};

fn main() {
    let instance = fixtures::two_type_ads();
    let horizon = 50_000u64;
    let checkpoints = vec![5_000, 25_000, 50_000];
    let seeds: Vec<u64> = (0..5).collect();

    let equal = Treatment::Equal {
        utility: UtilityFunction::Utilitarian,
        optimizer: OptimizerConfig::BruteForce,
    };
    let entries: Vec<(&str, PolicySpec)> = vec![
        (
            "pt-greedy",
            PolicySpec::Learned(PolicyConfig {
                family: PolicyFamily::Greedy { epsilon_scale: 0.25 },
                treatment: Treatment::Personalized,
                baseline_single_type: false,
            }),
        ),
        (
            "pt-ucb",
            PolicySpec::Learned(PolicyConfig {
                family: PolicyFamily::Ucb { confidence_scale: 0.25 },
                treatment: Treatment::Personalized,
                baseline_single_type: false,
            }),
        ),
        (
            "et-greedy",
            PolicySpec::Learned(PolicyConfig {
                family: PolicyFamily::Greedy { epsilon_scale: 0.5 },
                treatment: equal.clone(),
                baseline_single_type: false,
            }),
        ),
        (
            "et-ucb",
            PolicySpec::Learned(PolicyConfig {
                family: PolicyFamily::Ucb { confidence_scale: 0.5 },
                treatment: equal,
                baseline_single_type: false,
            }),
        ),
        (
            "single-type",
            PolicySpec::Learned(PolicyConfig {
                family: PolicyFamily::Ucb { confidence_scale: 0.25 },
                treatment: Treatment::Personalized,
                baseline_single_type: true,
            }),
        ),
        ("random", PolicySpec::UniformRandom),
        ("oracle", PolicySpec::Oracle),
    ];

    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>10}",
        "policy", "R(5k)", "R(25k)", "R(50k)", "opt-rate"
    );
    for (id, policy) in entries {
        let mut regrets = [0.0f64; 3];
        let mut rate = 0.0;
        for &seed in &seeds {
            let spec = RunSpec::new(id, policy.clone(), horizon, seed)
                .with_checkpoints(checkpoints.clone());
            let trace = run(&instance, &spec).unwrap();
            for (slot, c) in trace.checkpoints.iter().enumerate() {
                regrets[slot] += c.cumulative_regret / seeds.len() as f64;
            }
            rate += trace.final_checkpoint().optimal_action_rate / seeds.len() as f64;
        }
        println!(
            "{id:<12} {:>12.1} {:>12.1} {:>12.1} {rate:>10.3}",
            regrets[0], regrets[1], regrets[2]
        );
    }
    println!("\n(means over {} seeds; regret uses ground-truth per-round gaps)", seeds.len());
}
