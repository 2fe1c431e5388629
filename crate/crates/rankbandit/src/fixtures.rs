//! Ready-made problem instances for examples, benchmarks, and tests.

use crate::environment::RngStream;
use crate::model::{ProblemInstance, RewardModel};

/// Smallest valid instance: one user type, one arm, one position.
pub fn minimal() -> ProblemInstance {
    ProblemInstance {
        num_user_types: 1,
        num_arms: 1,
        num_positions: 1,
        arrival_rates: vec![1.0],
        position_prefs: vec![1.0],
        arm_means: vec![0.5],
        reward_model: RewardModel::Bernoulli,
    }
}

/// Two-user-type search-ads instance (5 arms, 2 positions) with click
/// statistics fitted from a public sponsored-search log: per-gender arm
/// click rates, position bias, and arrival mix.
pub fn two_type_ads() -> ProblemInstance {
    ProblemInstance {
        num_user_types: 2,
        num_arms: 5,
        num_positions: 2,
        arrival_rates: vec![0.52, 0.48],
        position_prefs: vec![
            0.323, 0.677, // type 0
            0.416, 0.584, // type 1
        ],
        arm_means: vec![
            0.357, 0.471, 0.604, 0.808, 0.564, // type 0
            0.247, 0.327, 0.491, 0.49, 0.303, // type 1
        ],
        reward_model: RewardModel::Bernoulli,
    }
}

/// Randomly generated instance with bounded-away-from-zero parameters.
///
/// Arrival rates and position preferences are normalized `1 + U[0,1)`
/// draws (so no entry is vanishingly small and the initialization phase
/// terminates quickly), and arm means are uniform on `[0.35, 0.9]`.
/// Deterministic in `seed`.
pub fn synthetic(
    num_user_types: usize,
    num_arms: usize,
    num_positions: usize,
    seed: u64,
) -> ProblemInstance {
    assert!(num_positions <= num_arms);
    let mut rng = RngStream::from_seed(seed);
    let mut arrival_rates: Vec<f64> = (0..num_user_types).map(|_| 1.0 + rng.next_f64()).collect();
    let total: f64 = arrival_rates.iter().sum();
    for l in &mut arrival_rates {
        *l /= total;
    }
    let mut position_prefs = Vec::with_capacity(num_user_types * num_positions);
    for _ in 0..num_user_types {
        let row: Vec<f64> = (0..num_positions).map(|_| 1.0 + rng.next_f64()).collect();
        let s: f64 = row.iter().sum();
        position_prefs.extend(row.into_iter().map(|v| v / s));
    }
    let arm_means: Vec<f64> = (0..num_user_types * num_arms)
        .map(|_| 0.35 + 0.55 * rng.next_f64())
        .collect();
    let instance = ProblemInstance {
        num_user_types,
        num_arms,
        num_positions,
        arrival_rates,
        position_prefs,
        arm_means,
        reward_model: RewardModel::Bernoulli,
    };
    debug_assert!(instance.is_valid());
    instance
}
