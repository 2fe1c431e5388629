//! Watches the position-preference and arm-mean estimators converge
//! under a fixed round-robin display schedule, where every arm visits
//! every position and the normalization that cancels the arm mean can be
//! seen doing its job.
//!
//! Run with `cargo run --example estimator_convergence`.

use rankbandit::estimators::LearnerState;
use rankbandit::policies::init_permutation;
use rankbandit::{environment, fixtures, RngStream};

fn main() {
    let instance = fixtures::two_type_ads();
    let (n, m, k) = (
        instance.num_user_types,
        instance.num_arms,
        instance.num_positions,
    );
    let mut rng = RngStream::from_seed(17);
    let mut state = LearnerState::new(n, m, k);

    println!("{:>8} {:>12} {:>12} {:>12}", "round", "max |dρ|", "max |dμ|", "max |dλ|");
    let horizon = 100_000u64;
    for t in 0..horizon {
        let user_type = environment::sample_arrival(&instance, &mut rng);
        let perm = init_permutation(t, m, k);
        let feedback = environment::step(&instance, user_type, &perm, &mut rng);
        state.record(user_type, &perm, &feedback);

        let round = t + 1;
        if round.is_power_of_two() && round >= 256 || round == horizon {
            let mut rho_err = 0.0f64;
            let mut mu_err = 0.0f64;
            for i in 0..n {
                for p in 0..k {
                    rho_err = rho_err.max((state.position_pref_row(i)[p] - instance.rho(i, p)).abs());
                }
                for j in 0..m {
                    mu_err = mu_err.max((state.estimate_arm_mean(i, j) - instance.mu(i, j)).abs());
                }
            }
            let lambda_err = state
                .estimate_arrival_rates()
                .iter()
                .zip(&instance.arrival_rates)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            println!("{round:>8} {rho_err:>12.4} {mu_err:>12.4} {lambda_err:>12.4}");
        }
    }
    println!(
        "\ninitialized (all {}*{}*{} cells clicked): {}",
        n,
        m,
        k,
        state.initialized()
    );
}
