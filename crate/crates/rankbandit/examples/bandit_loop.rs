//! Minimal end-to-end bandit loop: arrivals, ranking decisions, partial
//! click feedback, and online estimation, all by hand.
//!
//! Run with `cargo run --example bandit_loop`.

use rankbandit::policies::{PolicyConfig, PolicyFamily, PolicyState, Treatment};
use rankbandit::{fixtures, Environment};

fn main() {
    let instance = fixtures::two_type_ads();
    let (n, m, k) = (
        instance.num_user_types,
        instance.num_arms,
        instance.num_positions,
    );

    let config = PolicyConfig {
        family: PolicyFamily::Ucb { confidence_scale: 0.25 },
        treatment: Treatment::Personalized,
        baseline_single_type: false,
    };
    let mut env = Environment::new(&instance, 7);
    let mut policy = PolicyState::new(config, n, m, k, 8);

    let horizon = 50_000u64;
    let mut clicks = 0u64;
    let mut init_end = None;
    for t in 1..=horizon {
        let user_type = env.sample_arrival();
        let ranking = policy.decide(user_type, t);
        let feedback = env.step(user_type, &ranking);
        policy.observe(user_type, &ranking, &feedback);
        clicks += feedback.reward as u64;
        if init_end.is_none() && policy.init_done() {
            init_end = Some(t);
        }
    }

    println!("rounds: {horizon}, clicks: {clicks}");
    println!(
        "initialization (every type/arm/position cell clicked at least once) ended at round {}",
        init_end.map(|t| t.to_string()).unwrap_or_else(|| "never".into())
    );
    println!("\nlearned vs true parameters:");
    let learner = policy.learner();
    for i in 0..n {
        println!("  user type {i}:");
        let rho_hat = learner.position_pref_row(i);
        for p in 0..k {
            println!(
                "    position {p}: preference {:.3} (true {:.3})",
                rho_hat[p],
                instance.rho(i, p)
            );
        }
        for j in 0..m {
            println!(
                "    arm {j}: click rate {:.3} (true {:.3}), effective pulls {:.0}",
                learner.estimate_arm_mean(i, j),
                instance.mu(i, j),
                learner.effective_pulls(i, j)
            );
        }
    }
}
