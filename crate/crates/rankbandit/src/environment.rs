//! Stochastic simulator for the agent–user interaction protocol.
//!
//! Each round: a user type arrives according to `λ`, the caller shows a
//! permutation, the user observes exactly one position drawn from `ρ_i`
//! (the rows are normalized, so `ρ_i` is a categorical distribution),
//! and clicks the arm there with probability `μ_{i,j}`. The learner sees
//! the binary reward and, only on a click, which arm was clicked. When
//! nothing is clicked the observed position is never revealed.
//!
//! All randomness flows through [`RngStream`], a ChaCha-based stream with
//! an explicit 53-bit uniform mapping, so identical seeds reproduce
//! identical draw sequences across platforms and runs.

use crate::model::{Permutation, ProblemInstance, RewardModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a stream index.
///
/// Used for the `run seed = hash(base_seed, run_index)` convention and to
/// split one run seed into environment and policy streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Seeded, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        rand::RngCore::next_u64(&mut self.rng)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index draw from an unnormalized nonnegative weight vector via
    /// inverse CDF. Falls back to the last index on accumulated rounding.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        debug_assert!(!weights.is_empty());
        let total: f64 = weights.iter().sum();
        let mut u = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Unbiased uniform draw in `[0, n)` by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is empty");
        let rem = ((u64::MAX % n) + 1) % n;
        let zone = u64::MAX - rem;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Unbiased uniform draw in `[0, n)` for 128-bit ranges.
    pub fn below_u128(&mut self, n: u128) -> u128 {
        assert!(n > 0, "below_u128(0) is empty");
        if n <= u64::MAX as u128 {
            return self.below(n as u64) as u128;
        }
        let rem = ((u128::MAX % n) + 1) % n;
        let zone = u128::MAX - rem;
        loop {
            let x = ((self.next_u64() as u128) << 64) | self.next_u64() as u128;
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Beta-distributed draw, used for the optional graded reward mode.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        rand_distr::Beta::new(alpha, beta)
            .expect("beta parameters must be positive")
            .sample(&mut self.rng)
    }
}

/// One round of feedback, as visible to the learner.
///
/// `reward == 1` if and only if `clicked_arm` is present, and the clicked
/// arm is always a member of the displayed permutation. `reward_value` is
/// the realized reward magnitude: equal to `reward` under the Bernoulli
/// model, and a Beta draw on clicks under [`RewardModel::Beta`] (used for
/// reward curves only — counters and regret always follow the click).
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub user_type: usize,
    pub reward: u8,
    pub clicked_arm: Option<usize>,
    pub reward_value: f64,
}

/// Draws an arriving user type: `i` with probability `λ_i`.
pub fn sample_arrival(instance: &ProblemInstance, rng: &mut RngStream) -> usize {
    rng.categorical(&instance.arrival_rates)
}

/// Plays one round of the interaction protocol for a displayed permutation.
///
/// Exactly one position is observed, drawn from `ρ_i`; the arm there is
/// clicked with probability `μ_{i,j}`. When the reward is zero the caller
/// learns nothing about which position was observed.
pub fn step(
    instance: &ProblemInstance,
    user_type: usize,
    perm: &Permutation,
    rng: &mut RngStream,
) -> Feedback {
    assert!(user_type < instance.num_user_types, "user type {user_type} out of range");
    assert!(
        perm.len() == instance.num_positions,
        "permutation fills {} slots but the instance has {} positions",
        perm.len(),
        instance.num_positions
    );
    let observed = rng.categorical(instance.rho_row(user_type));
    let arm = perm.arm_at(observed);
    assert!(arm < instance.num_arms, "arm {arm} out of range");
    let clicked = rng.bernoulli(instance.mu(user_type, arm));
    if clicked {
        let value = match instance.reward_model {
            RewardModel::Bernoulli => 1.0,
            RewardModel::Beta { concentration } => {
                let mu = instance.mu(user_type, arm);
                rng.beta(concentration * mu, concentration * (1.0 - mu))
            }
        };
        Feedback { user_type, reward: 1, clicked_arm: Some(arm), reward_value: value }
    } else {
        Feedback { user_type, reward: 0, clicked_arm: None, reward_value: 0.0 }
    }
}

/// Convenience wrapper owning one stream for one simulation run.
#[derive(Debug)]
pub struct Environment<'a> {
    instance: &'a ProblemInstance,
    rng: RngStream,
}

impl<'a> Environment<'a> {
    pub fn new(instance: &'a ProblemInstance, seed: u64) -> Self {
        Self { instance, rng: RngStream::from_seed(seed) }
    }

    pub fn sample_arrival(&mut self) -> usize {
        sample_arrival(self.instance, &mut self.rng)
    }

    pub fn step(&mut self, user_type: usize, perm: &Permutation) -> Feedback {
        step(self.instance, user_type, perm, &mut self.rng)
    }
}
