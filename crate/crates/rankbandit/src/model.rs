//! Ground-truth problem instances, ranking permutations, and collective
//! utility functions, together with the exact (oracle-side) value
//! computations everything else is measured against.
//!
//! An instance describes `N` user types, `M` arms, and `K ≤ M` ranking
//! positions. A user of type `i` arrives with probability `λ_i`, observes
//! exactly one position `k` with probability `ρ_{i,k}` (rows of `ρ` sum
//! to one), and clicks the arm shown there with probability `μ_{i,j}`.
//! All three parameter families are hidden from the learner; this module
//! is the omniscient side used by simulators, oracles, and tests.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Tolerance for probability rows that must sum to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Smallest admissible arm mean. Estimator bounds divide by `min μ`, so
/// exact zeros are rejected at validation.
pub const MIN_ARM_MEAN: f64 = 1e-6;

/// Default clamping floor for the Nash utility's logarithm.
pub const NASH_UTILITY_FLOOR: f64 = 1e-6;

/// Reward distribution attached to a click.
///
/// `Bernoulli` is the canonical model: a click is worth 1. `Beta` keeps
/// the Bernoulli click chain (clicks still drive every counter) but
/// records a `Beta(c·μ, c·(1−μ))` magnitude as the realized reward, which
/// only affects reward curves, never regret accounting or estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewardModel {
    Bernoulli,
    Beta { concentration: f64 },
}

/// A complete ground-truth description of the ranking environment.
///
/// Matrices are stored flat in row-major order: `position_prefs[i * K + k]`
/// is `ρ_{i,k}` and `arm_means[i * M + j]` is `μ_{i,j}`. The JSON encoding
/// uses the same flat layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub num_user_types: usize,
    pub num_arms: usize,
    pub num_positions: usize,
    pub arrival_rates: Vec<f64>,
    pub position_prefs: Vec<f64>,
    pub arm_means: Vec<f64>,
    pub reward_model: RewardModel,
}

impl ProblemInstance {
    /// `ρ_{i,k}`: probability that user type `i` observes position `k`.
    #[inline]
    pub fn rho(&self, user_type: usize, position: usize) -> f64 {
        self.position_prefs[user_type * self.num_positions + position]
    }

    /// `μ_{i,j}`: click probability of arm `j` for user type `i`.
    #[inline]
    pub fn mu(&self, user_type: usize, arm: usize) -> f64 {
        self.arm_means[user_type * self.num_arms + arm]
    }

    /// Row `ρ_i` as a slice of length `K`.
    #[inline]
    pub fn rho_row(&self, user_type: usize) -> &[f64] {
        let k = self.num_positions;
        &self.position_prefs[user_type * k..(user_type + 1) * k]
    }

    /// Row `μ_i` as a slice of length `M`.
    #[inline]
    pub fn mu_row(&self, user_type: usize) -> &[f64] {
        let m = self.num_arms;
        &self.arm_means[user_type * m..(user_type + 1) * m]
    }

    /// Checks every structural invariant and returns the violations found.
    /// An empty list means the instance is well formed. Violations are
    /// data, not faults: callers decide whether to proceed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (n, m, k) = (self.num_user_types, self.num_arms, self.num_positions);
        if n == 0 {
            out.push(Violation::new("num_user_types must be positive"));
        }
        if m == 0 {
            out.push(Violation::new("num_arms must be positive"));
        }
        if k == 0 {
            out.push(Violation::new("num_positions must be positive"));
        }
        if k > m {
            out.push(Violation::new(format!(
                "num_positions {k} exceeds num_arms {m}"
            )));
        }
        if self.arrival_rates.len() != n {
            out.push(Violation::new(format!(
                "arrival_rates has length {} but num_user_types is {n}",
                self.arrival_rates.len()
            )));
        } else {
            let total: f64 = self.arrival_rates.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                out.push(Violation::new(format!("arrival_rates sum to {total}")));
            }
            for (i, &l) in self.arrival_rates.iter().enumerate() {
                if !(0.0..=1.0).contains(&l) || !l.is_finite() {
                    out.push(Violation::new(format!("arrival_rates[{i}] = {l} out of [0,1]")));
                }
            }
        }
        if self.position_prefs.len() != n * k {
            out.push(Violation::new(format!(
                "position_prefs has length {} but expected {}",
                self.position_prefs.len(),
                n * k
            )));
        } else {
            for i in 0..n {
                let row = &self.position_prefs[i * k..(i + 1) * k];
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > SUM_TOLERANCE {
                    out.push(Violation::new(format!(
                        "position_prefs row {i} sums to {total}"
                    )));
                }
                for (p, &v) in row.iter().enumerate() {
                    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                        out.push(Violation::new(format!(
                            "position_prefs[{i},{p}] = {v} out of [0,1]"
                        )));
                    }
                }
            }
        }
        if self.arm_means.len() != n * m {
            out.push(Violation::new(format!(
                "arm_means has length {} but expected {}",
                self.arm_means.len(),
                n * m
            )));
        } else {
            for i in 0..n {
                for j in 0..m {
                    let v = self.arm_means[i * m + j];
                    if !(MIN_ARM_MEAN..=1.0).contains(&v) || !v.is_finite() {
                        out.push(Violation::new(format!(
                            "arm_means[{i},{j}] = {v} out of [{MIN_ARM_MEAN},1]"
                        )));
                    }
                }
            }
        }
        if let RewardModel::Beta { concentration } = self.reward_model {
            if !(concentration > 0.0) || !concentration.is_finite() {
                out.push(Violation::new(format!(
                    "beta reward concentration {concentration} must be positive"
                )));
            }
        }
        out
    }

    /// True when [`validate`](Self::validate) reports nothing.
    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// One violated instance invariant, with enough context to locate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub message: String,
}

impl Violation {
    fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Error returned when constructing a [`Permutation`] from untrusted slots.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("slot {position} holds arm {arm}, but only {num_arms} arms exist")]
    ArmOutOfRange { position: usize, arm: usize, num_arms: usize },
    #[error("arm {arm} appears in more than one slot")]
    DuplicateArm { arm: usize },
    #[error("permutation must fill at least one slot")]
    Empty,
}

/// An injective assignment of `K` ranking positions to `K` distinct arms.
///
/// `slots[k]` is the arm displayed at position `k` (the map `σ⁻¹`);
/// [`position_of`](Self::position_of) recovers the forward map `σ(j)`.
/// Ordering is lexicographic on `slots`, which is the tie-break order
/// used everywhere in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    slots: Vec<usize>,
}

impl Permutation {
    /// Validates distinctness and range before accepting the slots.
    pub fn new(slots: Vec<usize>, num_arms: usize) -> Result<Self, PermutationError> {
        if slots.is_empty() {
            return Err(PermutationError::Empty);
        }
        let mut seen = vec![false; num_arms];
        for (position, &arm) in slots.iter().enumerate() {
            if arm >= num_arms {
                return Err(PermutationError::ArmOutOfRange { position, arm, num_arms });
            }
            if seen[arm] {
                return Err(PermutationError::DuplicateArm { arm });
            }
            seen[arm] = true;
        }
        Ok(Self { slots })
    }

    /// Constructor for slots that are distinct by construction (enumeration,
    /// unranking, sort-match). Checked only in debug builds.
    pub(crate) fn from_trusted(slots: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = slots.clone();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        });
        Self { slots }
    }

    /// Arm displayed at position `k`.
    #[inline]
    pub fn arm_at(&self, position: usize) -> usize {
        self.slots[position]
    }

    /// The full `σ⁻¹` map: `slots()[k]` is the arm at position `k`.
    #[inline]
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Number of filled positions (`K`).
    #[inline]
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Forward map `σ(j)`: the position of arm `j`, if displayed.
    pub fn position_of(&self, arm: usize) -> Option<usize> {
        self.slots.iter().position(|&a| a == arm)
    }

    /// Whether arm `j` is part of the displayed set `M_σ`.
    pub fn contains(&self, arm: usize) -> bool {
        self.slots.contains(&arm)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, arm) in self.slots.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{arm}")?;
        }
        write!(f, "]")
    }
}

/// Utility transform `f` applied to per-type user values inside the
/// collective utility function.
///
/// `Utilitarian` is the identity; `Nash` is `ln(max(x, u_floor))`. The
/// floor keeps the logarithm finite for never-clicked rankings; clamped
/// values are documented behavior, not a fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UtilityFunction {
    Utilitarian,
    Nash { u_floor: f64 },
}

impl UtilityFunction {
    /// Nash utility with the default floor.
    pub fn nash() -> Self {
        UtilityFunction::Nash { u_floor: NASH_UTILITY_FLOOR }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            UtilityFunction::Utilitarian => x,
            UtilityFunction::Nash { u_floor } => x.max(u_floor).ln(),
        }
    }

    /// Declared bi-Lipschitz constant on `[lo, 1]` with `lo > 0`:
    /// `(x₂−x₁)/L ≤ f(x₂)−f(x₁) ≤ L·(x₂−x₁)` for `x₁ ≤ x₂` in the interval.
    pub fn lipschitz_on(&self, lo: f64) -> f64 {
        match *self {
            UtilityFunction::Utilitarian => 1.0,
            UtilityFunction::Nash { u_floor } => 1.0 / lo.max(u_floor).min(1.0),
        }
    }

    /// `f(1)`, the largest utility a single user value can contribute.
    pub fn at_one(&self) -> f64 {
        self.apply(1.0)
    }
}

/// Expected value a user of type `i` derives from ranking `σ`:
/// `Γ_i(σ) = Σ_k ρ_{i,k} · μ_{i,slots[k]}`.
///
/// Faults on an out-of-range user type or arm index.
pub fn expected_user_value(instance: &ProblemInstance, user_type: usize, perm: &Permutation) -> f64 {
    assert!(user_type < instance.num_user_types, "user type {user_type} out of range");
    let mut value = 0.0;
    for (k, &arm) in perm.slots().iter().enumerate() {
        value += instance.rho(user_type, k) * instance.mu(user_type, arm);
    }
    value
}

/// Ground-truth collective utility of ranking `σ`:
/// `Γ(σ) = Σ_i λ_i · f(Γ_i(σ))`.
pub fn cuf_value(instance: &ProblemInstance, utility: UtilityFunction, perm: &Permutation) -> f64 {
    let mut total = 0.0;
    for i in 0..instance.num_user_types {
        total += instance.arrival_rates[i] * utility.apply(expected_user_value(instance, i, perm));
    }
    total
}
