//! Experiment harness: oracle solutions, the full interaction loop with
//! ground-truth regret accounting, and trace emission.
//!
//! Regret is accumulated from ground-truth per-round gaps rather than
//! realized rewards: the personalized notion charges
//! `Γ_{I(s)}(σ*_{I(s)}) − Γ_{I(s)}(σ_s)` against the arrived type's own
//! optimum, the equal-treatment notion charges `Γ(σ*) − Γ(σ_s)` against
//! the shared optimum. Gaps are deterministic given the decision, so
//! traces are monotone and reproducible per `(seed, policy, instance)`.

use crate::environment::{derive_seed, sample_arrival, step, RngStream};
use crate::model::{cuf_value, expected_user_value, Permutation, ProblemInstance, UtilityFunction};
use crate::optimizer::{
    enumerate_permutations, permutation_count, unrank_permutation, OptimizeError,
    DEFAULT_ENUMERATION_CAP,
};
use crate::policies::{personalized_rank, PolicyConfig, PolicyState};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::time::Instant;

/// A permutation together with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSolution {
    pub perm: Permutation,
    pub value: f64,
}

/// Optimal actions for both treatment notions on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// `σ*_i` per user type, by sort-match on the true parameters.
    pub personalized_optima: Vec<RankedSolution>,
    /// `σ*`, maximizer of the true collective utility.
    pub equal_optimum: RankedSolution,
    /// Gap between the optimum and the best distinct permutation; `None`
    /// when the search space has a single point.
    pub gap: Option<f64>,
}

/// Per-type optima via sort-match on the ground truth. Always feasible.
pub fn solve_personalized(instance: &ProblemInstance) -> Vec<RankedSolution> {
    (0..instance.num_user_types)
        .map(|i| {
            let perm = personalized_rank(
                instance.rho_row(i),
                instance.mu_row(i),
                instance.num_positions,
            );
            let value = expected_user_value(instance, i, &perm);
            RankedSolution { perm, value }
        })
        .collect()
}

/// Equal-treatment optimum and the CUF gap to the runner-up, by full
/// enumeration. Errors when the space exceeds `cap`.
pub fn solve_equal(
    instance: &ProblemInstance,
    utility: UtilityFunction,
    cap: u64,
) -> Result<(RankedSolution, Option<f64>), OptimizeError> {
    let (m, k) = (instance.num_arms, instance.num_positions);
    let mut iter = enumerate_permutations(m, k, cap)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut second = f64::NEG_INFINITY;
    while let Some(slots) = iter.advance() {
        let perm = Permutation::from_trusted(slots.to_vec());
        let value = cuf_value(instance, utility, &perm);
        match &mut best {
            None => best = Some((value, slots.to_vec())),
            Some((bv, bs)) => {
                if value > *bv {
                    second = *bv;
                    *bv = value;
                    bs.clear();
                    bs.extend_from_slice(slots);
                } else if value > second {
                    second = value;
                }
            }
        }
    }
    let (value, slots) = best.expect("non-empty search space");
    let gap = second.is_finite().then(|| value - second);
    Ok((RankedSolution { perm: Permutation::from_trusted(slots), value }, gap))
}

/// Both notions' optima. The sort-match personalized optima are
/// cross-checked against per-type brute force whenever enumeration is
/// feasible.
pub fn solve_oracle(
    instance: &ProblemInstance,
    utility: UtilityFunction,
) -> Result<OracleSolution, OptimizeError> {
    let personalized_optima = solve_personalized(instance);
    let (m, k) = (instance.num_arms, instance.num_positions);
    if permutation_count(m, k) <= DEFAULT_ENUMERATION_CAP as u128 {
        for (i, solution) in personalized_optima.iter().enumerate() {
            let mut iter = enumerate_permutations(m, k, DEFAULT_ENUMERATION_CAP)?;
            let mut best = f64::NEG_INFINITY;
            while let Some(slots) = iter.advance() {
                let perm = Permutation::from_trusted(slots.to_vec());
                best = best.max(expected_user_value(instance, i, &perm));
            }
            assert!(
                (best - solution.value).abs() <= 1e-12 * best.abs().max(1.0),
                "sort-match optimum {} disagrees with brute force {best} for type {i}",
                solution.value
            );
        }
    }
    let (equal_optimum, gap) = solve_equal(instance, utility, DEFAULT_ENUMERATION_CAP)?;
    Ok(OracleSolution { personalized_optima, equal_optimum, gap })
}

/// Which per-round gap a run accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegretNotion {
    Personalized,
    Equal { utility: UtilityFunction },
}

/// What plays the rounds: a learning policy or one of the controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    /// A live greedy/UCB policy.
    Learned(PolicyConfig),
    /// Plays the relevant optimum every round (zero-regret control).
    Oracle,
    /// Plays a uniformly random permutation every round (linear-regret
    /// control).
    UniformRandom,
    /// Plays one fixed permutation every round.
    Fixed { slots: Vec<usize> },
}

impl PolicySpec {
    /// The regret notion a learned policy is scored under; controls
    /// default to personalized and may be overridden in [`RunSpec`].
    pub fn default_notion(&self) -> RegretNotion {
        match self {
            PolicySpec::Learned(config) => match &config.treatment {
                crate::policies::Treatment::Personalized => RegretNotion::Personalized,
                crate::policies::Treatment::Equal { utility, .. } => {
                    RegretNotion::Equal { utility: *utility }
                }
            },
            _ => RegretNotion::Personalized,
        }
    }
}

/// When to record checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckpointSchedule {
    /// Powers of two up to the horizon, plus the horizon itself — the
    /// layout sublinearity ratios need.
    #[default]
    Geometric,
    Explicit { at: Vec<u64> },
}

impl CheckpointSchedule {
    /// Sorted, deduplicated checkpoint rounds, always ending at `t_max`.
    pub fn materialize(&self, t_max: u64) -> Vec<u64> {
        let mut at = match self {
            CheckpointSchedule::Geometric => {
                let mut at = Vec::new();
                let mut t = 1u64;
                while t <= t_max {
                    at.push(t);
                    t = t.saturating_mul(2);
                }
                at
            }
            CheckpointSchedule::Explicit { at } => {
                at.iter().copied().filter(|&t| t >= 1 && t <= t_max).collect()
            }
        };
        at.push(t_max);
        at.sort_unstable();
        at.dedup();
        at
    }
}

/// One recorded point of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub cumulative_regret: f64,
    pub cumulative_reward: f64,
    pub wall_clock_s: f64,
    /// Fraction of rounds so far whose decision equaled the relevant
    /// optimum.
    pub optimal_action_rate: f64,
}

/// Checkpointed trajectory of one `(policy, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub policy_id: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl RegretTrace {
    pub fn checkpoint_at(&self, t: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.t == t)
    }

    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("runs record at least the horizon checkpoint")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("oracle: {0}")]
    Oracle(#[from] OptimizeError),
    #[error("fixed-permutation control: {0}")]
    BadFixedPermutation(#[from] crate::model::PermutationError),
    #[error("the uniform-random control cannot sample a space of {0} permutations")]
    RandomControlSpaceTooLarge(u128),
}

/// Fully specified run: one policy, one seed, one horizon.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub policy_id: String,
    pub policy: PolicySpec,
    pub notion: RegretNotion,
    pub horizon: u64,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
}

impl RunSpec {
    pub fn new(policy_id: impl Into<String>, policy: PolicySpec, horizon: u64, seed: u64) -> Self {
        let notion = policy.default_notion();
        Self {
            policy_id: policy_id.into(),
            policy,
            notion,
            horizon,
            seed,
            checkpoints: CheckpointSchedule::Geometric.materialize(horizon),
        }
    }

    pub fn with_notion(mut self, notion: RegretNotion) -> Self {
        self.notion = notion;
        self
    }

    pub fn with_checkpoints(mut self, at: Vec<u64>) -> Self {
        self.checkpoints = CheckpointSchedule::Explicit { at }.materialize(self.horizon);
        self
    }
}

enum Actor {
    Learned(PolicyState),
    Oracle,
    UniformRandom { space: u128, rng: RngStream },
    Fixed(Permutation),
}

/// Runs the full arrival → decide → step → record loop and returns the
/// checkpointed trace.
///
/// The run seed is split into independent environment and policy streams,
/// so two policies given the same seed face identical arrival and click
/// randomness.
pub fn run(instance: &ProblemInstance, spec: &RunSpec) -> Result<RegretTrace, RunError> {
    assert!(spec.horizon >= 1);
    let (n, m, k) = (instance.num_user_types, instance.num_arms, instance.num_positions);
    let personalized_optima = solve_personalized(instance);
    let equal_optimum = match spec.notion {
        RegretNotion::Personalized => None,
        RegretNotion::Equal { utility } => {
            Some(solve_equal(instance, utility, DEFAULT_ENUMERATION_CAP)?.0)
        }
    };

    let env_seed = derive_seed(spec.seed, 0);
    let policy_seed = derive_seed(spec.seed, 1);
    let mut env_rng = RngStream::from_seed(env_seed);
    let mut actor = match &spec.policy {
        PolicySpec::Learned(config) => {
            Actor::Learned(PolicyState::new(config.clone(), n, m, k, policy_seed))
        }
        PolicySpec::Oracle => Actor::Oracle,
        PolicySpec::UniformRandom => {
            let space = permutation_count(m, k);
            Actor::UniformRandom { space, rng: RngStream::from_seed(policy_seed) }
        }
        PolicySpec::Fixed { slots } => Actor::Fixed(Permutation::new(slots.clone(), m)?),
    };

    let start = Instant::now();
    let mut cumulative_regret = 0.0;
    let mut cumulative_reward = 0.0;
    let mut optimal_rounds = 0u64;
    let mut checkpoints = Vec::with_capacity(spec.checkpoints.len());
    let mut next_checkpoint = 0usize;

    for s in 1..=spec.horizon {
        let user_type = sample_arrival(instance, &mut env_rng);
        let perm = match &mut actor {
            Actor::Learned(policy) => policy.decide(user_type, s),
            Actor::Oracle => match spec.notion {
                RegretNotion::Personalized => personalized_optima[user_type].perm.clone(),
                RegretNotion::Equal { .. } => equal_optimum.as_ref().unwrap().perm.clone(),
            },
            Actor::UniformRandom { space, rng } => {
                Permutation::from_trusted(unrank_permutation(rng.below_u128(*space), m, k))
            }
            Actor::Fixed(perm) => perm.clone(),
        };
        let feedback = step(instance, user_type, &perm, &mut env_rng);
        if let Actor::Learned(policy) = &mut actor {
            policy.observe(user_type, &perm, &feedback);
        }

        let (gap, is_optimal) = match spec.notion {
            RegretNotion::Personalized => {
                let opt = &personalized_optima[user_type];
                (opt.value - expected_user_value(instance, user_type, &perm), perm == opt.perm)
            }
            RegretNotion::Equal { utility } => {
                let opt = equal_optimum.as_ref().unwrap();
                (opt.value - cuf_value(instance, utility, &perm), perm == opt.perm)
            }
        };
        // The optimum is a max over the same arithmetic, so gaps are
        // nonnegative up to ties that round the other way by one ulp.
        debug_assert!(gap > -1e-9, "negative ground-truth gap {gap}");
        cumulative_regret += gap.max(0.0);
        cumulative_reward += feedback.reward_value;
        optimal_rounds += is_optimal as u64;

        while next_checkpoint < spec.checkpoints.len() && spec.checkpoints[next_checkpoint] == s {
            checkpoints.push(Checkpoint {
                t: s,
                cumulative_regret,
                cumulative_reward,
                wall_clock_s: start.elapsed().as_secs_f64(),
                optimal_action_rate: optimal_rounds as f64 / s as f64,
            });
            next_checkpoint += 1;
        }
    }
    Ok(RegretTrace { policy_id: spec.policy_id.clone(), seed: spec.seed, checkpoints })
}

/// Mean regret growth ratio `R(t2)/R(t1)` across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub t1: u64,
    pub t2: u64,
    /// `None` when every trace was excluded.
    pub mean_ratio: Option<f64>,
    pub used: usize,
    /// Traces with `R(t1) = 0`, excluded from the mean.
    pub excluded: usize,
}

/// Computes the sublinearity diagnostic over a set of traces: sublinear
/// regret keeps the ratio strictly below `t2/t1`; linear regret pins it
/// there.
pub fn sublinearity_check(traces: &[RegretTrace], t1: u64, t2: u64) -> RatioStats {
    let mut used = 0usize;
    let mut excluded = 0usize;
    let mut total = 0.0;
    for trace in traces {
        let a = trace
            .checkpoint_at(t1)
            .unwrap_or_else(|| panic!("trace {} has no checkpoint at {t1}", trace.policy_id));
        let b = trace
            .checkpoint_at(t2)
            .unwrap_or_else(|| panic!("trace {} has no checkpoint at {t2}", trace.policy_id));
        if a.cumulative_regret == 0.0 {
            excluded += 1;
        } else {
            total += b.cumulative_regret / a.cumulative_regret;
            used += 1;
        }
    }
    RatioStats {
        t1,
        t2,
        mean_ratio: (used > 0).then(|| total / used as f64),
        used,
        excluded,
    }
}

/// Formats a float at ten significant digits.
pub fn format_sig10(x: f64) -> String {
    format!("{x:.9e}")
}

/// Writes traces as CSV, one row per checkpoint, sorted by
/// `(policy_id, seed, t)`. Floats carry ten significant digits;
/// `wall_clock_s` is the only nondeterministic column.
pub fn write_csv<W: Write>(traces: &[RegretTrace], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "policy_id,seed,t,cumulative_regret,cumulative_reward,optimal_action_rate,wall_clock_s"
    )?;
    let mut order: Vec<&RegretTrace> = traces.iter().collect();
    order.sort_by(|a, b| a.policy_id.cmp(&b.policy_id).then(a.seed.cmp(&b.seed)));
    for trace in order {
        for c in &trace.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                trace.policy_id,
                trace.seed,
                c.t,
                format_sig10(c.cumulative_regret),
                format_sig10(c.cumulative_reward),
                format_sig10(c.optimal_action_rate),
                format_sig10(c.wall_clock_s)
            )?;
        }
    }
    Ok(())
}

pub fn csv_to_string(traces: &[RegretTrace]) -> String {
    let mut buf = Vec::new();
    write_csv(traces, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}
