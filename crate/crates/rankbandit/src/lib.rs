//! Multi-armed-bandit online learning to rank under a position-based
//! click model with multiple user types.
//!
//! Every round a user of a hidden-rate type arrives, the policy shows
//! `K` of `M` arms in ranked positions, the user observes exactly one
//! position (per-type position preferences) and clicks the arm there
//! with the arm's per-type click rate. The learner sees only the binary
//! reward and, on a click, the clicked arm — never which position was
//! observed on a miss.
//!
//! The crate provides:
//!
//! * [`model`] — instances, permutations, utility functions, and exact
//!   value computations;
//! * [`environment`] — the seeded click simulator;
//! * [`estimators`] — counters and the position-preference / arm-mean /
//!   arrival-rate / collective-utility estimators;
//! * [`optimizer`] — exact and sampled argmax over K-permutations;
//! * [`policies`] — greedy and UCB ranking policies, personalized and
//!   equal-treatment, plus the single-type baseline;
//! * [`harness`] — oracles, regret accounting, seeded runs, CSV output;
//! * [`ingest`] — click-log fitting and synthetic log generation;
//! * [`cli`] — the `simulate` / `oracle` / `ingest` command line;
//! * [`fixtures`] — ready-made instances.
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! start with `cargo run --example bandit_loop`.

pub mod cli;
pub mod environment;
pub mod estimators;
pub mod fixtures;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod optimizer;
pub mod policies;

pub use environment::{derive_seed, Environment, Feedback, RngStream};
pub use estimators::{EffectivePullMode, LearnerSnapshot, LearnerState};
pub use harness::{
    solve_oracle, sublinearity_check, CheckpointSchedule, OracleSolution, PolicySpec,
    RegretNotion, RegretTrace, RunSpec,
};
pub use model::{
    cuf_value, expected_user_value, Permutation, ProblemInstance, RewardModel, UtilityFunction,
};
pub use optimizer::{FractionSchedule, OptimizerConfig};
pub use policies::{PolicyConfig, PolicyFamily, PolicyState, Treatment};
