//! Argmax over K-permutations of M arms: exact lexicographic enumeration
//! and a uniform-sampling approximation for search spaces too large to
//! scan every round.
//!
//! The search space has `M!/(M−K)!` points. Exact search walks it in
//! lexicographic slot order and keeps the first maximum, so ties always
//! resolve to the lexicographically smallest permutation. The sampled
//! variant draws `max(min_samples, ⌈δ·|P|⌉)` permutations uniformly —
//! without replacement while the space fits the enumeration cap, with
//! replacement above it — and returns the best of the sample, which by
//! construction never beats the exact optimum and coincides with it at
//! `δ = 1`.

use crate::environment::RngStream;
use crate::model::{Permutation, UtilityFunction};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Default ceiling on exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("search space has {size} permutations, above the cap {cap}; use the sampled optimizer")]
    SearchSpaceTooLarge { size: u128, cap: u64 },
    #[error("objective returned non-finite value {value} at permutation {slots:?}")]
    NonFiniteObjective { slots: Vec<usize>, value: f64 },
    #[error("cannot fill {k} positions from {m} arms")]
    InvalidShape { m: usize, k: usize },
}

/// `M!/(M−K)!`, saturating at `u128::MAX`.
pub fn permutation_count(m: usize, k: usize) -> u128 {
    let mut count: u128 = 1;
    for x in (m - k + 1)..=m {
        count = count.saturating_mul(x as u128);
    }
    count
}

/// Lexicographic iterator over all K-permutations of `[0, M)`.
///
/// [`advance`](Self::advance) is the allocation-free form; the `Iterator`
/// impl clones each item into a [`Permutation`].
#[derive(Debug, Clone)]
pub struct KPermutations {
    m: usize,
    k: usize,
    slots: Vec<usize>,
    used: Vec<bool>,
    started: bool,
    done: bool,
}

impl KPermutations {
    pub fn new(m: usize, k: usize) -> Result<Self, OptimizeError> {
        if k == 0 || k > m {
            return Err(OptimizeError::InvalidShape { m, k });
        }
        Ok(Self { m, k, slots: Vec::with_capacity(k), used: vec![false; m], started: false, done: false })
    }

    /// Steps to the next permutation and exposes it as a slice.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            for arm in 0..self.k {
                self.slots.push(arm);
                self.used[arm] = true;
            }
            return Some(&self.slots);
        }
        // Rightmost slot that can move to a larger unused arm wins; slots
        // after it restart from the smallest unused arms.
        loop {
            let Some(current) = self.slots.pop() else {
                self.done = true;
                return None;
            };
            self.used[current] = false;
            if let Some(next) = (current + 1..self.m).find(|&a| !self.used[a]) {
                self.slots.push(next);
                self.used[next] = true;
                while self.slots.len() < self.k {
                    let smallest = (0..self.m).find(|&a| !self.used[a]).expect("k <= m");
                    self.slots.push(smallest);
                    self.used[smallest] = true;
                }
                return Some(&self.slots);
            }
        }
    }
}

impl Iterator for KPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        self.advance().map(|slots| Permutation::from_trusted(slots.to_vec()))
    }
}

/// Exhaustive lexicographic enumeration, guarded by `cap`.
pub fn enumerate_permutations(m: usize, k: usize, cap: u64) -> Result<KPermutations, OptimizeError> {
    if k == 0 || k > m {
        return Err(OptimizeError::InvalidShape { m, k });
    }
    let size = permutation_count(m, k);
    if size > cap as u128 {
        return Err(OptimizeError::SearchSpaceTooLarge { size, cap });
    }
    KPermutations::new(m, k)
}

/// Maps a lexicographic rank in `[0, M!/(M−K)!)` to its permutation.
pub fn unrank_permutation(rank: u128, m: usize, k: usize) -> Vec<usize> {
    assert!(k > 0 && k <= m);
    assert!(rank < permutation_count(m, k), "rank out of range");
    let mut available: Vec<usize> = (0..m).collect();
    let mut slots = Vec::with_capacity(k);
    let mut r = rank;
    for pos in 0..k {
        // Number of completions once this slot is fixed.
        let completions = permutation_count(m - pos - 1, k - pos - 1);
        let idx = (r / completions) as usize;
        r %= completions;
        slots.push(available.remove(idx));
    }
    slots
}

/// Exact argmax by full enumeration. Ties break lexicographically (the
/// first maximum encountered wins). Faults on non-finite objectives.
pub fn argmax_exact<F>(m: usize, k: usize, cap: u64, mut objective: F) -> Result<(Permutation, f64), OptimizeError>
where
    F: FnMut(&[usize]) -> f64,
{
    let mut iter = enumerate_permutations(m, k, cap)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    while let Some(slots) = iter.advance() {
        let value = objective(slots);
        if !value.is_finite() {
            return Err(OptimizeError::NonFiniteObjective { slots: slots.to_vec(), value });
        }
        match &mut best {
            None => best = Some((value, slots.to_vec())),
            Some((bv, bs)) => {
                if value > *bv {
                    *bv = value;
                    bs.clear();
                    bs.extend_from_slice(slots);
                }
            }
        }
    }
    let (value, slots) = best.expect("non-empty search space");
    Ok((Permutation::from_trusted(slots), value))
}

/// Result of a sampled argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledArgmax {
    pub perm: Permutation,
    pub value: f64,
    pub n_sampled: u64,
}

/// Best of `max(min_samples, ⌈δ·|P|⌉)` uniformly sampled permutations.
///
/// While the space fits `cap` the sample is drawn without replacement
/// (Floyd's algorithm over lexicographic ranks); asking for the whole
/// space degenerates to the exact scan, drawing nothing from `rng`.
/// Above the cap the sample is drawn with replacement.
pub fn argmax_sampled<F>(
    m: usize,
    k: usize,
    cap: u64,
    delta: f64,
    min_samples: u64,
    rng: &mut RngStream,
    mut objective: F,
) -> Result<SampledArgmax, OptimizeError>
where
    F: FnMut(&[usize]) -> f64,
{
    assert!(delta > 0.0 && delta <= 1.0, "sampling fraction must lie in (0, 1]");
    assert!(min_samples >= 1);
    if k == 0 || k > m {
        return Err(OptimizeError::InvalidShape { m, k });
    }
    let size = permutation_count(m, k);
    let requested = ((delta * size as f64).ceil() as u128).max(min_samples as u128);

    if requested >= size {
        if size > cap as u128 {
            return Err(OptimizeError::SearchSpaceTooLarge { size, cap });
        }
        let (perm, value) = argmax_exact(m, k, cap, objective)?;
        return Ok(SampledArgmax { perm, value, n_sampled: size as u64 });
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |slots: &[usize], value: f64| -> Result<(), OptimizeError> {
        if !value.is_finite() {
            return Err(OptimizeError::NonFiniteObjective { slots: slots.to_vec(), value });
        }
        match &mut best {
            None => best = Some((value, slots.to_vec())),
            Some((bv, bs)) => {
                // Order of evaluation is rng-dependent, so ties fall back
                // to the lexicographic rule explicitly.
                if value > *bv || (value == *bv && slots < bs.as_slice()) {
                    *bv = value;
                    bs.clear();
                    bs.extend_from_slice(slots);
                }
            }
        }
        Ok(())
    };

    // Completions below each slot are fixed by (m, k); precomputing them
    // keeps per-sample unranking allocation-free.
    let completions: Vec<u128> = (0..k).map(|pos| permutation_count(m - pos - 1, k - pos - 1)).collect();
    let mut available: Vec<usize> = Vec::with_capacity(m);
    let mut slots_buf: Vec<usize> = Vec::with_capacity(k);
    let unrank_into = |rank: u128, slots_buf: &mut Vec<usize>, available: &mut Vec<usize>| {
        available.clear();
        available.extend(0..m);
        slots_buf.clear();
        let mut r = rank;
        for &completion in &completions {
            let idx = (r / completion) as usize;
            r %= completion;
            slots_buf.push(available.remove(idx));
        }
    };

    let n_sampled;
    if size <= cap as u128 {
        // Without replacement over ranks (Floyd), constant memory in |P|.
        let population = size as u64;
        let n = requested as u64;
        let mut chosen: HashSet<u64> = HashSet::with_capacity(n as usize);
        for upper in (population - n)..population {
            let draw = rng.below(upper + 1);
            let pick = if chosen.insert(draw) {
                draw
            } else {
                chosen.insert(upper);
                upper
            };
            unrank_into(pick as u128, &mut slots_buf, &mut available);
            consider(&slots_buf, objective(&slots_buf))?;
        }
        n_sampled = n;
    } else {
        // With replacement above the cap.
        if requested > cap as u128 {
            return Err(OptimizeError::SearchSpaceTooLarge { size, cap });
        }
        let n = requested as u64;
        for _ in 0..n {
            let rank = rng.below_u128(size);
            unrank_into(rank, &mut slots_buf, &mut available);
            consider(&slots_buf, objective(&slots_buf))?;
        }
        n_sampled = n;
    }
    let (value, slots) = best.expect("at least one sample");
    Ok(SampledArgmax { perm: Permutation::from_trusted(slots), value, n_sampled })
}

/// Sampling fraction schedule `t → δ_t ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FractionSchedule {
    Constant { delta: f64 },
    /// `δ_t = max(floor, min(1, t / t_full))`: grows toward exhaustive
    /// search as the horizon advances.
    RampToOne { t_full: u64, #[serde(default = "default_ramp_floor")] floor: f64 },
}

fn default_ramp_floor() -> f64 {
    1e-6
}

impl FractionSchedule {
    pub fn delta_at(&self, t: u64) -> f64 {
        match *self {
            FractionSchedule::Constant { delta } => delta,
            FractionSchedule::RampToOne { t_full, floor } => {
                (t as f64 / t_full.max(1) as f64).min(1.0).max(floor)
            }
        }
    }
}

/// How the equal-treatment policies search the permutation space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    BruteForce,
    SampledPtas {
        schedule: FractionSchedule,
        #[serde(default = "default_min_samples")]
        min_samples: u64,
    },
}

fn default_min_samples() -> u64 {
    1
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::BruteForce
    }
}

/// Ranking objective of the form
/// `Σ_i w_i · f(Σ_k gains[i,k,slots[k]]) + Σ_k bonus[slots[k]]`.
///
/// This covers the estimated CUF (weights are arrival-rate estimates,
/// gains are `ρ̂·μ̂` products) with an optional per-arm confidence bonus.
/// [`maximize_exact`](Self::maximize_exact) carries partial per-type sums
/// down a depth-first scan instead of re-evaluating each permutation from
/// scratch; the arithmetic matches [`eval`](Self::eval) term for term, so
/// exact and sampled searches agree bitwise on common permutations.
#[derive(Debug, Clone)]
pub struct CufObjective {
    num_user_types: usize,
    num_arms: usize,
    num_positions: usize,
    user_weights: Vec<f64>,
    /// Laid out `(position, arm, type)`: `gains[(k·M + j)·N + i]`, so the
    /// per-type contributions of one slot choice sit contiguously.
    gains: Vec<f64>,
    arm_bonus: Vec<f64>,
    utility: UtilityFunction,
}

const MAX_DFS_TYPES: usize = 16;

impl CufObjective {
    /// `gains` is `(position, arm, type)`-major: entry `(k·M + j)·N + i`
    /// is the value user type `i` gets from arm `j` at position `k`.
    pub fn new(
        user_weights: Vec<f64>,
        gains: Vec<f64>,
        arm_bonus: Vec<f64>,
        utility: UtilityFunction,
        num_positions: usize,
    ) -> Self {
        let num_user_types = user_weights.len();
        let num_arms = arm_bonus.len();
        assert!(num_user_types > 0 && num_arms > 0 && num_positions > 0);
        assert_eq!(gains.len(), num_user_types * num_positions * num_arms);
        Self { num_user_types, num_arms, num_positions, user_weights, gains, arm_bonus, utility }
    }

    #[inline]
    fn gain_block(&self, k: usize, j: usize) -> &[f64] {
        let base = (k * self.num_arms + j) * self.num_user_types;
        &self.gains[base..base + self.num_user_types]
    }

    /// Objective value of one permutation.
    pub fn eval(&self, slots: &[usize]) -> f64 {
        debug_assert_eq!(slots.len(), self.num_positions);
        let n = self.num_user_types;
        if n <= MAX_DFS_TYPES {
            let mut user_values = [0.0f64; MAX_DFS_TYPES];
            let mut bonus = 0.0;
            for (k, &arm) in slots.iter().enumerate() {
                let block = self.gain_block(k, arm);
                for i in 0..n {
                    user_values[i] += block[i];
                }
                bonus += self.arm_bonus[arm];
            }
            return self.finish(&user_values[..n], bonus);
        }
        let mut user_values = vec![0.0f64; n];
        let mut bonus = 0.0;
        for (k, &arm) in slots.iter().enumerate() {
            let block = self.gain_block(k, arm);
            for i in 0..n {
                user_values[i] += block[i];
            }
            bonus += self.arm_bonus[arm];
        }
        self.finish(&user_values, bonus)
    }

    #[inline]
    fn finish(&self, user_values: &[f64], bonus: f64) -> f64 {
        let mut total = 0.0;
        for (i, &u) in user_values.iter().enumerate() {
            total += self.user_weights[i] * self.utility.apply(u);
        }
        total + bonus
    }

    /// Exact argmax with lexicographic tie-breaking, equal to running
    /// [`argmax_exact`] over [`eval`](Self::eval) but substantially
    /// cheaper on large spaces.
    pub fn maximize_exact(&self, cap: u64) -> Result<(Permutation, f64), OptimizeError> {
        let (m, k, n) = (self.num_arms, self.num_positions, self.num_user_types);
        if k > m {
            return Err(OptimizeError::InvalidShape { m, k });
        }
        if n > MAX_DFS_TYPES || m > 64 {
            return argmax_exact(m, k, cap, |slots| self.eval(slots));
        }
        let size = permutation_count(m, k);
        if size > cap as u128 {
            return Err(OptimizeError::SearchSpaceTooLarge { size, cap });
        }
        let mut walk = DfsWalk {
            objective: self,
            slots: vec![0; k],
            user_values: [0.0; MAX_DFS_TYPES],
            best: None,
            bad: None,
        };
        walk.descend(0, 0u64, 0.0);
        if let Some(err) = walk.bad {
            return Err(err);
        }
        let (value, slots) = walk.best.expect("non-empty search space");
        Ok((Permutation::from_trusted(slots), value))
    }

    /// Sampled argmax over [`eval`](Self::eval); see [`argmax_sampled`].
    pub fn maximize_sampled(
        &self,
        cap: u64,
        delta: f64,
        min_samples: u64,
        rng: &mut RngStream,
    ) -> Result<SampledArgmax, OptimizeError> {
        argmax_sampled(self.num_arms, self.num_positions, cap, delta, min_samples, rng, |slots| {
            self.eval(slots)
        })
    }

    /// Runs the search described by `config` at round `t`.
    pub fn maximize(
        &self,
        config: &OptimizerConfig,
        cap: u64,
        t: u64,
        rng: &mut RngStream,
    ) -> Result<(Permutation, f64), OptimizeError> {
        match config {
            OptimizerConfig::BruteForce => self.maximize_exact(cap),
            OptimizerConfig::SampledPtas { schedule, min_samples } => {
                let delta = schedule.delta_at(t);
                let result = self.maximize_sampled(cap, delta, (*min_samples).max(1), rng)?;
                Ok((result.perm, result.value))
            }
        }
    }
}

struct DfsWalk<'a> {
    objective: &'a CufObjective,
    slots: Vec<usize>,
    user_values: [f64; MAX_DFS_TYPES],
    best: Option<(f64, Vec<usize>)>,
    bad: Option<OptimizeError>,
}

impl DfsWalk<'_> {
    fn descend(&mut self, depth: usize, used: u64, bonus: f64) {
        if self.bad.is_some() {
            return;
        }
        let o = self.objective;
        let (n, k, m) = (o.num_user_types, o.num_positions, o.num_arms);
        if depth == k {
            let total = o.finish(&self.user_values[..n], bonus);
            if !total.is_finite() {
                self.bad = Some(OptimizeError::NonFiniteObjective {
                    slots: self.slots.clone(),
                    value: total,
                });
                return;
            }
            match &mut self.best {
                None => self.best = Some((total, self.slots.clone())),
                Some((bv, bs)) => {
                    if total > *bv {
                        *bv = total;
                        bs.copy_from_slice(&self.slots);
                    }
                }
            }
            return;
        }
        // Save the partial sums so siblings restore them bit-exactly;
        // subtracting the increment back out would reintroduce rounding.
        let mut saved = [0.0; MAX_DFS_TYPES];
        saved[..n].copy_from_slice(&self.user_values[..n]);
        for arm in 0..m {
            if used & (1u64 << arm) != 0 {
                continue;
            }
            let block = o.gain_block(depth, arm);
            for i in 0..n {
                self.user_values[i] = saved[i] + block[i];
            }
            self.slots[depth] = arm;
            self.descend(depth + 1, used | (1u64 << arm), bonus + o.arm_bonus[arm]);
        }
        self.user_values[..n].copy_from_slice(&saved[..n]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::RngStream;

    #[test]
    fn enumeration_counts() {
        assert_eq!(permutation_count(2, 1), 2);
        assert_eq!(permutation_count(3, 2), 6);
        assert_eq!(permutation_count(5, 2), 20);
        assert_eq!(permutation_count(20, 4), 116_280);
        assert_eq!(enumerate_permutations(2, 1, 100).unwrap().count(), 2);
        assert_eq!(enumerate_permutations(3, 2, 100).unwrap().count(), 6);
        assert_eq!(enumerate_permutations(5, 2, 100).unwrap().count(), 20);
    }

    #[test]
    fn enumeration_is_lexicographic_and_distinct() {
        let perms: Vec<Permutation> = enumerate_permutations(4, 3, 1000).unwrap().collect();
        assert_eq!(perms.len(), 24);
        for w in perms.windows(2) {
            assert!(w[0] < w[1], "{} !< {}", w[0], w[1]);
        }
        assert_eq!(perms[0].slots(), &[0, 1, 2]);
        assert_eq!(perms[23].slots(), &[3, 2, 1]);
    }

    #[test]
    fn cap_violation_is_reported() {
        let err = enumerate_permutations(30, 10, 1000).unwrap_err();
        assert!(matches!(err, OptimizeError::SearchSpaceTooLarge { .. }));
    }

    #[test]
    fn unranking_matches_enumeration_order() {
        for (m, k) in [(4, 2), (5, 3), (6, 1), (5, 5)] {
            let all: Vec<Permutation> = enumerate_permutations(m, k, 100_000).unwrap().collect();
            for (rank, perm) in all.iter().enumerate() {
                assert_eq!(unrank_permutation(rank as u128, m, k), perm.slots());
            }
        }
    }

    #[test]
    fn argmax_finds_the_maximum_and_breaks_ties_lexicographically() {
        // Constant objective → lexicographically smallest permutation.
        let (perm, value) = argmax_exact(4, 2, 100, |_| 1.0).unwrap();
        assert_eq!(perm.slots(), &[0, 1]);
        assert_eq!(value, 1.0);

        // A genuine maximum is found and dominates a full re-scan.
        let objective = |slots: &[usize]| {
            slots.iter().enumerate().map(|(k, &a)| (a as f64 + 1.0) / (k as f64 + 2.0)).sum::<f64>()
        };
        let (best, best_value) = argmax_exact(5, 2, 100, objective).unwrap();
        let mut it = enumerate_permutations(5, 2, 100).unwrap();
        while let Some(slots) = it.advance() {
            assert!(objective(slots) <= best_value);
        }
        assert_eq!(best.slots(), &[4, 3]);
    }

    #[test]
    fn non_finite_objective_is_a_fault_identifying_the_permutation() {
        let err = argmax_exact(3, 2, 100, |slots| {
            if slots == [1, 2] { f64::NAN } else { 0.0 }
        })
        .unwrap_err();
        match err {
            OptimizeError::NonFiniteObjective { slots, .. } => assert_eq!(slots, vec![1, 2]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn toy_objective(slots: &[usize]) -> f64 {
        slots.iter().enumerate().map(|(k, &a)| ((a * 7 + 3) % 11) as f64 / (k + 1) as f64).sum()
    }

    #[test]
    fn sampling_everything_equals_exact_search() {
        let mut rng = RngStream::from_seed(5);
        let exact = argmax_exact(5, 2, 100, toy_objective).unwrap();
        let sampled = argmax_sampled(5, 2, 100, 1.0, 1, &mut rng, toy_objective).unwrap();
        assert_eq!(sampled.n_sampled, 20);
        assert_eq!(sampled.perm, exact.0);
        assert_eq!(sampled.value.to_bits(), exact.1.to_bits());
    }

    #[test]
    fn sampled_value_never_beats_exact() {
        let exact = argmax_exact(5, 2, 100, toy_objective).unwrap().1;
        for seed in 0..50 {
            let mut rng = RngStream::from_seed(seed);
            let sampled = argmax_sampled(5, 2, 100, 0.5, 1, &mut rng, toy_objective).unwrap();
            assert_eq!(sampled.n_sampled, 10);
            assert!(sampled.value <= exact);
        }
    }

    #[test]
    fn single_sample_floor() {
        let mut rng = RngStream::from_seed(9);
        let sampled = argmax_sampled(5, 2, 100, 1e-9, 1, &mut rng, toy_objective).unwrap();
        assert_eq!(sampled.n_sampled, 1);
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = argmax_sampled(6, 3, 1000, 0.3, 2, &mut RngStream::from_seed(4), toy_objective).unwrap();
        let b = argmax_sampled(6, 3, 1000, 0.3, 2, &mut RngStream::from_seed(4), toy_objective).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_sampled_value_is_monotone_in_delta() {
        // Coarse Monte-Carlo trend: more samples can only help on average.
        let deltas = [0.1, 0.3, 0.6, 0.9];
        let mut means = Vec::new();
        for &delta in &deltas {
            let mut total = 0.0;
            for seed in 0..1000 {
                let mut rng = RngStream::from_seed(seed);
                total += argmax_sampled(5, 2, 100, delta, 1, &mut rng, toy_objective).unwrap().value;
            }
            means.push(total / 1000.0);
        }
        for w in means.windows(2) {
            assert!(w[0] <= w[1] + 1e-9, "means not monotone: {means:?}");
        }
    }

    #[test]
    fn fraction_schedules() {
        let c = FractionSchedule::Constant { delta: 0.25 };
        assert_eq!(c.delta_at(1), 0.25);
        assert_eq!(c.delta_at(1_000_000), 0.25);
        let r = FractionSchedule::RampToOne { t_full: 100, floor: 0.05 };
        assert_eq!(r.delta_at(1), 0.05);
        assert_eq!(r.delta_at(50), 0.5);
        assert_eq!(r.delta_at(100), 1.0);
        assert_eq!(r.delta_at(10_000), 1.0);
    }

    fn random_cuf(seed: u64, n: usize, m: usize, k: usize, utility: UtilityFunction) -> CufObjective {
        let mut rng = RngStream::from_seed(seed);
        let mut weights: Vec<f64> = (0..n).map(|_| 0.5 + rng.next_f64()).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let gains: Vec<f64> = (0..n * k * m).map(|_| rng.next_f64() / k as f64).collect();
        let bonus: Vec<f64> = (0..m).map(|_| rng.next_f64() * 0.05).collect();
        CufObjective::new(weights, gains, bonus, utility, k)
    }

    #[test]
    fn dfs_matches_generic_argmax_bitwise() {
        for seed in 0..20 {
            for utility in [UtilityFunction::Utilitarian, UtilityFunction::nash()] {
                let obj = random_cuf(seed, 3, 6, 3, utility);
                let fast = obj.maximize_exact(100_000).unwrap();
                let slow = argmax_exact(6, 3, 100_000, |s| obj.eval(s)).unwrap();
                assert_eq!(fast.0, slow.0, "seed {seed}");
                assert_eq!(fast.1.to_bits(), slow.1.to_bits(), "seed {seed}");
            }
        }
    }

    #[test]
    fn dfs_and_full_sampling_agree_bitwise() {
        for seed in 0..10 {
            let obj = random_cuf(seed, 2, 5, 2, UtilityFunction::Utilitarian);
            let exact = obj.maximize_exact(100_000).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let sampled = obj.maximize_sampled(100_000, 1.0, 1, &mut rng).unwrap();
            assert_eq!(exact.0, sampled.perm);
            assert_eq!(exact.1.to_bits(), sampled.value.to_bits());
        }
    }
}
