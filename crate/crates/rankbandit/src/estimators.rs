//! Observable counters and the estimators built on them.
//!
//! The learner never sees `ρ` or `μ` directly; it sees pull counts
//! `T_{i,j,k}`, click counts `S_{i,j,k}`, and arrivals. The position
//! preference estimate normalizes per-arm click/pull ratios so the arm
//! mean cancels:
//!
//! ```text
//! v̄_{i,j,k} = (S_{i,j,k}/T_{i,j,k}) / Σ_l (S_{i,j,l}/T_{i,j,l})
//! ρ̂_{i,k}   = (1/M) Σ_j v̄_{i,j,k}
//! ```
//!
//! The arm mean estimate divides total clicks by the effective pull
//! counter `N_{i,j}` — pulls weighted by the estimated chance the shown
//! position was actually observed — which removes the position bias that
//! would make the raw click ratio inconsistent under partial feedback:
//! `μ̂_{i,j} = ‖S_{i,j}‖₁ / N_{i,j}`.

use crate::environment::Feedback;
use crate::model::{Permutation, UtilityFunction};
use serde::{Deserialize, Serialize};

/// How the effective pull counter `N_{i,j}` is maintained.
///
/// `Incremental` adds the current `ρ̂_{i,σ(j)}` snapshot at pull time and
/// is the default. `Recomputed` evaluates `Σ_k T_{i,j,k} · ρ̂_{i,k}` with
/// the present estimate instead; both converge, but the incremental form
/// is what the policies' exploration bonuses are calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectivePullMode {
    #[default]
    Incremental,
    Recomputed,
}

/// Exportable counter snapshot; everything needed to restore a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSnapshot {
    pub num_user_types: usize,
    pub num_arms: usize,
    pub num_positions: usize,
    pub t: u64,
    /// `T`, row-major `N×M×K`.
    pub pulls: Vec<u64>,
    /// `S`, row-major `N×M×K`.
    pub clicks: Vec<u64>,
    /// Effective pull counters, row-major `N×M`.
    pub n_eff: Vec<f64>,
    pub arrival_counts: Vec<u64>,
}

/// All observable state of one learner.
#[derive(Debug, Clone)]
pub struct LearnerState {
    num_user_types: usize,
    num_arms: usize,
    num_positions: usize,
    t: u64,
    pulls: Vec<u64>,
    clicks: Vec<u64>,
    n_eff: Vec<f64>,
    arrival_counts: Vec<u64>,
    rho_hat: Vec<f64>,
    scratch: Vec<f64>,
    zero_click_cells: usize,
    initialized: bool,
    mode: EffectivePullMode,
}

impl LearnerState {
    pub fn new(num_user_types: usize, num_arms: usize, num_positions: usize) -> Self {
        Self::with_mode(num_user_types, num_arms, num_positions, EffectivePullMode::default())
    }

    pub fn with_mode(
        num_user_types: usize,
        num_arms: usize,
        num_positions: usize,
        mode: EffectivePullMode,
    ) -> Self {
        assert!(num_user_types > 0 && num_arms > 0 && num_positions > 0);
        let cells = num_user_types * num_arms * num_positions;
        Self {
            num_user_types,
            num_arms,
            num_positions,
            t: 0,
            pulls: vec![0; cells],
            clicks: vec![0; cells],
            n_eff: vec![0.0; num_user_types * num_arms],
            arrival_counts: vec![0; num_user_types],
            rho_hat: vec![1.0 / num_positions as f64; num_user_types * num_positions],
            scratch: vec![0.0; num_user_types * num_positions],
            zero_click_cells: cells,
            initialized: false,
            mode,
        }
    }

    /// Restores a state from exported counters (checkpoint/replay). The
    /// cached `ρ̂` is recomputed from the counters.
    pub fn from_snapshot(snapshot: &LearnerSnapshot, mode: EffectivePullMode) -> Self {
        let mut state = Self::with_mode(
            snapshot.num_user_types,
            snapshot.num_arms,
            snapshot.num_positions,
            mode,
        );
        assert_eq!(snapshot.pulls.len(), state.pulls.len());
        assert_eq!(snapshot.clicks.len(), state.clicks.len());
        assert_eq!(snapshot.n_eff.len(), state.n_eff.len());
        assert_eq!(snapshot.arrival_counts.len(), state.arrival_counts.len());
        state.t = snapshot.t;
        state.pulls.copy_from_slice(&snapshot.pulls);
        state.clicks.copy_from_slice(&snapshot.clicks);
        state.n_eff.copy_from_slice(&snapshot.n_eff);
        state.arrival_counts.copy_from_slice(&snapshot.arrival_counts);
        state.zero_click_cells = snapshot.clicks.iter().filter(|&&s| s == 0).count();
        state.initialized = state.zero_click_cells == 0;
        if state.initialized {
            state.refresh_position_prefs();
        }
        state
    }

    /// Idealized state whose estimates match a ground-truth instance to
    /// within rounding: every cell holds `scale` pulls and `ρ·μ·scale`
    /// clicks, so `μ̂ = μ` exactly and `ρ̂ ≈ ρ`. Useful for sanity checks
    /// of exploit paths with perfect information.
    ///
    /// Exact recovery of `μ` requires `ρ·μ·scale` to be integral for every
    /// cell, which holds for fixtures with three-decimal parameters and
    /// `scale = 1_000_000`.
    pub fn with_ground_truth(instance: &crate::model::ProblemInstance, scale: u64) -> Self {
        let (n, m, k) =
            (instance.num_user_types, instance.num_arms, instance.num_positions);
        let mut state = Self::new(n, m, k);
        for i in 0..n {
            for j in 0..m {
                let mut row_clicks = 0u64;
                for p in 0..k {
                    let cell = state.idx3(i, j, p);
                    state.pulls[cell] = scale;
                    let s = (instance.rho(i, p) * instance.mu(i, j) * scale as f64).round() as u64;
                    state.clicks[cell] = s;
                    row_clicks += s;
                }
                debug_assert!(row_clicks > 0);
                state.n_eff[i * m + j] = scale as f64;
            }
        }
        let arrival_scale = 1_000_000u64;
        for i in 0..n {
            state.arrival_counts[i] =
                (instance.arrival_rates[i] * arrival_scale as f64).round() as u64;
        }
        state.t = state.arrival_counts.iter().sum();
        state.zero_click_cells = state.clicks.iter().filter(|&&s| s == 0).count();
        state.initialized = state.zero_click_cells == 0;
        if state.initialized {
            state.refresh_position_prefs();
        }
        state
    }

    #[inline]
    fn idx3(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.num_arms + j) * self.num_positions + k
    }

    pub fn num_user_types(&self) -> usize {
        self.num_user_types
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn num_positions(&self) -> usize {
        self.num_positions
    }

    /// Rounds recorded so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// True once every `(i, j, k)` cell has at least one click.
    pub fn initialized(&self) -> bool {
        self.initialized
    }

    pub fn pulls(&self, i: usize, j: usize, k: usize) -> u64 {
        self.pulls[self.idx3(i, j, k)]
    }

    pub fn clicks(&self, i: usize, j: usize, k: usize) -> u64 {
        self.clicks[self.idx3(i, j, k)]
    }

    pub fn arrival_counts(&self) -> &[u64] {
        &self.arrival_counts
    }

    /// Effective pull counter for `(i, j)` under the configured mode.
    pub fn effective_pulls(&self, i: usize, j: usize) -> f64 {
        match self.mode {
            EffectivePullMode::Incremental => self.n_eff[i * self.num_arms + j],
            EffectivePullMode::Recomputed => {
                let mut total = 0.0;
                for k in 0..self.num_positions {
                    total += self.pulls[self.idx3(i, j, k)] as f64
                        * self.rho_hat[i * self.num_positions + k];
                }
                total
            }
        }
    }

    /// Cached position preference estimate, row-major `N×K`. Uniform
    /// before initialization.
    pub fn position_prefs(&self) -> &[f64] {
        &self.rho_hat
    }

    pub fn position_pref_row(&self, i: usize) -> &[f64] {
        &self.rho_hat[i * self.num_positions..(i + 1) * self.num_positions]
    }

    /// Records one round of feedback for a permutation shown to
    /// `user_type`. Increments `T` at `(i, j, σ(j))` for every displayed
    /// arm, `S` only at the clicked cell, the arrival count, and the
    /// effective pull counters using the `ρ̂` snapshot from before this
    /// round's refresh. Faults if the clicked arm is not in the
    /// permutation.
    ///
    /// `user_type` is the row to record under; callers that pool types
    /// (the single-type baseline) pass their pooled index rather than
    /// `feedback.user_type`.
    pub fn record(&mut self, user_type: usize, perm: &Permutation, feedback: &Feedback) {
        assert!(user_type < self.num_user_types, "user type {user_type} out of range");
        assert_eq!(
            perm.len(),
            self.num_positions,
            "permutation fills {} slots but the learner tracks {}",
            perm.len(),
            self.num_positions
        );
        debug_assert_eq!(feedback.reward == 1, feedback.clicked_arm.is_some());
        let i = user_type;
        for (k, &arm) in perm.slots().iter().enumerate() {
            assert!(arm < self.num_arms);
            let cell = self.idx3(i, arm, k);
            self.pulls[cell] += 1;
            self.n_eff[i * self.num_arms + arm] += self.rho_hat[i * self.num_positions + k];
        }
        if let Some(arm) = feedback.clicked_arm {
            let k = perm
                .position_of(arm)
                .unwrap_or_else(|| panic!("clicked arm {arm} is not in the displayed permutation"));
            let cell = self.idx3(i, arm, k);
            if self.clicks[cell] == 0 {
                self.zero_click_cells -= 1;
            }
            self.clicks[cell] += 1;
        }
        self.arrival_counts[i] += 1;
        self.t += 1;
        if !self.initialized && self.zero_click_cells == 0 {
            self.initialized = true;
        }
        if self.initialized {
            self.refresh_position_prefs();
        }
    }

    fn refresh_position_prefs(&mut self) {
        let (n, m, k) = (self.num_user_types, self.num_arms, self.num_positions);
        let mut next = std::mem::take(&mut self.scratch);
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut ratios = [0.0f64; 64];
        let ratios = if k <= 64 { &mut ratios[..k] } else { return self.refresh_slow(next) };
        for i in 0..n {
            for j in 0..m {
                let mut sum = 0.0;
                for p in 0..k {
                    let cell = (i * m + j) * k + p;
                    let r = self.clicks[cell] as f64 / self.pulls[cell] as f64;
                    ratios[p] = r;
                    sum += r;
                }
                for p in 0..k {
                    next[i * k + p] += ratios[p] / sum;
                }
            }
        }
        let inv_m = 1.0 / m as f64;
        next.iter_mut().for_each(|v| *v *= inv_m);
        self.scratch = std::mem::replace(&mut self.rho_hat, next);
    }

    fn refresh_slow(&mut self, mut next: Vec<f64>) {
        let (n, m, k) = (self.num_user_types, self.num_arms, self.num_positions);
        let mut ratios = vec![0.0f64; k];
        for i in 0..n {
            for j in 0..m {
                let mut sum = 0.0;
                for p in 0..k {
                    let cell = (i * m + j) * k + p;
                    let r = self.clicks[cell] as f64 / self.pulls[cell] as f64;
                    ratios[p] = r;
                    sum += r;
                }
                for p in 0..k {
                    next[i * k + p] += ratios[p] / sum;
                }
            }
        }
        let inv_m = 1.0 / m as f64;
        next.iter_mut().for_each(|v| *v *= inv_m);
        self.scratch = std::mem::replace(&mut self.rho_hat, next);
    }

    /// Recomputes and caches `ρ̂` from the current counters, returning the
    /// fresh estimate. Before initialization (some cell still clickless)
    /// the rows stay uniform — a documented fallback, not a fault.
    pub fn estimate_position_prefs(&mut self) -> &[f64] {
        if self.initialized {
            self.refresh_position_prefs();
        }
        &self.rho_hat
    }

    /// `μ̂_{i,j} = ‖S_{i,j}‖₁ / N_{i,j}`, clamped to `[0, 1]`.
    ///
    /// When the effective pull counter is still zero the estimate defaults
    /// to the optimistic `1.0`, which forces exploration of untried arms.
    pub fn estimate_arm_mean(&self, i: usize, j: usize) -> f64 {
        let n = self.effective_pulls(i, j);
        if n <= 0.0 {
            return 1.0;
        }
        let mut s = 0u64;
        for k in 0..self.num_positions {
            s += self.clicks[self.idx3(i, j, k)];
        }
        (s as f64 / n).clamp(0.0, 1.0)
    }

    /// All arm mean estimates, row-major `N×M`.
    pub fn arm_mean_estimates(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_user_types * self.num_arms);
        for i in 0..self.num_user_types {
            for j in 0..self.num_arms {
                out.push(self.estimate_arm_mean(i, j));
            }
        }
        out
    }

    /// `λ̂ = arrival_counts / t`. Faults before the first arrival.
    pub fn estimate_arrival_rates(&self) -> Vec<f64> {
        assert!(self.t > 0, "arrival rates are undefined before the first round");
        let t = self.t as f64;
        self.arrival_counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Plug-in estimate of the collective utility of `σ`:
    /// `Γ̂(σ) = Σ_i λ̂_i · f(Σ_k ρ̂_{i,k} · μ̂_{i,slots[k]})`.
    pub fn estimate_cuf(&self, utility: UtilityFunction, perm: &Permutation) -> f64 {
        assert!(self.t > 0, "CUF estimate is undefined before the first arrival");
        let t = self.t as f64;
        let mut total = 0.0;
        for i in 0..self.num_user_types {
            let mut user_value = 0.0;
            for (k, &arm) in perm.slots().iter().enumerate() {
                user_value +=
                    self.rho_hat[i * self.num_positions + k] * self.estimate_arm_mean(i, arm);
            }
            total += (self.arrival_counts[i] as f64 / t) * utility.apply(user_value);
        }
        total
    }

    /// Exports the raw counters.
    pub fn snapshot(&self) -> LearnerSnapshot {
        LearnerSnapshot {
            num_user_types: self.num_user_types,
            num_arms: self.num_arms,
            num_positions: self.num_positions,
            t: self.t,
            pulls: self.pulls.clone(),
            clicks: self.clicks.clone(),
            n_eff: self.n_eff.clone(),
            arrival_counts: self.arrival_counts.clone(),
        }
    }
}
