//! Randomized invariant checks over generated instances, counters, and
//! search spaces.

use proptest::prelude::*;
use rankbandit::environment::{sample_arrival, step, RngStream};
use rankbandit::estimators::LearnerState;
use rankbandit::optimizer::{
    argmax_exact, argmax_sampled, enumerate_permutations, permutation_count, unrank_permutation,
};
use rankbandit::policies::{init_permutation, personalized_rank};
use rankbandit::{cuf_value, expected_user_value, fixtures, Permutation, UtilityFunction};

fn shapes() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(n, m)| (Just(n), Just(m), 1usize..=m.min(4)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn user_values_stay_in_the_unit_interval(
        (n, m, k) in shapes(),
        seed in 0u64..1_000_000,
        perm_seed in 0u64..1_000_000,
    ) {
        let instance = fixtures::synthetic(n, m, k, seed);
        let space = permutation_count(m, k);
        let rank = perm_seed as u128 % space;
        let perm = Permutation::new(unrank_permutation(rank, m, k), m).unwrap();
        for i in 0..n {
            let v = expected_user_value(&instance, i, &perm);
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let total = cuf_value(&instance, UtilityFunction::Utilitarian, &perm);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&total));
    }

    #[test]
    fn unranking_yields_valid_distinct_slots_in_order(
        (_, m, k) in shapes(),
        a in 0u64..1_000_000,
        b in 0u64..1_000_000,
    ) {
        let space = permutation_count(m, k);
        let (ra, rb) = ((a as u128) % space, (b as u128) % space);
        let pa = unrank_permutation(ra, m, k);
        let pb = unrank_permutation(rb, m, k);
        prop_assert!(Permutation::new(pa.clone(), m).is_ok());
        // Unranking respects lexicographic order.
        if ra < rb {
            prop_assert!(pa < pb);
        } else if ra == rb {
            prop_assert_eq!(pa, pb);
        }
    }

    #[test]
    fn exact_argmax_dominates_every_enumerated_permutation(
        (_, m, k) in shapes(),
        weights in proptest::collection::vec(0.0f64..1.0, 8),
    ) {
        let objective = |slots: &[usize]| -> f64 {
            slots.iter().enumerate().map(|(p, &a)| weights[(a + 3 * p) % weights.len()]).sum()
        };
        let (_, best) = argmax_exact(m, k, 100_000, objective).unwrap();
        let mut iter = enumerate_permutations(m, k, 100_000).unwrap();
        while let Some(slots) = iter.advance() {
            prop_assert!(objective(slots) <= best);
        }
    }

    #[test]
    fn sampled_argmax_never_beats_exact_argmax(
        (_, m, k) in shapes(),
        delta in 0.05f64..1.0,
        seed in 0u64..1_000_000,
        weights in proptest::collection::vec(0.0f64..1.0, 8),
    ) {
        let objective = |slots: &[usize]| -> f64 {
            slots.iter().enumerate().map(|(p, &a)| weights[(a + 3 * p) % weights.len()]).sum()
        };
        let (_, best) = argmax_exact(m, k, 100_000, objective).unwrap();
        let mut rng = RngStream::from_seed(seed);
        let sampled = argmax_sampled(m, k, 100_000, delta, 1, &mut rng, objective).unwrap();
        prop_assert!(sampled.value <= best + 1e-12);
    }

    #[test]
    fn recorded_counters_respect_structural_bounds(
        seed in 0u64..1_000_000,
        rounds in 50u64..400,
    ) {
        let instance = fixtures::two_type_ads();
        let (n, m, k) = (2usize, 5usize, 2usize);
        let mut rng = RngStream::from_seed(seed);
        let mut state = LearnerState::new(n, m, k);
        for t in 0..rounds {
            let user_type = sample_arrival(&instance, &mut rng);
            let perm = init_permutation(t, m, k);
            let feedback = step(&instance, user_type, &perm, &mut rng);
            state.record(user_type, &perm, &feedback);
        }
        prop_assert_eq!(state.t(), rounds);
        prop_assert_eq!(state.arrival_counts().iter().sum::<u64>(), rounds);
        for i in 0..n {
            let rho_sum: f64 = state.position_pref_row(i).iter().sum();
            prop_assert!((rho_sum - 1.0).abs() < 1e-9);
            for j in 0..m {
                let mut pulls = 0u64;
                for p in 0..k {
                    prop_assert!(state.clicks(i, j, p) <= state.pulls(i, j, p));
                    pulls += state.pulls(i, j, p);
                }
                prop_assert!(state.effective_pulls(i, j) <= pulls as f64 + 1e-9);
                let mu = state.estimate_arm_mean(i, j);
                prop_assert!((0.0..=1.0).contains(&mu));
            }
        }
    }

    #[test]
    fn sort_match_is_invariant_to_positive_scaling(
        scores in proptest::collection::vec(0.01f64..1.0, 5),
        prefs in proptest::collection::vec(0.01f64..1.0, 3),
        scale in 0.1f64..50.0,
    ) {
        let base = personalized_rank(&prefs, &scores, 3);
        let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
        prop_assert_eq!(base, personalized_rank(&prefs, &scaled, 3));
    }

    #[test]
    fn swapping_equal_preference_positions_preserves_values(
        seed in 0u64..1_000_000,
    ) {
        // Two positions with identical preference for every type: putting
        // either arm first cannot change any user value.
        let mut instance = fixtures::synthetic(2, 4, 2, seed);
        instance.position_prefs = vec![0.5, 0.5, 0.5, 0.5];
        let a = Permutation::new(vec![1, 3], 4).unwrap();
        let b = Permutation::new(vec![3, 1], 4).unwrap();
        for i in 0..2 {
            let va = expected_user_value(&instance, i, &a);
            let vb = expected_user_value(&instance, i, &b);
            prop_assert!((va - vb).abs() < 1e-12);
        }
        let ca = cuf_value(&instance, UtilityFunction::nash(), &a);
        let cb = cuf_value(&instance, UtilityFunction::nash(), &b);
        prop_assert!((ca - cb).abs() < 1e-12);
    }
}
