//! Builds empirical problem instances from ranked-impression click logs,
//! and generates synthetic logs for round-trip testing.
//!
//! Offline logs record which position every impression used, so fitting
//! is fully observable (unlike the bandit feedback path). The position
//! bias is recovered with the same per-arm ratio normalization the online
//! estimator uses, which makes offline and online estimates agree by
//! construction on identical counts.

use crate::environment::{sample_arrival, step, RngStream};
use crate::model::{ProblemInstance, RewardModel, MIN_ARM_MEAN};
use crate::policies::init_permutation;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// One impression: an arm shown to a user type at a position, clicked or
/// not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub user_type: usize,
    pub arm: usize,
    pub position: usize,
    pub clicked: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("no records")]
    NoRecords,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("record {index} is out of range for dimensions ({num_user_types}, {num_arms}, {num_positions}): {record:?}")]
    RecordOutOfRange {
        index: usize,
        record: ClickRecord,
        num_user_types: usize,
        num_arms: usize,
        num_positions: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-cell impression counts and the cells too thin to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub num_user_types: usize,
    pub num_arms: usize,
    pub num_positions: usize,
    pub min_count: u64,
    /// Impressions per `(type, arm, position)`, row-major `N×M×K`.
    pub impressions: Vec<u64>,
    /// Cells with fewer than `min_count` impressions, as `[i, j, k]`.
    pub uncovered: Vec<[usize; 3]>,
    /// `(type, arm)` pairs with impressions but zero clicks anywhere;
    /// their position profile is unidentifiable and filled uniformly.
    pub zero_click_arms: Vec<[usize; 2]>,
}

impl CoverageReport {
    pub fn fully_covered(&self) -> bool {
        self.uncovered.is_empty() && self.zero_click_arms.is_empty()
    }
}

/// Fits an instance from impression records.
///
/// Arrival rates come from record frequencies per type, position bias
/// from the per-arm ratio normalization averaged over fully covered arms,
/// and arm means from clicks over preference-weighted impressions:
/// `μ_{i,j} = ‖clicks_{i,j}‖ / Σ_k impressions_{i,j,k} · ρ̂_{i,k}`.
/// Cells below `min_count` impressions are reported uncovered; the
/// instance is still emitted, with uniform fill where a parameter is
/// unidentifiable, and always satisfies the instance invariants.
pub fn fit_instance(
    records: &[ClickRecord],
    num_user_types: usize,
    num_arms: usize,
    num_positions: usize,
    min_count: u64,
) -> Result<(ProblemInstance, CoverageReport), IngestError> {
    if records.is_empty() {
        return Err(IngestError::NoRecords);
    }
    let (n, m, k) = (num_user_types, num_arms, num_positions);
    let idx = |i: usize, j: usize, p: usize| (i * m + j) * k + p;
    let mut impressions = vec![0u64; n * m * k];
    let mut clicks = vec![0u64; n * m * k];
    let mut type_counts = vec![0u64; n];
    for (index, r) in records.iter().enumerate() {
        if r.user_type >= n || r.arm >= m || r.position >= k {
            return Err(IngestError::RecordOutOfRange {
                index,
                record: *r,
                num_user_types: n,
                num_arms: m,
                num_positions: k,
            });
        }
        impressions[idx(r.user_type, r.arm, r.position)] += 1;
        clicks[idx(r.user_type, r.arm, r.position)] += r.clicked as u64;
        type_counts[r.user_type] += 1;
    }

    let floor = min_count.max(1);
    let mut uncovered = Vec::new();
    for i in 0..n {
        for j in 0..m {
            for p in 0..k {
                if impressions[idx(i, j, p)] < floor {
                    uncovered.push([i, j, p]);
                }
            }
        }
    }

    let total_records: u64 = type_counts.iter().sum();
    let arrival_rates: Vec<f64> =
        type_counts.iter().map(|&c| c as f64 / total_records as f64).collect();

    // Position bias per type: average of normalized per-arm click/impression
    // ratio profiles, over arms whose every cell is covered and clicked.
    let mut zero_click_arms = Vec::new();
    let mut position_prefs = vec![0.0; n * k];
    for i in 0..n {
        let mut contributing = 0usize;
        let mut acc = vec![0.0; k];
        for j in 0..m {
            let covered = (0..k).all(|p| impressions[idx(i, j, p)] >= floor);
            let click_total: u64 = (0..k).map(|p| clicks[idx(i, j, p)]).sum();
            if covered && click_total == 0 {
                zero_click_arms.push([i, j]);
            }
            if !covered || click_total == 0 {
                continue;
            }
            let ratios: Vec<f64> = (0..k)
                .map(|p| clicks[idx(i, j, p)] as f64 / impressions[idx(i, j, p)] as f64)
                .collect();
            let sum: f64 = ratios.iter().sum();
            for p in 0..k {
                acc[p] += ratios[p] / sum;
            }
            contributing += 1;
        }
        let row = &mut position_prefs[i * k..(i + 1) * k];
        if contributing == 0 {
            row.iter_mut().for_each(|v| *v = 1.0 / k as f64);
        } else {
            for p in 0..k {
                row[p] = acc[p] / contributing as f64;
            }
            // Kill residual rounding so the row invariant holds exactly.
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
        }
    }

    let mut arm_means = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            let mut weighted = 0.0;
            let mut click_total = 0u64;
            for p in 0..k {
                weighted += impressions[idx(i, j, p)] as f64 * position_prefs[i * k + p];
                click_total += clicks[idx(i, j, p)];
            }
            let mu = if weighted > 0.0 { click_total as f64 / weighted } else { 0.5 };
            arm_means[i * m + j] = mu.clamp(MIN_ARM_MEAN, 1.0);
        }
    }

    let instance = ProblemInstance {
        num_user_types: n,
        num_arms: m,
        num_positions: k,
        arrival_rates,
        position_prefs,
        arm_means,
        reward_model: RewardModel::Bernoulli,
    };
    debug_assert!(instance.is_valid(), "fitted instance violates invariants: {:?}", instance.validate());
    let report = CoverageReport {
        num_user_types: n,
        num_arms: m,
        num_positions: k,
        min_count,
        impressions,
        uncovered,
        zero_click_arms,
    };
    Ok((instance, report))
}

/// Generates an offline log by replaying the click chain under a uniform
/// round-robin display schedule: every round emits one record per
/// displayed arm, with position information (offline logs record
/// impressions, so there is no partial observability here).
pub fn generate_log(instance: &ProblemInstance, rounds: u64, rng: &mut RngStream) -> Vec<ClickRecord> {
    let (m, k) = (instance.num_arms, instance.num_positions);
    let mut records = Vec::with_capacity((rounds as usize).saturating_mul(k));
    for t in 0..rounds {
        let user_type = sample_arrival(instance, rng);
        let perm = init_permutation(t, m, k);
        let feedback = step(instance, user_type, &perm, rng);
        for (position, &arm) in perm.slots().iter().enumerate() {
            records.push(ClickRecord {
                user_type,
                arm,
                position,
                clicked: feedback.clicked_arm == Some(arm),
            });
        }
    }
    records
}

/// Reads the tab-separated log format: `user_type  arm  position clicked`,
/// zero-indexed, no header, one record per line.
pub fn read_tsv<R: BufRead>(reader: R) -> Result<Vec<ClickRecord>, IngestError> {
    let mut records = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line?;
        let number = number + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(IngestError::Malformed {
                line: number,
                message: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse = |field: &str, name: &str| -> Result<usize, IngestError> {
            field.parse().map_err(|e| IngestError::Malformed {
                line: number,
                message: format!("bad {name} {field:?}: {e}"),
            })
        };
        let clicked = match fields[3] {
            "0" => false,
            "1" => true,
            other => {
                return Err(IngestError::Malformed {
                    line: number,
                    message: format!("clicked must be 0 or 1, found {other:?}"),
                })
            }
        };
        records.push(ClickRecord {
            user_type: parse(fields[0], "user_type")?,
            arm: parse(fields[1], "arm")?,
            position: parse(fields[2], "position")?,
            clicked,
        });
    }
    Ok(records)
}

pub fn write_tsv<W: Write>(records: &[ClickRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}\t{}\t{}\t{}", r.user_type, r.arm, r.position, r.clicked as u8)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_log_is_a_fault() {
        assert!(matches!(fit_instance(&[], 1, 1, 1, 1), Err(IngestError::NoRecords)));
    }

    #[test]
    fn single_cell_log_fits_directly() {
        let mut records = Vec::new();
        for i in 0..10 {
            records.push(ClickRecord { user_type: 0, arm: 0, position: 0, clicked: i < 3 });
        }
        let (inst, report) = fit_instance(&records, 1, 1, 1, 1).unwrap();
        assert_eq!(inst.arrival_rates, vec![1.0]);
        assert_eq!(inst.position_prefs, vec![1.0]);
        assert!((inst.arm_means[0] - 0.3).abs() < 1e-12);
        assert!(report.fully_covered());
    }

    #[test]
    fn generate_log_shapes() {
        let inst = fixtures::minimal();
        let mut rng = RngStream::from_seed(5);
        assert!(generate_log(&inst, 0, &mut rng).is_empty());
        let records = generate_log(&inst, 10, &mut rng);
        assert_eq!(records.len(), 10);
        assert!(records.iter().all(|r| r.arm == 0 && r.position == 0 && r.user_type == 0));
    }

    #[test]
    fn per_cell_click_ratios_match_the_chain() {
        let inst = fixtures::two_type_ads();
        let mut rng = RngStream::from_seed(9);
        let records = generate_log(&inst, 200_000, &mut rng);
        let (m, k) = (5usize, 2usize);
        let mut shown = vec![0u64; 2 * m * k];
        let mut clicked = vec![0u64; 2 * m * k];
        for r in &records {
            let cell = (r.user_type * m + r.arm) * k + r.position;
            shown[cell] += 1;
            clicked[cell] += r.clicked as u64;
        }
        for i in 0..2 {
            for j in 0..m {
                for p in 0..k {
                    let cell = (i * m + j) * k + p;
                    let expected = inst.rho(i, p) * inst.mu(i, j);
                    let observed = clicked[cell] as f64 / shown[cell] as f64;
                    let sigma = (expected * (1.0 - expected) / shown[cell] as f64).sqrt();
                    assert!(
                        (observed - expected).abs() < 3.5 * sigma + 1e-3,
                        "cell ({i},{j},{p}): observed {observed}, expected {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_recovers_the_source_instance() {
        let inst = fixtures::two_type_ads();
        let mut rng = RngStream::from_seed(77);
        let records = generate_log(&inst, 300_000, &mut rng);
        let (fitted, report) = fit_instance(&records, 2, 5, 2, 100).unwrap();
        assert!(report.fully_covered());
        for i in 0..2 {
            assert!((fitted.arrival_rates[i] - inst.arrival_rates[i]).abs() < 0.004);
            for p in 0..2 {
                assert!((fitted.rho(i, p) - inst.rho(i, p)).abs() < 0.02);
            }
            for j in 0..5 {
                assert!((fitted.mu(i, j) - inst.mu(i, j)).abs() < 0.02);
            }
        }
        assert!(fitted.is_valid());
    }

    #[test]
    fn fit_is_order_independent() {
        let inst = fixtures::two_type_ads();
        let mut rng = RngStream::from_seed(3);
        let mut records = generate_log(&inst, 20_000, &mut rng);
        let (a, _) = fit_instance(&records, 2, 5, 2, 10).unwrap();
        records.reverse();
        let (b, _) = fit_instance(&records, 2, 5, 2, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uncovered_cells_are_listed_and_filled() {
        // Only arm 0 ever shown: arm 1 cells are uncovered, instance still
        // valid with uniform fill.
        let mut records = Vec::new();
        for i in 0..200 {
            records.push(ClickRecord { user_type: 0, arm: 0, position: 0, clicked: i % 3 == 0 });
            records.push(ClickRecord { user_type: 0, arm: 0, position: 1, clicked: i % 7 == 0 });
        }
        let (inst, report) = fit_instance(&records, 1, 2, 2, 100).unwrap();
        assert_eq!(report.uncovered, vec![[0, 1, 0], [0, 1, 1]]);
        assert!(inst.is_valid());
        assert_eq!(inst.arm_means[1], 0.5);
    }

    #[test]
    fn out_of_range_record_is_a_fault() {
        let records = vec![ClickRecord { user_type: 0, arm: 3, position: 0, clicked: false }];
        assert!(matches!(
            fit_instance(&records, 1, 2, 1, 1),
            Err(IngestError::RecordOutOfRange { .. })
        ));
    }

    #[test]
    fn tsv_round_trip_and_malformed_lines() {
        let records = vec![
            ClickRecord { user_type: 0, arm: 4, position: 1, clicked: true },
            ClickRecord { user_type: 1, arm: 0, position: 0, clicked: false },
        ];
        let mut buf = Vec::new();
        write_tsv(&records, &mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf), "0\t4\t1\t1\n1\t0\t0\t0\n");
        let back = read_tsv(&buf[..]).unwrap();
        assert_eq!(back, records);

        let err = read_tsv("0\t1\n".as_bytes()).unwrap_err();
        match err {
            IngestError::Malformed { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let err = read_tsv("0\t0\t0\t1\nx\t0\t0\t1\n".as_bytes()).unwrap_err();
        match err {
            IngestError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offline_and_online_position_estimates_agree_on_identical_counts() {
        use crate::estimators::{EffectivePullMode, LearnerSnapshot, LearnerState};
        let inst = fixtures::two_type_ads();
        let mut rng = RngStream::from_seed(15);
        let records = generate_log(&inst, 50_000, &mut rng);
        let (fitted, report) = fit_instance(&records, 2, 5, 2, 1).unwrap();
        assert!(report.fully_covered());
        // Feed the same counts through the online estimator.
        let (m, k) = (5usize, 2usize);
        let mut pulls = vec![0u64; 2 * m * k];
        let mut clicks = vec![0u64; 2 * m * k];
        for r in &records {
            let cell = (r.user_type * m + r.arm) * k + r.position;
            pulls[cell] += 1;
            clicks[cell] += r.clicked as u64;
        }
        let snapshot = LearnerSnapshot {
            num_user_types: 2,
            num_arms: m,
            num_positions: k,
            t: records.len() as u64,
            pulls,
            clicks,
            n_eff: vec![1.0; 2 * m],
            arrival_counts: vec![1, records.len() as u64 - 1],
        };
        let mut online = LearnerState::from_snapshot(&snapshot, EffectivePullMode::Incremental);
        let rho_online = online.estimate_position_prefs();
        for (a, b) in fitted.position_prefs.iter().zip(rho_online.iter()) {
            assert!((a - b).abs() < 1e-12, "offline {a} vs online {b}");
        }
    }
}
