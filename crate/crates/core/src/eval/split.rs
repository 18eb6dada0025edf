//! Train / test / validation partitioning and S-fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratify {
    /// Stratify rows by class label.
    Class,
    /// Keep every participant's rows together (subject-wise protocol).
    Participant,
}

impl std::str::FromStr for Stratify {
    type Err = HarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "class" => Ok(Stratify::Class),
            "participant" => Ok(Stratify::Participant),
            _ => Err(HarError::Config(format!(
                "unknown stratification {s:?}; expected class or participant"
            ))),
        }
    }
}

impl std::fmt::Display for Stratify {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stratify::Class => "class",
            Stratify::Participant => "participant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_frac: f64,
    pub test_frac: f64,
    pub validation_frac: f64,
    pub stratify_by: Stratify,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            train_frac: 0.60,
            test_frac: 0.20,
            validation_frac: 0.20,
            stratify_by: Stratify::Class,
            seed: 42,
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        let fr = [self.train_frac, self.test_frac, self.validation_frac];
        if fr.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(HarError::Config(
                "split fractions must lie in [0, 1]".into(),
            ));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(HarError::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Sorted, disjoint row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub validation: Vec<usize>,
}

impl SplitIndices {
    /// Train and test rows together: the pool used for model assessment.
    pub fn pool(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.train.iter().chain(&self.test).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Stratum key per row: the label, or the participant.
fn strata(labels: &[u8], groups: &[u32], by: Stratify) -> BTreeMap<u64, Vec<usize>> {
    let mut m: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for i in 0..labels.len() {
        let key = match by {
            Stratify::Class => u64::from(labels[i]),
            Stratify::Participant => u64::from(groups[i]),
        };
        m.entry(key).or_default().push(i);
    }
    m
}

const MIN_STRATUM: usize = 5;

pub fn split(labels: &[u8], groups: &[u32], plan: &SplitPlan) -> Result<SplitIndices> {
    plan.validate()?;
    let mut out = SplitIndices {
        train: Vec::new(),
        test: Vec::new(),
        validation: Vec::new(),
    };
    match plan.stratify_by {
        Stratify::Class => {
            for (key, mut rows) in strata(labels, groups, Stratify::Class) {
                let n = rows.len();
                if n < MIN_STRATUM {
                    return Err(HarError::Partition(format!(
                        "class {key} has {n} rows, at least {MIN_STRATUM} needed"
                    )));
                }
                rows.shuffle(&mut rng_from(plan.seed, &[0, key]));
                let n_test = (plan.test_frac * n as f64).floor() as usize;
                let n_val = (plan.validation_frac * n as f64).floor() as usize;
                out.test.extend_from_slice(&rows[..n_test]);
                out.validation
                    .extend_from_slice(&rows[n_test..n_test + n_val]);
                out.train.extend_from_slice(&rows[n_test + n_val..]);
            }
        }
        Stratify::Participant => {
            let by_group = strata(labels, groups, Stratify::Participant);
            let mut keys: Vec<u64> = by_group.keys().copied().collect();
            let n = keys.len();
            if n < MIN_STRATUM {
                return Err(HarError::Partition(format!(
                    "{n} participants, at least {MIN_STRATUM} needed"
                )));
            }
            keys.shuffle(&mut rng_from(plan.seed, &[1]));
            let n_test = (plan.test_frac * n as f64).floor() as usize;
            let n_val = (plan.validation_frac * n as f64).floor() as usize;
            for (pos, k) in keys.iter().enumerate() {
                let rows = &by_group[k];
                let target = if pos < n_test {
                    &mut out.test
                } else if pos < n_test + n_val {
                    &mut out.validation
                } else {
                    &mut out.train
                };
                target.extend_from_slice(rows);
            }
        }
    }
    out.train.sort_unstable();
    out.test.sort_unstable();
    out.validation.sort_unstable();
    Ok(out)
}

/// Fold number (0..folds) for every listed row. With class stratification a
/// running counter over shuffled per-class rows keeps every fold within one
/// row of n/folds, overall and per class.
pub fn fold_assignment(
    rows: &[usize],
    labels: &[u8],
    groups: &[u32],
    folds: usize,
    by: Stratify,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(HarError::Config("need at least 2 folds".into()));
    }
    let sub_labels: Vec<u8> = rows.iter().map(|&i| labels[i]).collect();
    let sub_groups: Vec<u32> = rows.iter().map(|&i| groups[i]).collect();
    let mut assignment = vec![0usize; rows.len()];
    let buckets = strata(&sub_labels, &sub_groups, by);
    match by {
        Stratify::Class => {
            let mut counter = 0usize;
            for (key, mut members) in buckets {
                if members.len() < folds {
                    return Err(HarError::Partition(format!(
                        "class {key} has {} rows, fewer than {folds} folds",
                        members.len()
                    )));
                }
                members.shuffle(&mut rng_from(seed, &[2, key]));
                for m in members {
                    assignment[m] = counter % folds;
                    counter += 1;
                }
            }
        }
        Stratify::Participant => {
            let mut keys: Vec<u64> = buckets.keys().copied().collect();
            if keys.len() < folds {
                return Err(HarError::Partition(format!(
                    "{} participants, fewer than {folds} folds",
                    keys.len()
                )));
            }
            keys.shuffle(&mut rng_from(seed, &[3]));
            for (pos, k) in keys.iter().enumerate() {
                for &m in &buckets[k] {
                    assignment[m] = pos % folds;
                }
            }
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_hundred_rows() {
        let labels = vec![3u8; 100];
        let groups = vec![1u32; 100];
        let s = split(&labels, &groups, &SplitPlan::default()).unwrap();
        assert_eq!(
            (s.train.len(), s.test.len(), s.validation.len()),
            (60, 20, 20)
        );
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.test)
            .chain(&s.validation)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(s, split(&labels, &groups, &SplitPlan::default()).unwrap());
    }

    #[test]
    fn small_stratum_fails() {
        let labels = vec![1, 1, 1, 1, 2, 2, 2, 2, 2];
        let groups = vec![1; 9];
        assert!(matches!(
            split(&labels, &groups, &SplitPlan::default()),
            Err(HarError::Partition(_))
        ));
    }

    #[test]
    fn participant_split_keeps_subjects_whole() {
        let labels: Vec<u8> = (0..160).map(|i| (i % 9 + 1) as u8).collect();
        let groups: Vec<u32> = (0..160).map(|i| i / 10 + 1).collect();
        let plan = SplitPlan {
            stratify_by: Stratify::Participant,
            ..SplitPlan::default()
        };
        let s = split(&labels, &groups, &plan).unwrap();
        let owners = |idx: &[usize]| {
            let mut g: Vec<u32> = idx.iter().map(|&i| groups[i]).collect();
            g.dedup();
            g
        };
        let (a, b, c) = (owners(&s.train), owners(&s.test), owners(&s.validation));
        assert_eq!((a.len(), b.len(), c.len()), (10, 3, 3));
        assert!(a.iter().all(|g| !b.contains(g) && !c.contains(g)));
    }

    #[test]
    fn fold_sizes_balanced() {
        let labels: Vec<u8> = (0..103).map(|i| (i % 4 + 1) as u8).collect();
        let groups = vec![1; 103];
        let rows: Vec<usize> = (0..103).collect();
        let a = fold_assignment(&rows, &labels, &groups, 5, Stratify::Class, 1).unwrap();
        let mut sizes = [0usize; 5];
        for f in &a {
            sizes[*f] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 20 || s == 21));
        assert!(fold_assignment(&rows[..8], &labels, &groups, 5, Stratify::Class, 1).is_err());
    }
}
