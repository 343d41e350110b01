use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{par, rng, Error, Result};

/// A record carrying a binary context label and a permutation stratum.
pub trait Labeled: Copy + Send + Sync {
    fn label(&self) -> u8;
    fn with_label(self, label: u8) -> Self;
    /// Labels are only exchanged between records of the same stratum.
    fn stratum(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTestResult {
    pub observed_statistic: f64,
    pub p_value: f64,
    pub n_shuffles: usize,
    /// Shuffles whose statistic reached the observed value.
    pub exceedances: usize,
    pub null_mean: f64,
    pub null_sd: f64,
    pub null_max: f64,
}

/// One-sided label-permutation test.
///
/// Each shuffle permutes labels uniformly within every stratum, using the
/// generator `rng::stream(seed, shuffle)`. The p-value is
/// `(1 + #{shuffled >= observed}) / (1 + n_shuffles)`; "reached" allows a
/// relative slack of 1e-12 so that floating-point reorderings of an
/// identical statistic count as ties.
pub fn permutation_test<T, F>(
    records: &[T],
    statistic: F,
    n_shuffles: usize,
    seed: u64,
) -> Result<PermutationTestResult>
where
    T: Labeled,
    F: Fn(&[T]) -> f64 + Sync + Send,
{
    if n_shuffles == 0 {
        return Err(Error::UndefinedTest("n_shuffles must be at least 1".into()));
    }
    let first = records
        .first()
        .ok_or_else(|| Error::UndefinedTest("no records".into()))?
        .label();
    if records.iter().all(|r| r.label() == first) {
        return Err(Error::UndefinedTest("all labels identical".into()));
    }
    let observed = statistic(records);
    if observed.is_nan() {
        return Err(Error::UndefinedTest("observed statistic is NaN".into()));
    }

    let mut strata: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry(r.stratum()).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = strata.into_values().collect();

    let null = par::map_range(n_shuffles, |s| {
        let mut rng = rng::stream(seed, s as u64);
        let mut shuffled = records.to_vec();
        for idx in &groups {
            let mut labels: Vec<u8> = idx.iter().map(|&i| records[i].label()).collect();
            labels.shuffle(&mut rng);
            for (&i, &l) in idx.iter().zip(&labels) {
                shuffled[i] = records[i].with_label(l);
            }
        }
        statistic(&shuffled)
    });

    let slack = 1e-12 * observed.abs().max(1.0);
    let exceedances = null.iter().filter(|&&v| v >= observed - slack).count();
    let finite: Vec<f64> = null.iter().copied().filter(|v| v.is_finite()).collect();
    let n = finite.len().max(1) as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(PermutationTestResult {
        observed_statistic: observed,
        p_value: (1 + exceedances) as f64 / (1 + n_shuffles) as f64,
        n_shuffles,
        exceedances,
        null_mean: mean,
        null_sd: var.sqrt(),
        null_max: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy)]
    struct Rec {
        stratum: u64,
        label: u8,
        value: f64,
    }

    impl Labeled for Rec {
        fn label(&self) -> u8 {
            self.label
        }
        fn with_label(mut self, label: u8) -> Self {
            self.label = label;
            self
        }
        fn stratum(&self) -> u64 {
            self.stratum
        }
    }

    fn mean_diff(rs: &[Rec]) -> f64 {
        let (mut s0, mut n0, mut s1, mut n1) = (0.0, 0.0, 0.0, 0.0);
        for r in rs {
            if r.label == 0 {
                s0 += r.value;
                n0 += 1.0;
            } else {
                s1 += r.value;
                n1 += 1.0;
            }
        }
        s0 / n0 - s1 / n1
    }

    fn separated() -> Vec<Rec> {
        (0..200)
            .map(|i| Rec {
                stratum: ((i / 2) % 4) as u64,
                label: (i % 2) as u8,
                value: if i % 2 == 0 { 1.0 } else { 0.0 } + 0.001 * i as f64,
            })
            .collect()
    }

    #[test]
    fn extreme_statistic_hits_grid_floor() {
        let r = permutation_test(&separated(), mean_diff, 500, 1).unwrap();
        assert_eq!(r.exceedances, 0);
        assert_eq!(r.p_value, 1.0 / 501.0);
        let r = permutation_test(&separated(), mean_diff, 200, 1).unwrap();
        assert_eq!(r.p_value, 1.0 / 201.0);
    }

    #[test]
    fn stratification_keeps_labels_within_strata() {
        // stratum 0 holds only label 0, stratum 1 only label 1: shuffling
        // within strata cannot move anything, so every shuffle ties.
        let rs: Vec<Rec> = (0..20)
            .map(|i| Rec {
                stratum: (i % 2) as u64,
                label: (i % 2) as u8,
                value: i as f64,
            })
            .collect();
        let r = permutation_test(&rs, mean_diff, 50, 3).unwrap();
        assert_eq!(r.exceedances, 50);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        let same: Vec<Rec> = (0..10)
            .map(|i| Rec {
                stratum: 0,
                label: 1,
                value: i as f64,
            })
            .collect();
        assert!(matches!(
            permutation_test(&same, mean_diff, 10, 0),
            Err(Error::UndefinedTest(_))
        ));
        assert!(permutation_test(&separated(), mean_diff, 0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let rs: Vec<Rec> = (0..60)
            .map(|i| Rec {
                stratum: 0,
                label: (i % 2) as u8,
                value: ((i * 37) % 11) as f64,
            })
            .collect();
        let a = permutation_test(&rs, mean_diff, 99, 5).unwrap();
        let b = permutation_test(&rs, mean_diff, 99, 5).unwrap();
        assert_eq!(a, b);
    }
}
