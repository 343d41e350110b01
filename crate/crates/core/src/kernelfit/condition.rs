use serde::{Deserialize, Serialize};

use crate::harness::WitnessResult;
use crate::infostats::{
    bootstrap_ci, PermutationTestResult, RecordSet, RecordStatistic, ShotRecord,
};
use crate::{rng, Error, Result};

/// One low-order information screen I(Y; C_S) ≈ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub vars: Vec<String>,
    /// Miller–Madow corrected I(Y; C_S) in bits, before clipping.
    pub mi_raw_bits: f64,
    /// `mi_raw_bits` clipped at zero.
    pub mi_bits: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub below_threshold: bool,
    /// The interval does not lie entirely above zero.
    pub ci_allows_zero: bool,
    pub passed: bool,
}

/// Outcome of the context-dependence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcVerdict {
    pub holds: bool,
    pub mi_threshold: f64,
    pub p_threshold: f64,
    pub screens: Vec<ScreenResult>,
    pub screens_pass: bool,
    pub witness_delta: f64,
    pub p_value: f64,
    pub permutation_pass: bool,
}

/// Checks that the label is invisible to every single and pair of context
/// variables while the witness still separates the classes.
///
/// Each screen passes when |I_MM(Y; C_S)| < `mi_threshold` and its
/// stratified bootstrap interval (strata = lane × circuit) does not lie
/// entirely above zero. The verdict also requires the witness permutation
/// p-value to be below `p_threshold`.
#[allow(clippy::too_many_arguments)]
pub fn dc_condition_check(
    records: &RecordSet,
    context: &[&str],
    witness_delta: &WitnessResult,
    mi_threshold: f64,
    p_threshold: f64,
    permutation: &PermutationTestResult,
    n_resamples: usize,
    seed: u64,
) -> Result<DcVerdict> {
    if !(mi_threshold > 0.0) || !(p_threshold > 0.0) {
        return Err(Error::InvalidQuery("thresholds must be positive".into()));
    }
    let mut subsets: Vec<Vec<&str>> = context.iter().map(|c| vec![*c]).collect();
    for i in 0..context.len() {
        for j in i + 1..context.len() {
            subsets.push(vec![context[i], context[j]]);
        }
    }
    let mut screens = Vec::with_capacity(subsets.len());
    for vars in subsets {
        let stat = RecordStatistic::MutualInformation {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            corrected: true,
        };
        let f = stat.bind(records)?;
        let raw = f(&records.records);
        let (lo, hi) = bootstrap_ci(
            &records.records,
            ShotRecord::lane_circuit,
            &f,
            n_resamples,
            0.95,
            rng::derive_str(seed, &stat.name()),
        )?;
        let below_threshold = raw.abs() < mi_threshold;
        let ci_allows_zero = lo <= 1e-12;
        screens.push(ScreenResult {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            mi_raw_bits: raw,
            mi_bits: raw.max(0.0),
            ci_low: lo,
            ci_high: hi,
            below_threshold,
            ci_allows_zero,
            passed: below_threshold && ci_allows_zero,
        });
    }
    let screens_pass = screens.iter().all(|s| s.passed);
    let permutation_pass = permutation.p_value < p_threshold;
    Ok(DcVerdict {
        holds: screens_pass && permutation_pass,
        mi_threshold,
        p_threshold,
        screens,
        screens_pass,
        witness_delta: witness_delta.delta_e,
        p_value: permutation.p_value,
        permutation_pass,
    })
}
