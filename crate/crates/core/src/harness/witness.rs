use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::a6::Replicate;
use super::ensemble::Triple;
use crate::simcore::OutcomeTable;
use crate::{Error, Result};

/// ½(⟨X_A⟩ + ⟨X_B⟩) from counts whose probe pair was read out after a
/// terminal H, where ⟨X⟩ = p(0) − p(1) on each marginal.
pub fn ex_mean_witness(counts: &impl OutcomeTable, a: &str, b: &str) -> Result<f64> {
    Ok(0.5 * (counts.parity_expectation(&[a])? + counts.parity_expectation(&[b])?))
}

/// Fraction of context-only shots that read back the prepared triple.
pub fn ctx_ok(counts: &impl OutcomeTable, triple: Triple) -> Result<f64> {
    let m = counts.marginal_probabilities(&["C0", "C1", "C2"])?;
    Ok(m.get(&triple.to_string()).copied().unwrap_or(0.0))
}

/// Witness value of one (lane, replicate) circuit with its parity label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneWitness {
    pub lane: usize,
    pub replicate: Replicate,
    pub label: u8,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneDelta {
    pub lane: usize,
    pub e_even: f64,
    pub e_odd: f64,
    pub delta: f64,
}

/// Lane-balanced witness contrast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    /// Lane-averaged witness on the even (Y = 0) class.
    pub e_even: f64,
    /// Lane-averaged witness on the odd (Y = 1) class.
    pub e_odd: f64,
    /// e_even − e_odd, equal to the mean of the per-lane contrasts.
    pub delta_e: f64,
    pub per_lane_values: Vec<LaneDelta>,
    /// Sample standard deviation of the per-lane contrasts over √L; zero
    /// for a single lane.
    pub sem: f64,
    /// Optional percentile bootstrap interval for `delta_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
}

/// ΔE = (1/L) Σ_ℓ (E_ℓ,even − E_ℓ,odd), with entries of the same lane and
/// class (for example repeated replicates) averaged first.
pub fn lane_balanced_delta(inputs: &[LaneWitness]) -> Result<WitnessResult> {
    if inputs.is_empty() {
        return Err(Error::IncompleteDesign("no lane witnesses".into()));
    }
    // lane -> [sum_even, n_even, sum_odd, n_odd]
    let mut acc: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
    for w in inputs {
        if w.label > 1 {
            return Err(Error::IncompleteDesign(format!(
                "label {} is not a parity class",
                w.label
            )));
        }
        let e = acc.entry(w.lane).or_insert([0.0; 4]);
        let k = 2 * usize::from(w.label);
        e[k] += w.value;
        e[k + 1] += 1.0;
    }
    let mut per_lane = Vec::with_capacity(acc.len());
    for (&lane, e) in &acc {
        if e[1] == 0.0 || e[3] == 0.0 {
            let missing = if e[1] == 0.0 { "even" } else { "odd" };
            return Err(Error::IncompleteDesign(format!(
                "lane {lane} has no {missing}-class witness"
            )));
        }
        let (even, odd) = (e[0] / e[1], e[2] / e[3]);
        per_lane.push(LaneDelta {
            lane,
            e_even: even,
            e_odd: odd,
            delta: even - odd,
        });
    }
    let l = per_lane.len() as f64;
    let e_even = per_lane.iter().map(|d| d.e_even).sum::<f64>() / l;
    let e_odd = per_lane.iter().map(|d| d.e_odd).sum::<f64>() / l;
    let delta_e = per_lane.iter().map(|d| d.delta).sum::<f64>() / l;
    let sem = if per_lane.len() > 1 {
        let var = per_lane
            .iter()
            .map(|d| (d.delta - delta_e).powi(2))
            .sum::<f64>()
            / (l - 1.0);
        (var / l).sqrt()
    } else {
        0.0
    };
    Ok(WitnessResult {
        e_even,
        e_odd,
        delta_e,
        per_lane_values: per_lane,
        sem,
        ci: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::CountsTable;
    use approx::assert_abs_diff_eq;

    fn w(lane: usize, label: u8, value: f64) -> LaneWitness {
        let replicate = if label == 0 {
            Replicate::R0
        } else {
            Replicate::R1
        };
        LaneWitness {
            lane,
            replicate,
            label,
            value,
        }
    }

    #[test]
    fn witness_arithmetic() {
        let all_zero = CountsTable::from_pairs(["A", "B"], [("00", 10u64)]).unwrap();
        assert_eq!(ex_mean_witness(&all_zero, "A", "B").unwrap(), 1.0);
        let t = CountsTable::from_pairs(["A", "B"], [("00", 2u64), ("01", 1), ("10", 1)]).unwrap();
        assert_abs_diff_eq!(ex_mean_witness(&t, "A", "B").unwrap(), 0.5, epsilon = 1e-15);
        assert!(ex_mean_witness(&t, "A", "Q").is_err());
    }

    #[test]
    fn ctx_ok_fraction() {
        let t = CountsTable::from_pairs(["C0", "C1", "C2"], [("011", 94u64), ("010", 6)]).unwrap();
        assert_abs_diff_eq!(
            ctx_ok(&t, "011".parse().unwrap()).unwrap(),
            0.94,
            epsilon = 1e-15
        );
        assert_eq!(ctx_ok(&t, "111".parse().unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn balanced_delta_examples() {
        let ideal: Vec<LaneWitness> = (0..8).flat_map(|l| [w(l, 0, 1.0), w(l, 1, 0.0)]).collect();
        let r = lane_balanced_delta(&ideal).unwrap();
        assert_eq!(r.delta_e, 1.0);
        assert_eq!(r.sem, 0.0);

        let two = [w(0, 0, 1.0), w(0, 1, 0.0), w(1, 0, 0.9), w(1, 1, 0.1)];
        let r = lane_balanced_delta(&two).unwrap();
        assert_abs_diff_eq!(r.delta_e, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(r.delta_e, r.e_even - r.e_odd, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sem, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn incomplete_design_is_rejected() {
        assert!(matches!(
            lane_balanced_delta(&[]),
            Err(Error::IncompleteDesign(_))
        ));
        let r = lane_balanced_delta(&[w(0, 0, 1.0), w(0, 1, 0.0), w(1, 0, 1.0)]);
        assert!(matches!(r, Err(Error::IncompleteDesign(_))));
    }
}
