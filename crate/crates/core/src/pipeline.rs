//! End-to-end analysis of an executed parity-context run: witnesses,
//! context quality, information screens, Möbius atoms, permutation and
//! bootstrap inference, kernel decomposition and the ΔE(θ) fit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::{
    ctx_ok, ex_mean_witness, lane_balanced_delta, A6Run, Family, LaneWitness, RunMode,
    WitnessResult, A6_LABELS,
};
use crate::infostats::{
    bootstrap_ci, mobius_atoms, permutation_test, plugin_mutual_information, MobiusAtoms,
    PermutationTestResult, RecordSet, RecordStatistic, ShotRecord,
};
use crate::kernelfit::{
    dc_condition_check, decompose_gamma, fit_delta_curve, gamma_rel_predict, proxy_only_residual,
    CurvePoint, DcVerdict, FitResult, KernelEstimate,
};
use crate::simcore::{OutcomeTable, ProbabilityTable};
use crate::{rng, Error, Result};

/// Label name used for the parity class in joint tables.
pub const LABEL: &str = "Y";
const CONTEXT: [&str; 3] = ["C0", "C1", "C2"];

/// Inference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub n_shuffles: usize,
    pub n_resamples: usize,
    pub confidence: f64,
    pub mi_threshold: f64,
    pub p_threshold: f64,
    pub coupling_scale: f64,
    /// Master seed of the permutation and bootstrap streams.
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            n_shuffles: 500,
            n_resamples: 1000,
            confidence: 0.95,
            mi_threshold: 0.01,
            p_threshold: 0.01,
            coupling_scale: 1.0,
            seed: 0,
        }
    }
}

/// Lane-balanced witness of one family (and θ for ACTIVE).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub witness: WitnessResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneContextQuality {
    pub lane: usize,
    pub ctx_ok_r0: f64,
    pub ctx_ok_r1: f64,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextQuality {
    pub per_lane: Vec<LaneContextQuality>,
    pub mean: f64,
    pub worst_lane: f64,
}

/// Plug-in and Miller–Madow I(Y; vars).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationValue {
    pub plugin_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miller_madow_raw_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miller_madow_bits: Option<f64>,
}

/// Kernel decomposition with the curve fit and predicted residual kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub estimate: KernelEstimate,
    pub reference_theta: f64,
    pub gamma_rel_by_class: BTreeMap<String, f64>,
    #[serde(rename = "D")]
    pub suppression_by_class: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    /// Predicted Γ_rel per planned θ (coupling scale × f̃⁺ × ω).
    pub gamma_rel_predicted: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_context_conditioned: Option<f64>,
    pub residual_proxy_only: f64,
}

/// Complete analysis of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A6Analysis {
    pub mode: RunMode,
    pub lanes: usize,
    pub shots: u64,
    pub options: AnalysisOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_theta: Option<f64>,
    pub witnesses: Vec<WitnessRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_quality: Option<ContextQuality>,
    /// I(Y; ·) at the reference θ on the ACTIVE family, keyed by variables.
    pub information: BTreeMap<String, InformationValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mobius: Option<MobiusAtoms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_witness: Option<PermutationTestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_mi_ab: Option<PermutationTestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dc_verdict: Option<DcVerdict>,
    pub warnings: Vec<String>,
}

impl A6Analysis {
    pub fn witness(&self, family: Family, theta: Option<f64>) -> Option<&WitnessResult> {
        self.witnesses
            .iter()
            .find(|r| r.family == family && same_theta(r.theta, theta))
            .map(|r| &r.witness)
    }
}

fn same_theta(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        _ => false,
    }
}

fn var_key(vars: &[&str]) -> String {
    vars.concat()
}

/// Records of one family/θ slice, bit order as the circuits'.
pub fn records_for(run: &A6Run, family: Family, theta: Option<f64>) -> Result<RecordSet> {
    let mut set = RecordSet::new(A6_LABELS.iter().map(|s| s.to_string()).collect());
    for c in run
        .circuits
        .iter()
        .filter(|c| c.spec.family == family && same_theta(c.spec.theta, theta))
    {
        let counts = c.table.counts().ok_or_else(|| {
            Error::InvalidQuery("per-shot records need sampled counts, not exact tables".into())
        })?;
        set.push_counts(c.spec.lane_id as u32, &c.spec.name(), c.label, counts)?;
    }
    Ok(set)
}

/// Equal-weight mixture of exact tables of one slice, with the label
/// prepended to the bit order.
fn exact_joint(run: &A6Run, family: Family, theta: Option<f64>) -> Result<ProbabilityTable> {
    let slice: Vec<_> = run
        .circuits
        .iter()
        .filter(|c| c.spec.family == family && same_theta(c.spec.theta, theta))
        .collect();
    if slice.is_empty() {
        return Err(Error::IncompleteDesign(format!("no {family} circuits")));
    }
    let w = 1.0 / slice.len() as f64;
    let mut probs: BTreeMap<String, f64> = BTreeMap::new();
    for c in slice {
        for (k, p) in c.table.weighted() {
            *probs.entry(format!("{}{k}", c.label)).or_insert(0.0) +=
                w * p / c.table.total_weight();
        }
    }
    let mut order = vec![LABEL.to_string()];
    order.extend(A6_LABELS.iter().map(|s| s.to_string()));
    ProbabilityTable::new(order, probs)
}

fn witness_slice(run: &A6Run, family: Family, theta: Option<f64>) -> Result<WitnessResult> {
    let inputs = run
        .circuits
        .iter()
        .filter(|c| c.spec.family == family && same_theta(c.spec.theta, theta))
        .map(|c| {
            Ok(LaneWitness {
                lane: c.spec.lane_id,
                replicate: c.spec.replicate,
                label: c.label,
                value: ex_mean_witness(&c.table, "A", "B")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    lane_balanced_delta(&inputs)
}

fn context_quality(run: &A6Run) -> Result<Option<ContextQuality>> {
    let mut per: BTreeMap<usize, [Option<f64>; 2]> = BTreeMap::new();
    for c in run
        .circuits
        .iter()
        .filter(|c| c.spec.family == Family::CtxOnly)
    {
        let v = ctx_ok(&c.table, c.triple)?;
        per.entry(c.spec.lane_id).or_default()[c.spec.replicate as usize] = Some(v);
    }
    if per.is_empty() {
        return Ok(None);
    }
    let mut per_lane = Vec::with_capacity(per.len());
    for (lane, [r0, r1]) in per {
        let (r0, r1) = match (r0, r1) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::IncompleteDesign(format!(
                    "lane {lane} lacks a CTXONLY replicate"
                )))
            }
        };
        per_lane.push(LaneContextQuality {
            lane,
            ctx_ok_r0: r0,
            ctx_ok_r1: r1,
            worst: r0.min(r1),
        });
    }
    let mean = per_lane
        .iter()
        .map(|l| 0.5 * (l.ctx_ok_r0 + l.ctx_ok_r1))
        .sum::<f64>()
        / per_lane.len() as f64;
    let worst_lane = per_lane
        .iter()
        .map(|l| l.worst)
        .fold(f64::INFINITY, f64::min);
    Ok(Some(ContextQuality {
        per_lane,
        mean,
        worst_lane,
    }))
}

fn information_sets() -> Vec<Vec<&'static str>> {
    vec![
        vec!["C0"],
        vec!["C1"],
        vec!["C2"],
        vec!["C0", "C1"],
        vec!["C0", "C2"],
        vec!["C1", "C2"],
        vec!["C0", "C1", "C2"],
        vec!["A"],
        vec!["B"],
        vec!["A", "B"],
    ]
}

/// Runs every analysis stage the run's families support.
pub fn analyze_a6(run: &A6Run, options: &AnalysisOptions) -> Result<A6Analysis> {
    let plan = &run.plan;
    let sampled = run.mode == RunMode::Sampled;
    let has = |f: Family| plan.families.contains(&f);
    let mut warnings = Vec::new();
    let reference_theta = if has(Family::Active) {
        plan.reference_theta()
    } else {
        None
    };
    let delta_stat = RecordStatistic::LaneBalancedDelta {
        probe: ["A".into(), "B".into()],
    };

    // witnesses
    let mut witnesses = Vec::new();
    for &family in plan.families.iter().filter(|f| **f != Family::CtxOnly) {
        let thetas: Vec<Option<f64>> = if family.uses_theta() {
            plan.thetas.iter().map(|&t| Some(t)).collect()
        } else {
            vec![None]
        };
        for theta in thetas {
            let mut witness = witness_slice(run, family, theta)?;
            if sampled {
                let records = records_for(run, family, theta)?;
                let f = delta_stat.bind(&records)?;
                let key = format!("witness_ci/{family}/{}", theta.map_or(0, f64::to_bits));
                let (lo, hi) = bootstrap_ci(
                    &records.records,
                    ShotRecord::lane_circuit,
                    &f,
                    options.n_resamples,
                    options.confidence,
                    rng::derive_str(options.seed, &key),
                )?;
                witness.ci = Some([lo, hi]);
            }
            witnesses.push(WitnessRow {
                family,
                theta,
                witness,
            });
        }
    }
    if !plan.lanes.is_multiple_of(8) {
        warnings.push(format!(
            "{} lanes do not cover every context triple equally; screens assume a balanced ensemble",
            plan.lanes
        ));
    }

    let context_quality = context_quality(run)?;

    // information, Möbius atoms and inference at the reference θ
    let mut information = BTreeMap::new();
    let mut mobius = None;
    let mut permutation_witness = None;
    let mut permutation_mi_ab = None;
    let mut dc_verdict = None;
    if let Some(theta) = reference_theta {
        let theta = Some(theta);
        if sampled {
            let records = records_for(run, Family::Active, theta)?;
            let joint = records.joint_counts(LABEL)?;
            for vars in information_sets() {
                let plug = plugin_mutual_information(&joint, &[LABEL], &vars)?;
                let stat = RecordStatistic::MutualInformation {
                    vars: vars.iter().map(|v| v.to_string()).collect(),
                    corrected: true,
                };
                let mm = stat.bind(&records)?(&records.records);
                information.insert(
                    var_key(&vars),
                    InformationValue {
                        plugin_bits: plug.raw_bits,
                        miller_madow_raw_bits: Some(mm),
                        miller_madow_bits: Some(mm.max(0.0)),
                    },
                );
            }
            mobius = Some(mobius_atoms(&joint, LABEL, &CONTEXT)?);

            let f = delta_stat.bind(&records)?;
            let perm = permutation_test(
                &records.records,
                &f,
                options.n_shuffles,
                rng::derive_str(options.seed, "permutation/witness"),
            )?;
            let mi_ab = RecordStatistic::MutualInformation {
                vars: vec!["A".into(), "B".into()],
                corrected: true,
            };
            let g = mi_ab.bind(&records)?;
            permutation_mi_ab = Some(permutation_test(
                &records.records,
                &g,
                options.n_shuffles,
                rng::derive_str(options.seed, "permutation/mi_ab"),
            )?);
            let witness = witnesses
                .iter()
                .find(|r| r.family == Family::Active && same_theta(r.theta, theta))
                .map(|r| r.witness.clone())
                .expect("reference witness computed above");
            dc_verdict = Some(dc_condition_check(
                &records,
                &CONTEXT,
                &witness,
                options.mi_threshold,
                options.p_threshold,
                &perm,
                options.n_resamples,
                rng::derive_str(options.seed, "screens"),
            )?);
            permutation_witness = Some(perm);
        } else {
            let joint = exact_joint(run, Family::Active, theta)?;
            for vars in information_sets() {
                let plug = plugin_mutual_information(&joint, &[LABEL], &vars)?;
                information.insert(
                    var_key(&vars),
                    InformationValue {
                        plugin_bits: plug.raw_bits,
                        miller_madow_raw_bits: None,
                        miller_madow_bits: None,
                    },
                );
            }
            mobius = Some(mobius_atoms(&joint, LABEL, &CONTEXT)?);
            warnings.push(
                "exact mode: permutation, bootstrap and screen intervals are not computed".into(),
            );
        }
    }
    if let Some(m) = &mobius {
        warnings.extend(m.warnings.iter().map(|w| format!("mobius: {w}")));
    }

    // kernel decomposition and fit
    let mut kernel = None;
    if has(Family::Active) && has(Family::Passive1) && has(Family::Passive2) {
        let find = |f: Family, t: Option<f64>| {
            witnesses
                .iter()
                .find(|r| r.family == f && same_theta(r.theta, t))
                .map(|r| r.witness.clone())
        };
        let active: Vec<(f64, WitnessResult)> = plan
            .thetas
            .iter()
            .map(|&t| (t, find(Family::Active, Some(t)).expect("computed")))
            .collect();
        let p1 = find(Family::Passive1, None).expect("computed");
        let p2 = find(Family::Passive2, None).expect("computed");
        let estimate = decompose_gamma(&active, &p1, &p2, 1.0)?;
        let reference = reference_theta.expect("ACTIVE present");
        let points: Vec<CurvePoint> = active
            .iter()
            .map(|(t, w)| CurvePoint::new(*t, w.delta_e, (w.sem > 0.0).then_some(w.sem)))
            .collect();
        let fit = if points.len() >= 3 {
            match fit_delta_curve(&points) {
                Ok(f) => Some(f),
                Err(e) => {
                    warnings.push(format!("fit skipped: {e}"));
                    None
                }
            }
        } else {
            warnings.push(format!(
                "fit skipped: {} thetas, at least 3 needed",
                points.len()
            ));
            None
        };
        let gamma_rel_predicted = match &mobius {
            Some(atoms) => plan
                .thetas
                .iter()
                .map(|&t| (t, gamma_rel_predict(atoms, t, options.coupling_scale)))
                .collect(),
            None => Vec::new(),
        };
        kernel = Some(KernelReport {
            gamma_rel_by_class: estimate.gamma_rel_by_class(reference),
            suppression_by_class: estimate.suppression_by_class(reference),
            reference_theta: reference,
            residual_context_conditioned: fit.map(|f| f.residual_sum_of_squares(&points)),
            residual_proxy_only: proxy_only_residual(&points),
            fit,
            gamma_rel_predicted,
            estimate,
        });
    }

    Ok(A6Analysis {
        mode: run.mode,
        lanes: plan.lanes,
        shots: plan.shots,
        options: options.clone(),
        reference_theta,
        witnesses,
        context_quality,
        information,
        mobius,
        permutation_witness,
        permutation_mi_ab,
        kernel,
        dc_verdict,
        warnings,
    })
}
