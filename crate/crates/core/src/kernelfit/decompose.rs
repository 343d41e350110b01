use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::WitnessResult;
use crate::infostats::MobiusAtoms;
use crate::{Error, Result};

/// Floor applied to witness ratios before taking logarithms.
pub const CLAMP_FLOOR: f64 = 1e-6;

/// Residual kernel for one (θ, parity class) condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionKernel {
    pub theta: f64,
    pub class: u8,
    /// E_active,class / (E_ideal · D_loc · e^{−Γ_proxy}) before clamping.
    pub ratio: f64,
    /// Nats; negative when the class witness exceeds the passive baseline.
    pub gamma_rel: f64,
    /// exp(−(Γ_loc + Γ_proxy + Γ_rel)).
    pub suppression: f64,
    /// The ratio fell below the clamp floor.
    pub saturated: bool,
}

/// Operational split Γ_eff = Γ_loc + Γ_proxy + Γ_rel, all in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub gamma_loc: f64,
    pub gamma_proxy: f64,
    pub d_loc: f64,
    pub loc_saturated: bool,
    pub proxy_saturated: bool,
    /// Interaction-off reference witness.
    pub ideal_off: f64,
    pub conditions: Vec<ConditionKernel>,
    /// Weight of each context-defining event; 1 by default.
    pub record_weights_r: BTreeMap<String, f64>,
    /// Overlap of each (event, subset, observable, θ) with the witness,
    /// normalized to [0, 1] as (1 − cos θ)/2 for the full context set.
    pub overlaps_omega: BTreeMap<String, f64>,
}

impl KernelEstimate {
    /// Γ_rel of both classes at the planned θ closest to `theta`.
    pub fn gamma_rel_by_class(&self, theta: f64) -> BTreeMap<String, f64> {
        self.at_theta(theta)
            .map(|c| (format!("Y={}", c.class), c.gamma_rel))
            .collect()
    }

    /// Suppression factor of both classes at the planned θ closest to `theta`.
    pub fn suppression_by_class(&self, theta: f64) -> BTreeMap<String, f64> {
        self.at_theta(theta)
            .map(|c| (format!("Y={}", c.class), c.suppression))
            .collect()
    }

    fn at_theta(&self, theta: f64) -> impl Iterator<Item = &ConditionKernel> {
        let nearest = self
            .conditions
            .iter()
            .map(|c| c.theta)
            .min_by(|a, b| (a - theta).abs().total_cmp(&(b - theta).abs()));
        self.conditions
            .iter()
            .filter(move |c| Some(c.theta) == nearest)
    }
}

fn clamped_log(ratio: f64, upper: f64) -> (f64, bool) {
    let saturated = !(ratio >= CLAMP_FLOOR);
    let r = if saturated {
        CLAMP_FLOOR
    } else {
        ratio.min(upper)
    };
    // `0.0 - x` rather than `-x` keeps ln(1) from printing as -0
    (0.0 - r.ln(), saturated)
}

fn class_mean(w: &WitnessResult) -> f64 {
    0.5 * (w.e_even + w.e_odd)
}

/// Splits the witness decay into local, proxy and residual parts.
///
/// With passive witnesses averaged over both classes,
/// D_loc = clamp(E_p1 / E_off, ε, 1], Γ_loc = −ln D_loc,
/// Γ_proxy = −ln clamp(E_p2 / E_p1, ε, 1], and for each θ and class
/// Γ_rel = −ln clamp(E_active,class / (E_off · D_loc · e^{−Γ_proxy}), ε, ∞).
/// Ratios below ε are flagged as saturated instead of failing.
pub fn decompose_gamma(
    active: &[(f64, WitnessResult)],
    passive1: &WitnessResult,
    passive2: &WitnessResult,
    ideal_off: f64,
) -> Result<KernelEstimate> {
    if !(ideal_off > 0.0) {
        return Err(Error::InvalidQuery(format!(
            "ideal reference {ideal_off} must be positive"
        )));
    }
    let e_p1 = class_mean(passive1);
    let e_p2 = class_mean(passive2);
    let (gamma_loc, loc_saturated) = clamped_log(e_p1 / ideal_off, 1.0);
    let d_loc = (-gamma_loc).exp();
    let (gamma_proxy, proxy_saturated) = clamped_log(e_p2 / e_p1, 1.0);
    let baseline = ideal_off * d_loc * (-gamma_proxy).exp();

    let mut conditions = Vec::with_capacity(2 * active.len());
    let mut overlaps_omega = BTreeMap::new();
    for (theta, w) in active {
        for (class, e) in [(0u8, w.e_even), (1u8, w.e_odd)] {
            let ratio = e / baseline;
            let (gamma_rel, saturated) = clamped_log(ratio, f64::INFINITY);
            conditions.push(ConditionKernel {
                theta: *theta,
                class,
                ratio,
                gamma_rel,
                suppression: (-(gamma_loc + gamma_proxy + gamma_rel)).exp(),
                saturated,
            });
        }
        overlaps_omega.insert(
            format!("context_parity|C0C1C2|E_X,mean|theta={theta:.6}"),
            (1.0 - theta.cos()) / 2.0,
        );
    }
    Ok(KernelEstimate {
        gamma_loc,
        gamma_proxy,
        d_loc,
        loc_saturated,
        proxy_saturated,
        ideal_off,
        conditions,
        record_weights_r: BTreeMap::from([("context_parity".to_string(), 1.0)]),
        overlaps_omega,
    })
}

/// scale · Σ_S f̃⁺(S) ω(S), with ω = 1 − cos θ on the full context set and
/// 0 on every proper subset.
pub fn gamma_rel_predict(atoms: &MobiusAtoms, theta: f64, coupling_scale: f64) -> f64 {
    let top = atoms
        .normalized_positive
        .get(&atoms.top_key())
        .copied()
        .unwrap_or(0.0);
    coupling_scale * top * (1.0 - theta.cos())
}
