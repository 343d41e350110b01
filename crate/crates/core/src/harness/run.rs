use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::a6::{Family, LanePlan, PairBasis, Replicate};
use super::a62::{build_a62_circuit, A62Plan, Branch};
use super::ensemble::Triple;
use crate::simcore::{
    exact_distribution, sample_counts, Circuit, CountsTable, NoiseModel, OutcomeTable,
    ProbabilityTable,
};
use crate::{par, rng, Error, Result};

/// Named noise profiles and their assignment to lanes.
///
/// Lane `ℓ` uses `lane_profiles[ℓ mod len]`; an empty assignment means
/// every lane is noiseless.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseTable {
    pub profiles: BTreeMap<String, NoiseModel>,
    pub lane_profiles: Vec<String>,
}

impl NoiseTable {
    /// Every lane uses `model`.
    pub fn uniform(name: &str, model: NoiseModel) -> Self {
        Self {
            profiles: BTreeMap::from([(name.to_string(), model)]),
            lane_profiles: vec![name.to_string()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, model) in &self.profiles {
            model
                .validate()
                .map_err(|e| Error::InvalidPlan(format!("noise profile {name:?}: {e}")))?;
        }
        if let Some(missing) = self
            .lane_profiles
            .iter()
            .find(|p| !self.profiles.contains_key(*p))
        {
            return Err(Error::InvalidPlan(format!(
                "lane profile {missing:?} is not defined"
            )));
        }
        Ok(())
    }

    pub fn profile_id(&self, lane: usize) -> Option<&str> {
        if self.lane_profiles.is_empty() {
            None
        } else {
            Some(&self.lane_profiles[lane % self.lane_profiles.len()])
        }
    }

    pub fn for_lane(&self, lane: usize) -> NoiseModel {
        self.profile_id(lane)
            .and_then(|id| self.profiles.get(id))
            .cloned()
            .unwrap_or_default()
    }
}

/// Sampled shots or the exact outcome distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Sampled,
    Exact,
}

/// Outcome table produced by one circuit in either run mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RunTable {
    Counts(CountsTable),
    Exact(ProbabilityTable),
}

impl RunTable {
    pub fn counts(&self) -> Option<&CountsTable> {
        match self {
            RunTable::Counts(c) => Some(c),
            RunTable::Exact(_) => None,
        }
    }

    fn execute(
        circuit: &Circuit,
        mode: RunMode,
        shots: u64,
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<Self> {
        Ok(match mode {
            RunMode::Sampled => RunTable::Counts(sample_counts(circuit, shots, noise, seed)?),
            RunMode::Exact => RunTable::Exact(exact_distribution(circuit, noise)?),
        })
    }
}

impl OutcomeTable for RunTable {
    fn bit_order(&self) -> &[String] {
        match self {
            RunTable::Counts(c) => c.bit_order(),
            RunTable::Exact(p) => p.bit_order(),
        }
    }

    fn weighted(&self) -> Vec<(&str, f64)> {
        match self {
            RunTable::Counts(c) => c.weighted(),
            RunTable::Exact(p) => p.weighted(),
        }
    }

    fn total_weight(&self) -> f64 {
        match self {
            RunTable::Counts(c) => c.total_weight(),
            RunTable::Exact(p) => p.total_weight(),
        }
    }
}

/// Parity-context experiment plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A6Plan {
    pub lanes: usize,
    pub shots: u64,
    #[serde(default)]
    pub thetas: Vec<f64>,
    pub families: Vec<Family>,
    #[serde(default)]
    pub basis: PairBasis,
    #[serde(default)]
    pub noise_table: NoiseTable,
}

impl Default for A6Plan {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            lanes: 8,
            shots: 768,
            thetas: vec![0.0, PI / 4.0, PI / 2.0, PI],
            families: Family::ALL.to_vec(),
            basis: PairBasis::XX,
            noise_table: NoiseTable::default(),
        }
    }
}

impl A6Plan {
    pub fn validate(&self) -> Result<()> {
        if self.lanes == 0 {
            return Err(Error::InvalidPlan("lanes must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidPlan("shots must be at least 1".into()));
        }
        if self.families.is_empty() {
            return Err(Error::InvalidPlan("families is empty".into()));
        }
        for (i, f) in self.families.iter().enumerate() {
            if self.families[..i].contains(f) {
                return Err(Error::InvalidPlan(format!("family {f} listed twice")));
            }
        }
        if self.families.contains(&Family::Active) && self.thetas.is_empty() {
            return Err(Error::InvalidPlan("ACTIVE requested without thetas".into()));
        }
        if let Some(t) = self.thetas.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidPlan(format!("theta {t} is not finite")));
        }
        for (i, t) in self.thetas.iter().enumerate() {
            if self.thetas[..i].iter().any(|u| (u - t).abs() < 1e-9) {
                return Err(Error::InvalidPlan(format!("theta {t} listed twice")));
            }
        }
        self.noise_table.validate()
    }

    /// θ used for screens and permutation tests: π/2 when present,
    /// otherwise the largest planned θ.
    pub fn reference_theta(&self) -> Option<f64> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if let Some(&t) = self.thetas.iter().find(|t| (**t - half_pi).abs() < 1e-9) {
            return Some(t);
        }
        self.thetas.iter().copied().max_by(f64::total_cmp)
    }

    /// Every circuit of the plan, ordered by family, θ, lane, replicate.
    pub fn lane_plans(&self) -> Vec<LanePlan> {
        let mut out = Vec::new();
        for &family in &self.families {
            let thetas: Vec<Option<f64>> = if family.uses_theta() {
                self.thetas.iter().map(|&t| Some(t)).collect()
            } else {
                vec![None]
            };
            for theta in thetas {
                for lane in 0..self.lanes {
                    for replicate in Replicate::BOTH {
                        out.push(LanePlan {
                            lane_id: lane,
                            replicate,
                            family,
                            theta,
                            basis: self.basis,
                            shots: self.shots,
                            noise_profile_id: self.noise_table.profile_id(lane).map(str::to_string),
                        });
                    }
                }
            }
        }
        out
    }
}

/// One executed circuit of the parity-context experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A6Circuit {
    pub spec: LanePlan,
    pub triple: Triple,
    pub label: u8,
    pub seed: u64,
    pub table: RunTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A6Run {
    pub plan: A6Plan,
    pub seed: u64,
    pub mode: RunMode,
    pub circuits: Vec<A6Circuit>,
}

/// Seed of one circuit. It depends on lane, family, θ and triple but not on
/// the replicate, so a lane that hosts the same triple in both replicates
/// reproduces the same shots.
fn a6_seed(seed: u64, spec: &LanePlan) -> u64 {
    let theta = spec.theta.map_or(0, f64::to_bits);
    rng::derive_str(
        seed,
        &format!(
            "A6/{}/{}/{}/{theta:016x}/{}",
            spec.lane_id,
            spec.family,
            spec.basis,
            spec.triple()
        ),
    )
}

/// Executes every circuit of `plan` (concurrently where enabled).
pub fn run_a6(plan: &A6Plan, seed: u64, mode: RunMode) -> Result<A6Run> {
    plan.validate()?;
    let specs = plan.lane_plans();
    let circuits = par::map_slice(&specs, |spec| -> Result<A6Circuit> {
        let noise = plan.noise_table.for_lane(spec.lane_id);
        let circuit_seed = a6_seed(seed, spec);
        let table = RunTable::execute(&spec.circuit(), mode, spec.shots, &noise, circuit_seed)?;
        Ok(A6Circuit {
            spec: spec.clone(),
            triple: spec.triple(),
            label: spec.label(),
            seed: circuit_seed,
            table,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(A6Run {
        plan: plan.clone(),
        seed,
        mode,
        circuits,
    })
}

/// One executed eraser circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A62Circuit {
    pub branch: Branch,
    pub lambda_index: usize,
    pub lambda: f64,
    pub phase_index: usize,
    pub phi: f64,
    pub seed: u64,
    pub table: RunTable,
}

impl A62Circuit {
    pub fn name(&self) -> String {
        format!(
            "{}-l{:02}-p{:02}",
            self.branch, self.lambda_index, self.phase_index
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A62Run {
    pub plan: A62Plan,
    pub seed: u64,
    pub mode: RunMode,
    pub circuits: Vec<A62Circuit>,
}

/// Executes the eraser sweep. Phase-scanned branches run at every planned
/// phase; WHICH_Z and ERASE_X run once per λ at φ = 0.
pub fn run_a62(plan: &A62Plan, noise: &NoiseModel, seed: u64, mode: RunMode) -> Result<A62Run> {
    plan.validate()?;
    noise.validate()?;
    let mut points = Vec::new();
    for &branch in &plan.branches {
        for (li, &lambda) in plan.lambda_values.iter().enumerate() {
            if branch.scans_phase() {
                for (pi, &phi) in plan.phase_scan.iter().enumerate() {
                    points.push((branch, li, lambda, pi, phi));
                }
            } else {
                points.push((branch, li, lambda, 0, 0.0));
            }
        }
    }
    let circuits = par::map_slice(
        &points,
        |&(branch, li, lambda, pi, phi)| -> Result<A62Circuit> {
            let circuit_seed = rng::derive_str(seed, &format!("A62/{branch}/{li}/{pi}"));
            let circuit = build_a62_circuit(branch, lambda, phi);
            let table = RunTable::execute(&circuit, mode, plan.shots, noise, circuit_seed)?;
            Ok(A62Circuit {
                branch,
                lambda_index: li,
                lambda,
                phase_index: pi,
                phi,
                seed: circuit_seed,
                table,
            })
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(A62Run {
        plan: plan.clone(),
        seed,
        mode,
        circuits,
    })
}
