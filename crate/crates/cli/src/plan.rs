//! Experiment plan documents.

use serde::{Deserialize, Serialize};

use ctxkernel::harness::{A62Plan, A6Plan, Branch, Family, NoiseTable, PairBasis};
use ctxkernel::pipeline::AnalysisOptions;
use ctxkernel::simcore::NoiseModel;

use crate::error::CliError;

/// Schema identifier accepted in the `schema` field of plan files.
pub const PLAN_SCHEMA: &str = "ctxkernel.plan/v1";

/// Parity-context plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A6Document {
    #[serde(default = "schema_id")]
    pub schema: String,
    pub experiment: String,
    pub lanes: usize,
    pub shots: u64,
    #[serde(default)]
    pub thetas: Vec<f64>,
    pub families: Vec<Family>,
    #[serde(default)]
    pub basis: PairBasis,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise_table: NoiseTable,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

/// Eraser-sweep plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A62Document {
    #[serde(default = "schema_id")]
    pub schema: String,
    pub experiment: String,
    pub lambdas: Vec<f64>,
    pub branches: Vec<Branch>,
    /// Defaults to 8 equally spaced phases over one fringe period.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Lane 0's profile is used for the whole sweep.
    #[serde(default)]
    pub noise_table: NoiseTable,
    /// Complementarity tolerance; defaults to 0.02 sampled, 1e-9 exact.
    #[serde(default)]
    pub tol: Option<f64>,
}

fn schema_id() -> String {
    PLAN_SCHEMA.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanDocument {
    A6(A6Document),
    A62(A62Document),
}

#[derive(Deserialize)]
struct Header {
    experiment: Option<serde_json::Value>,
    schema: Option<serde_json::Value>,
}

fn schema_error(path: &str, err: serde_json::Error) -> CliError {
    if err.line() > 0 {
        CliError::Plan(format!("{path}:{}:{}: {err}", err.line(), err.column()))
    } else {
        CliError::Plan(format!("{path}: {err}"))
    }
}

impl PlanDocument {
    /// Parses and validates a plan. Diagnostics carry `path:line:column`.
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let header: Header = serde_json::from_str(text).map_err(|e| schema_error(path, e))?;
        if let Some(schema) = header.schema {
            if schema.as_str() != Some(PLAN_SCHEMA) {
                return Err(CliError::Plan(format!(
                    "{path}: schema {schema} is not supported; expected \"{PLAN_SCHEMA}\""
                )));
            }
        }
        let doc = match header.experiment.as_ref().and_then(|v| v.as_str()) {
            Some("A6") => {
                PlanDocument::A6(serde_json::from_str(text).map_err(|e| schema_error(path, e))?)
            }
            Some("A6.2") => {
                PlanDocument::A62(serde_json::from_str(text).map_err(|e| schema_error(path, e))?)
            }
            Some(other) => {
                return Err(CliError::Plan(format!(
                    "{path}: experiment {other:?} is not one of \"A6\", \"A6.2\""
                )))
            }
            None => {
                return Err(CliError::Plan(format!(
                    "{path}: missing string field \"experiment\""
                )))
            }
        };
        doc.validate()
            .map_err(|e| CliError::Plan(format!("{path}: {e}")))?;
        Ok(doc)
    }

    pub fn validate(&self) -> ctxkernel::Result<()> {
        match self {
            PlanDocument::A6(d) => d.plan().validate(),
            PlanDocument::A62(d) => {
                d.plan().validate()?;
                d.noise_table.validate()
            }
        }
    }

    pub fn experiment(&self) -> &'static str {
        match self {
            PlanDocument::A6(_) => "A6",
            PlanDocument::A62(_) => "A6.2",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            PlanDocument::A6(d) => d.seed,
            PlanDocument::A62(d) => d.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            PlanDocument::A6(d) => d.seed = seed,
            PlanDocument::A62(d) => d.seed = seed,
        }
    }

    pub fn set_shots(&mut self, shots: u64) {
        match self {
            PlanDocument::A6(d) => d.shots = shots,
            PlanDocument::A62(d) => d.shots = shots,
        }
    }

    pub fn set_noise_table(&mut self, table: NoiseTable) {
        match self {
            PlanDocument::A6(d) => d.noise_table = table,
            PlanDocument::A62(d) => d.noise_table = table,
        }
    }

    /// Canonical serialization, the input of the plan hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

impl A6Document {
    pub fn plan(&self) -> A6Plan {
        A6Plan {
            lanes: self.lanes,
            shots: self.shots,
            thetas: self.thetas.clone(),
            families: self.families.clone(),
            basis: self.basis,
            noise_table: self.noise_table.clone(),
        }
    }

    /// The default 8-lane, 768-shot, four-θ plan, noiseless.
    pub fn example() -> Self {
        let p = A6Plan::default();
        Self {
            schema: schema_id(),
            experiment: "A6".into(),
            lanes: p.lanes,
            shots: p.shots,
            thetas: p.thetas,
            families: Family::ALL.to_vec(),
            basis: p.basis,
            seed: 2026,
            noise_table: NoiseTable::default(),
            analysis: AnalysisOptions::default(),
        }
    }
}

impl A62Document {
    pub fn plan(&self) -> A62Plan {
        A62Plan {
            lambda_values: self.lambdas.clone(),
            branches: self.branches.clone(),
            phase_scan: self
                .phases
                .clone()
                .unwrap_or_else(|| A62Plan::uniform_phases(8)),
            shots: self.shots,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise_table.for_lane(0)
    }

    /// The default 9-λ, 384-shot sweep under a mild hardware-like profile.
    pub fn example() -> Self {
        let p = A62Plan::default();
        Self {
            schema: schema_id(),
            experiment: "A6.2".into(),
            lambdas: p.lambda_values,
            branches: p.branches,
            phases: None,
            shots: p.shots,
            seed: 2026,
            noise_table: NoiseTable::uniform("hardware_like", NoiseModel::hardware_like()),
            tol: None,
        }
    }
}
