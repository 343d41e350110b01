//! Run-directory layout: plan, manifest and per-circuit counts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ctxkernel::harness::{
    A62Circuit, A62Run, A6Circuit, A6Run, Branch, LanePlan, RunMode, RunTable, Triple,
};

use crate::error::CliError;
use crate::plan::PlanDocument;

pub const MANIFEST_SCHEMA: &str = "ctxkernel.manifest/v1";
pub const PLAN_FILE: &str = "plan.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COUNTS_DIR: &str = "counts";

/// Provenance of one executed circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitEntry {
    pub name: String,
    pub file: String,
    pub seed: u64,
    #[serde(flatten)]
    pub detail: CircuitDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircuitDetail {
    A6 {
        spec: LanePlan,
        triple: Triple,
        label: u8,
    },
    A62 {
        branch: Branch,
        lambda_index: usize,
        lambda: f64,
        phase_index: usize,
        phi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub experiment: String,
    pub plan_hash: String,
    pub seed: u64,
    pub mode: RunMode,
    /// Seconds since the Unix epoch at which the run finished.
    pub timestamp: u64,
    pub circuits: Vec<CircuitEntry>,
}

/// An executed run, as loaded back from disk.
#[derive(Debug, Clone)]
pub enum LoadedRun {
    A6(A6Run),
    A62(A62Run),
}

pub fn plan_hash(plan: &PlanDocument) -> String {
    hex::encode(Sha256::digest(plan.canonical_json().as_bytes()))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::analysis)?;
    text.push('\n');
    write_file(path, text)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn counts_file(name: &str) -> String {
    format!("{COUNTS_DIR}/{name}.json")
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Persists plan, counts and manifest of an executed run.
pub fn write_run(dir: &Path, plan: &PlanDocument, run: &LoadedRun) -> Result<Manifest, CliError> {
    write_file(&dir.join(PLAN_FILE), plan.canonical_json() + "\n")?;
    let (mode, entries): (RunMode, Vec<(CircuitEntry, &RunTable)>) = match run {
        LoadedRun::A6(r) => (
            r.mode,
            r.circuits
                .iter()
                .map(|c| {
                    let name = c.spec.name();
                    let entry = CircuitEntry {
                        file: counts_file(&name),
                        name,
                        seed: c.seed,
                        detail: CircuitDetail::A6 {
                            spec: c.spec.clone(),
                            triple: c.triple,
                            label: c.label,
                        },
                    };
                    (entry, &c.table)
                })
                .collect(),
        ),
        LoadedRun::A62(r) => (
            r.mode,
            r.circuits
                .iter()
                .map(|c| {
                    let name = c.name();
                    let entry = CircuitEntry {
                        file: counts_file(&name),
                        name,
                        seed: c.seed,
                        detail: CircuitDetail::A62 {
                            branch: c.branch,
                            lambda_index: c.lambda_index,
                            lambda: c.lambda,
                            phase_index: c.phase_index,
                            phi: c.phi,
                        },
                    };
                    (entry, &c.table)
                })
                .collect(),
        ),
    };
    for (entry, table) in &entries {
        write_json(&dir.join(&entry.file), table)?;
    }
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        experiment: plan.experiment().into(),
        plan_hash: plan_hash(plan),
        seed: plan.seed(),
        mode,
        timestamp: timestamp(),
        circuits: entries.into_iter().map(|(e, _)| e).collect(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Loads a run directory.
///
/// The circuit list is rebuilt from the plan, so a directory holding only
/// `plan.json` and `counts/<circuit>.json` files (for instance counts
/// collected elsewhere) is analyzable; the manifest, when present,
/// supplies the run mode and is checked against the plan hash.
pub fn load_run(dir: &Path) -> Result<(PlanDocument, LoadedRun), CliError> {
    let plan_path = dir.join(PLAN_FILE);
    if !dir.is_dir() || !plan_path.is_file() {
        return Err(CliError::Analysis(format!(
            "no records found in {}",
            dir.display()
        )));
    }
    let plan = PlanDocument::parse(&read_text(&plan_path)?, &plan_path.display().to_string())?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Option<Manifest> = if manifest_path.is_file() {
        let m: Manifest = serde_json::from_str(&read_text(&manifest_path)?)
            .map_err(|e| CliError::io(&manifest_path, e))?;
        if m.plan_hash != plan_hash(&plan) {
            return Err(CliError::Analysis(format!(
                "{}: plan hash does not match {PLAN_FILE}",
                manifest_path.display()
            )));
        }
        Some(m)
    } else {
        None
    };
    let seed_of = |name: &str| -> u64 {
        manifest
            .as_ref()
            .and_then(|m| m.circuits.iter().find(|c| c.name == name))
            .map_or(0, |c| c.seed)
    };

    let load = |name: &str| -> Result<Option<RunTable>, CliError> {
        let path = dir.join(counts_file(name));
        if !path.is_file() {
            return Ok(None);
        }
        Ok(Some(
            parse_table(&read_text(&path)?).map_err(|e| CliError::io(&path, e))?,
        ))
    };

    let (run, mode) = match &plan {
        PlanDocument::A6(doc) => {
            let plan = doc.plan();
            let mut circuits = Vec::new();
            let mut found = 0;
            let mut missing = Vec::new();
            for spec in plan.lane_plans() {
                let name = spec.name();
                match load(&name)? {
                    Some(table) => {
                        found += 1;
                        circuits.push(A6Circuit {
                            triple: spec.triple(),
                            label: spec.label(),
                            seed: seed_of(&name),
                            spec,
                            table,
                        });
                    }
                    None => missing.push(name),
                }
            }
            check_missing(dir, found, &missing)?;
            let mode = mode_of(&circuits.iter().map(|c| &c.table).collect::<Vec<_>>())?;
            (
                LoadedRun::A6(A6Run {
                    plan,
                    seed: doc.seed,
                    mode,
                    circuits,
                }),
                mode,
            )
        }
        PlanDocument::A62(doc) => {
            let plan = doc.plan();
            let mut circuits = Vec::new();
            let mut found = 0;
            let mut missing = Vec::new();
            for &branch in &plan.branches {
                for (li, &lambda) in plan.lambda_values.iter().enumerate() {
                    let phases: Vec<(usize, f64)> = if branch.scans_phase() {
                        plan.phase_scan.iter().copied().enumerate().collect()
                    } else {
                        vec![(0, 0.0)]
                    };
                    for (pi, phi) in phases {
                        let name = format!("{branch}-l{li:02}-p{pi:02}");
                        match load(&name)? {
                            Some(table) => {
                                found += 1;
                                let seed = seed_of(&name);
                                let c = A62Circuit {
                                    branch,
                                    lambda_index: li,
                                    lambda,
                                    phase_index: pi,
                                    phi,
                                    seed,
                                    table,
                                };
                                debug_assert_eq!(c.name(), name);
                                circuits.push(c);
                            }
                            None => missing.push(name),
                        }
                    }
                }
            }
            check_missing(dir, found, &missing)?;
            let mode = mode_of(&circuits.iter().map(|c| &c.table).collect::<Vec<_>>())?;
            (
                LoadedRun::A62(A62Run {
                    plan,
                    seed: doc.seed,
                    mode,
                    circuits,
                }),
                mode,
            )
        }
    };
    if let Some(m) = &manifest {
        if m.mode != mode {
            return Err(CliError::Analysis(format!(
                "manifest mode {:?} disagrees with the stored tables",
                m.mode
            )));
        }
    }
    Ok((plan, run))
}

/// Sampled counts carry a `counts` map, exact tables a `probabilities`
/// map; dispatching on the key gives precise parse errors.
fn parse_table(text: &str) -> Result<RunTable, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("counts").is_some() {
        Ok(RunTable::Counts(serde_json::from_str(text)?))
    } else {
        Ok(RunTable::Exact(serde_json::from_str(text)?))
    }
}

fn check_missing(dir: &Path, found: usize, missing: &[String]) -> Result<(), CliError> {
    if found == 0 {
        return Err(CliError::Analysis(format!(
            "no records found in {}",
            dir.display()
        )));
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).map(String::as_str).collect();
        return Err(CliError::Analysis(format!(
            "{}: {} planned circuit(s) have no counts file, e.g. {}",
            dir.display(),
            missing.len(),
            shown.join(", ")
        )));
    }
    Ok(())
}

fn mode_of(tables: &[&RunTable]) -> Result<RunMode, CliError> {
    let exact = tables
        .iter()
        .filter(|t| matches!(t, RunTable::Exact(_)))
        .count();
    match exact {
        0 => Ok(RunMode::Sampled),
        n if n == tables.len() => Ok(RunMode::Exact),
        _ => Err(CliError::Analysis(
            "run mixes sampled counts and exact tables".into(),
        )),
    }
}

/// Output root for runs without an explicit `--out`.
pub fn default_out_root() -> PathBuf {
    std::env::var_os("CTXKERNEL_OUT_ROOT").map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}
