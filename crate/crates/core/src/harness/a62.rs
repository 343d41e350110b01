use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::simcore::{Basis, Circuit, Gate, Pauli};
use crate::{Error, Result};

/// Outcome labels of the eraser circuits: register q1..q3 and marker m.
pub const A62_LABELS: [&str; 4] = ["q1", "q2", "q3", "m"];
/// Register labels, whose X-parity is the fringe observable.
pub const REGISTER: [&str; 3] = ["q1", "q2", "q3"];

const Q1: usize = 0;
const Q2: usize = 1;
const Q3: usize = 2;
const ANC: usize = 3;

/// Branch of the eraser sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    /// Marker coupled, read out in Z.
    Mark,
    /// Marker coupled, read out in X (eraser basis).
    Erase,
    /// No marker; matched stochastic Z dephasing on q1.
    Local,
    /// Marker coupled; register and marker both read in Z (which-path).
    WhichZ,
    /// Marker coupled; register in X, marker in X, at a single phase.
    EraseX,
}

impl Branch {
    pub const ALL: [Branch; 5] = [
        Branch::Mark,
        Branch::Erase,
        Branch::Local,
        Branch::WhichZ,
        Branch::EraseX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Mark => "MARK",
            Branch::Erase => "ERASE",
            Branch::Local => "LOCAL",
            Branch::WhichZ => "WHICH_Z",
            Branch::EraseX => "ERASE_X",
        }
    }

    /// Branches swept over the analysis phase; the others run at φ = 0.
    pub fn scans_phase(self) -> bool {
        matches!(self, Branch::Mark | Branch::Erase | Branch::Local)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Branch::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidPlan(format!("unknown branch {s:?}")))
    }
}

/// Eraser sweep: marker strengths, branches and analysis phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A62Plan {
    pub lambda_values: Vec<f64>,
    pub branches: Vec<Branch>,
    pub phase_scan: Vec<f64>,
    pub shots: u64,
}

impl Default for A62Plan {
    fn default() -> Self {
        Self {
            lambda_values: (0..9).map(|k| k as f64 * PI / 8.0).collect(),
            branches: Branch::ALL.to_vec(),
            phase_scan: Self::uniform_phases(8),
            shots: 384,
        }
    }
}

impl A62Plan {
    /// Period of the register fringe ⟨XXX⟩(φ) ∝ cos 3φ.
    pub const FRINGE_PERIOD: f64 = 2.0 * PI / 3.0;
    pub const HARMONIC: u32 = 3;

    /// `n` equally spaced phases over one fringe period.
    pub fn uniform_phases(n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| k as f64 * Self::FRINGE_PERIOD / n as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_values.is_empty() {
            return Err(Error::InvalidPlan("lambda_values is empty".into()));
        }
        if let Some(l) = self
            .lambda_values
            .iter()
            .find(|l| !(0.0..=PI + 1e-12).contains(*l))
        {
            return Err(Error::InvalidPlan(format!("lambda {l} outside [0, pi]")));
        }
        if self.branches.is_empty() {
            return Err(Error::InvalidPlan("branches is empty".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidPlan("shots must be at least 1".into()));
        }
        if self.branches.iter().any(|b| b.scans_phase()) {
            // at least 4 distinct phases, spread over a full fringe period
            let mut reduced: Vec<f64> = self
                .phase_scan
                .iter()
                .map(|p| p.rem_euclid(Self::FRINGE_PERIOD))
                .collect();
            reduced.sort_by(f64::total_cmp);
            reduced.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            if reduced.len() < 4 {
                return Err(Error::InvalidPlan(format!(
                    "phase_scan has {} distinct phases per period; at least 4 are required",
                    reduced.len()
                )));
            }
            let mut widest_gap = Self::FRINGE_PERIOD - (reduced[reduced.len() - 1] - reduced[0]);
            for w in reduced.windows(2) {
                widest_gap = widest_gap.max(w[1] - w[0]);
            }
            if widest_gap > Self::FRINGE_PERIOD / 2.0 + 1e-9 {
                return Err(Error::InvalidPlan(
                    "phase_scan does not cover a full fringe period".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Eraser circuit on register (q1, q2, q3) and marker ancilla m.
///
/// The register is prepared in (|000⟩ + |111⟩)/√2. For the marked branches
/// the ancilla is pre-rotated by RY(π/2 − λ/2) and then rotated by a further
/// RY(λ) when q1 = 1, so the two marker states sit symmetrically about the X
/// axis with overlap η(λ) = cos(λ/2). Each register qubit then receives
/// RZ(φ) and is read out in X, giving the fringe ⟨XXX⟩ = η cos 3φ.
pub fn build_a62_circuit(branch: Branch, lambda: f64, phi: f64) -> Circuit {
    let mut c = Circuit::new(4).with_labels(A62_LABELS);
    c.gate(Gate::H { qubit: Q1 })
        .gate(Gate::Cx {
            control: Q1,
            target: Q2,
        })
        .gate(Gate::Cx {
            control: Q2,
            target: Q3,
        });
    match branch {
        Branch::Local => {
            c.pauli_error(Q1, Pauli::Z, (1.0 - (lambda / 2.0).cos()) / 2.0);
        }
        _ => {
            c.gate(Gate::Ry {
                qubit: ANC,
                angle: FRAC_PI_2 - lambda / 2.0,
            })
            .gate(Gate::Cry {
                control: Q1,
                target: ANC,
                angle: lambda,
            });
        }
    }
    for q in [Q1, Q2, Q3] {
        c.gate(Gate::Rz {
            qubit: q,
            angle: phi,
        });
    }
    let (register, marker) = match branch {
        Branch::Mark | Branch::Local => (Basis::X, Basis::Z),
        Branch::Erase | Branch::EraseX => (Basis::X, Basis::X),
        Branch::WhichZ => (Basis::Z, Basis::Z),
    };
    for q in [Q1, Q2, Q3] {
        c.set_basis(q, register);
    }
    c.set_basis(ANC, marker);
    c.measure_all();
    c
}
