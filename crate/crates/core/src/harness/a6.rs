use std::fmt;

use serde::{Deserialize, Serialize};

use super::ensemble::Triple;
use crate::simcore::{Basis, Circuit, Gate};

/// Outcome labels of the five-qubit motif, in measurement order.
pub const A6_LABELS: [&str; 5] = ["A", "B", "C0", "C1", "C2"];
/// Outcome labels of the context-only circuit.
pub const CTX_LABELS: [&str; 3] = ["C0", "C1", "C2"];

const A: usize = 0;
const B: usize = 1;
const C0: usize = 2;
const C1: usize = 3;
const C2: usize = 4;

/// Circuit family of the parity-context experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    /// Parity fold, conditional ZZ(θ) on the probes, unfold.
    Active,
    /// Context preparation only: no fold and no conditional gate.
    Passive1,
    /// Fold and unfold without the conditional gate.
    Passive2,
    /// Context register alone, read out in Z.
    CtxOnly,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Active,
        Family::Passive1,
        Family::Passive2,
        Family::CtxOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Active => "ACTIVE",
            Family::Passive1 => "PASSIVE1",
            Family::Passive2 => "PASSIVE2",
            Family::CtxOnly => "CTXONLY",
        }
    }

    /// Whether the family's circuit depends on θ.
    pub fn uses_theta(self) -> bool {
        self == Family::Active
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parity-balancing replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Replicate {
    R0,
    R1,
}

impl Replicate {
    pub const BOTH: [Replicate; 2] = [Replicate::R0, Replicate::R1];
}

impl fmt::Display for Replicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Replicate::R0 => "R0",
            Replicate::R1 => "R1",
        })
    }
}

/// Terminal readout basis of the probe pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PairBasis {
    #[default]
    XX,
    ZZ,
}

impl fmt::Display for PairBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairBasis::XX => "XX",
            PairBasis::ZZ => "ZZ",
        })
    }
}

/// One circuit execution on one lane.
///
/// Lane `ℓ` hosts triple `ℓ mod 8` in R0 and the same triple with C2
/// flipped in R1, so R1 swaps the lane's parity class relative to R0 and
/// every lane sees both classes across the replicate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanePlan {
    pub lane_id: usize,
    pub replicate: Replicate,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub basis: PairBasis,
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_profile_id: Option<String>,
}

impl LanePlan {
    pub fn triple(&self) -> Triple {
        let base = Triple::from_index(self.lane_id);
        match self.replicate {
            Replicate::R0 => base,
            Replicate::R1 => base.flip_c2(),
        }
    }

    pub fn label(&self) -> u8 {
        self.triple().label()
    }

    /// Stable identifier, usable as a file stem.
    pub fn name(&self) -> String {
        let mut s = format!("L{:02}-{}-{}", self.lane_id, self.replicate, self.family);
        if self.family != Family::CtxOnly {
            s.push_str(&format!("-{}", self.basis));
        }
        if let Some(t) = self.theta {
            s.push_str(&format!("-th{t:.6}"));
        }
        s
    }

    pub fn circuit(&self) -> Circuit {
        let triple = self.triple();
        match self.family {
            Family::Active => build_active_circuit(self.theta.unwrap_or(0.0), triple, self.basis),
            Family::Passive1 | Family::Passive2 => {
                build_passive_circuit(self.family, triple, self.basis)
            }
            Family::CtxOnly => build_ctxonly_circuit(triple),
        }
    }
}

fn motif(triple: Triple) -> Circuit {
    let mut c = Circuit::new(5).with_labels(A6_LABELS);
    c.gate(Gate::H { qubit: A }).gate(Gate::H { qubit: B });
    for (j, q) in [C0, C1, C2].into_iter().enumerate() {
        if triple.bit(j) == 1 {
            c.gate(Gate::X { qubit: q });
        }
    }
    c
}

fn fold(c: &mut Circuit) {
    c.gate(Gate::Cx {
        control: C0,
        target: C2,
    })
    .gate(Gate::Cx {
        control: C1,
        target: C2,
    });
}

fn unfold(c: &mut Circuit) {
    c.gate(Gate::Cx {
        control: C1,
        target: C2,
    })
    .gate(Gate::Cx {
        control: C0,
        target: C2,
    });
}

fn finish(mut c: Circuit, basis: PairBasis) -> Circuit {
    if basis == PairBasis::XX {
        c.set_basis(A, Basis::X).set_basis(B, Basis::X);
    }
    c.measure_all();
    c
}

/// ACTIVE: probes in |+⟩, context prepared, parity folded into C2,
/// ZZ(θ) on (A, B) controlled by C2, parity unfolded, all five measured.
pub fn build_active_circuit(theta: f64, triple: Triple, basis: PairBasis) -> Circuit {
    let mut c = motif(triple);
    fold(&mut c);
    c.gate(Gate::Crzz {
        control: C2,
        a: A,
        b: B,
        angle: theta,
    });
    unfold(&mut c);
    finish(c, basis)
}

/// PASSIVE1 omits fold and conditional gate; PASSIVE2 keeps the fold and
/// unfold but has no conditional gate. Any other family builds PASSIVE1.
pub fn build_passive_circuit(variant: Family, triple: Triple, basis: PairBasis) -> Circuit {
    let mut c = motif(triple);
    if variant == Family::Passive2 {
        fold(&mut c);
        unfold(&mut c);
    }
    finish(c, basis)
}

/// Prepares the context register and reads it out in Z.
pub fn build_ctxonly_circuit(triple: Triple) -> Circuit {
    let mut c = Circuit::new(3).with_labels(CTX_LABELS);
    for j in 0..3 {
        if triple.bit(j) == 1 {
            c.gate(Gate::X { qubit: j });
        }
    }
    c.measure_all();
    c
}
