use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// The three non-identity Paulis, in a fixed order used for sampling.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// Unitary gate with its qubit operands. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Gate {
    H {
        qubit: usize,
    },
    X {
        qubit: usize,
    },
    Y {
        qubit: usize,
    },
    Z {
        qubit: usize,
    },
    /// exp(-i angle Y / 2)
    Ry {
        qubit: usize,
        angle: f64,
    },
    /// exp(-i angle Z / 2)
    Rz {
        qubit: usize,
        angle: f64,
    },
    Cx {
        control: usize,
        target: usize,
    },
    Cz {
        a: usize,
        b: usize,
    },
    /// `Ry(angle)` on `target` iff `control` is |1>.
    Cry {
        control: usize,
        target: usize,
        angle: f64,
    },
    /// exp(-i angle (Z⊗Z) / 2), diagonal in the computational basis.
    Rzz {
        a: usize,
        b: usize,
        angle: f64,
    },
    /// `Rzz(angle)` on `(a, b)` iff `control` is |1>.
    Crzz {
        control: usize,
        a: usize,
        b: usize,
        angle: f64,
    },
}

impl Gate {
    /// Qubits the gate acts on, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Y { qubit }
            | Gate::Z { qubit }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cx { control, target }
            | Gate::Cry {
                control, target, ..
            } => {
                vec![control, target]
            }
            Gate::Cz { a, b } | Gate::Rzz { a, b, .. } => vec![a, b],
            Gate::Crzz { control, a, b, .. } => vec![control, a, b],
        }
    }

    pub(crate) fn pauli(p: Pauli, qubit: usize) -> Option<Gate> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(Gate::X { qubit }),
            Pauli::Y => Some(Gate::Y { qubit }),
            Pauli::Z => Some(Gate::Z { qubit }),
        }
    }
}

pub(crate) type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn hadamard() -> Mat2 {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

pub(crate) fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub(crate) fn pauli_y() -> Mat2 {
    let i = Complex64::new(0.0, 1.0);
    [[ZERO, -i], [i, ZERO]]
}

pub(crate) fn ry(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}
