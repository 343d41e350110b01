use num_complex::Complex64;

use super::gate::{self, Gate, Mat2, Pauli};
use crate::{Error, Result};

/// Pure state of `n_qubits` qubits as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub const MAX_QUBITS: usize = 8;

    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state from explicit amplitudes. The vector length must be a
    /// power of two and the norm must be 1 within 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidCircuit(format!(
                "amplitude vector length {len} is not 2^n with n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_width(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCircuit(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born probabilities of the computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        let qs = gate.qubits();
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {gate:?} repeats qubit {a}"
                )));
            }
        }
        match *gate {
            Gate::H { qubit } => self.apply_1q(qubit, &gate::hadamard(), None),
            Gate::X { qubit } => self.apply_1q(qubit, &gate::pauli_x(), None),
            Gate::Y { qubit } => self.apply_1q(qubit, &gate::pauli_y(), None),
            Gate::Z { qubit } => self.phase_by(|i| bit(i, qubit), |_| Complex64::new(-1.0, 0.0)),
            Gate::Ry { qubit, angle } => self.apply_1q(qubit, &gate::ry(angle), None),
            Gate::Rz { qubit, angle } => {
                let lo = Complex64::from_polar(1.0, -angle / 2.0);
                let hi = Complex64::from_polar(1.0, angle / 2.0);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if bit(i, qubit) { hi } else { lo };
                }
            }
            Gate::Cx { control, target } => self.apply_1q(target, &gate::pauli_x(), Some(control)),
            Gate::Cz { a, b } => {
                self.phase_by(|i| bit(i, a) && bit(i, b), |_| Complex64::new(-1.0, 0.0))
            }
            Gate::Cry {
                control,
                target,
                angle,
            } => self.apply_1q(target, &gate::ry(angle), Some(control)),
            Gate::Rzz { a, b, angle } => self.apply_rzz(a, b, angle, None),
            Gate::Crzz {
                control,
                a,
                b,
                angle,
            } => self.apply_rzz(a, b, angle, Some(control)),
        }
        Ok(())
    }

    /// Applies a single-qubit Pauli in place; identity is a no-op.
    pub fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        match Gate::pauli(pauli, qubit) {
            Some(g) => self.apply(&g),
            None => self.check_qubit(qubit),
        }
    }

    /// Exact expectation of a Pauli string; character `k` acts on qubit `k`.
    pub fn expectation(&self, pauli_string: &str) -> Result<f64> {
        let letters: Vec<char> = pauli_string.chars().collect();
        if letters.len() != self.n_qubits {
            return Err(Error::InvalidObservable(format!(
                "pauli string {pauli_string:?} has length {} but the state has {} qubits",
                letters.len(),
                self.n_qubits
            )));
        }
        let mut flip_mask = 0usize;
        let mut ys = Vec::new();
        let mut zs = Vec::new();
        for (q, c) in letters.iter().enumerate() {
            match Pauli::from_char(*c) {
                Some(Pauli::I) => {}
                Some(Pauli::X) => flip_mask |= 1 << q,
                Some(Pauli::Y) => {
                    flip_mask |= 1 << q;
                    ys.push(q);
                }
                Some(Pauli::Z) => zs.push(q),
                None => {
                    return Err(Error::InvalidObservable(format!(
                        "letter {c:?} in {pauli_string:?} is not one of I, X, Y, Z"
                    )))
                }
            }
        }
        // P|i> = phase(i) |i ^ flip_mask>, so <psi|P|psi> = sum_i conj(a[i^m]) phase(i) a[i].
        let i_unit = Complex64::new(0.0, 1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let mut phase = Complex64::new(1.0, 0.0);
            for &q in &zs {
                if bit(i, q) {
                    phase = -phase;
                }
            }
            for &q in &ys {
                // Y|0> = i|1>, Y|1> = -i|0>
                phase *= if bit(i, q) { -i_unit } else { i_unit };
            }
            acc += self.amplitudes[i ^ flip_mask].conj() * phase * a;
        }
        Ok(acc.re)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::InvalidCircuit(format!(
                "qubit index {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn apply_1q(&mut self, target: usize, m: &Mat2, control: Option<usize>) {
        let stride = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if bit(i, target) {
                continue;
            }
            if let Some(c) = control {
                if !bit(i, c) {
                    continue;
                }
            }
            let j = i | stride;
            let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
            self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
        }
    }

    fn phase_by(&mut self, select: impl Fn(usize) -> bool, phase: impl Fn(usize) -> Complex64) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if select(i) {
                *a *= phase(i);
            }
        }
    }

    fn apply_rzz(&mut self, a: usize, b: usize, angle: f64, control: Option<usize>) {
        // eigenvalue of Z⊗Z is +1 when the bits agree
        let agree = Complex64::from_polar(1.0, -angle / 2.0);
        let differ = Complex64::from_polar(1.0, angle / 2.0);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if let Some(c) = control {
                if !bit(i, c) {
                    continue;
                }
            }
            *amp *= if bit(i, a) == bit(i, b) {
                agree
            } else {
                differ
            };
        }
    }
}

#[inline]
pub(crate) fn bit(index: usize, qubit: usize) -> bool {
    (index >> qubit) & 1 == 1
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > QuantumState::MAX_QUBITS {
        return Err(Error::InvalidCircuit(format!(
            "{n} qubits requested; supported range is 1..={}",
            QuantumState::MAX_QUBITS
        )));
    }
    Ok(())
}

/// Returns `state` evolved by `gate`, leaving the input untouched.
pub fn apply_gate(state: &QuantumState, gate: &Gate) -> Result<QuantumState> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Exact expectation value of a Pauli string on `state`.
pub fn expectation(state: &QuantumState, pauli_string: &str) -> Result<f64> {
    state.expectation(pauli_string)
}
