use serde::{Deserialize, Serialize};

use super::gate::{Gate, Pauli};
use super::state::QuantumState;
use crate::{Error, Result};

/// Terminal measurement basis of a qubit. `X` is realized by a terminal H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Basis {
    #[default]
    Z,
    X,
}

/// One circuit instruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Gate(Gate),
    /// Applies `pauli` to `qubit` with the given probability, independently
    /// per shot. Zero duration: it does not occupy a layer.
    PauliError {
        qubit: usize,
        pauli: Pauli,
        probability: f64,
    },
}

impl Op {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Op::Gate(g) => g.qubits(),
            Op::PauliError { qubit, .. } => vec![*qubit],
        }
    }
}

/// Ordered instruction list plus measurement specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Op>,
    pub measured: Vec<usize>,
    pub bases: Vec<Basis>,
    pub labels: Vec<String>,
}

impl Circuit {
    /// Empty circuit; qubits are labelled `q0, q1, ...` and measured in Z.
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            measured: Vec::new(),
            bases: vec![Basis::Z; n_qubits],
            labels: (0..n_qubits).map(|q| format!("q{q}")).collect(),
        }
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        self.labels = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn gate(&mut self, gate: Gate) -> &mut Self {
        self.ops.push(Op::Gate(gate));
        self
    }

    pub fn pauli_error(&mut self, qubit: usize, pauli: Pauli, probability: f64) -> &mut Self {
        self.ops.push(Op::PauliError {
            qubit,
            pauli,
            probability,
        });
        self
    }

    pub fn measure(&mut self, qubits: impl IntoIterator<Item = usize>) -> &mut Self {
        self.measured.extend(qubits);
        self
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.measured = (0..self.n_qubits).collect();
        self
    }

    pub fn set_basis(&mut self, qubit: usize, basis: Basis) -> &mut Self {
        if qubit < self.bases.len() {
            self.bases[qubit] = basis;
        }
        self
    }

    /// Labels of the measured qubits, in measurement order.
    pub fn bit_order(&self) -> Vec<String> {
        self.measured
            .iter()
            .map(|&q| self.labels[q].clone())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > QuantumState::MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "{} qubits; supported range is 1..={}",
                self.n_qubits,
                QuantumState::MAX_QUBITS
            )));
        }
        if self.bases.len() != self.n_qubits || self.labels.len() != self.n_qubits {
            return Err(Error::InvalidCircuit(
                "bases and labels must have one entry per qubit".into(),
            ));
        }
        for (k, op) in self.ops.iter().enumerate() {
            let qs = op.qubits();
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.n_qubits {
                    return Err(Error::InvalidCircuit(format!(
                        "op {k} ({op:?}) uses qubit {q} >= {}",
                        self.n_qubits
                    )));
                }
                if qs[i + 1..].contains(&q) {
                    return Err(Error::InvalidCircuit(format!("op {k} repeats qubit {q}")));
                }
            }
            if let Op::PauliError { probability, .. } = op {
                if !(0.0..=1.0).contains(probability) {
                    return Err(Error::InvalidCircuit(format!(
                        "op {k} has probability {probability} outside [0, 1]"
                    )));
                }
            }
        }
        if self.measured.is_empty() {
            return Err(Error::InvalidCircuit("no measured qubits".into()));
        }
        for (i, &q) in self.measured.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::InvalidCircuit(format!(
                    "measured qubit {q} out of range"
                )));
            }
            if self.measured[i + 1..].contains(&q) {
                return Err(Error::InvalidCircuit(format!("qubit {q} measured twice")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &q in &self.measured {
            if !seen.insert(self.labels[q].as_str()) {
                return Err(Error::InvalidCircuit(format!(
                    "duplicate label {:?} among measured qubits",
                    self.labels[q]
                )));
            }
        }
        Ok(())
    }

    /// ASAP layering of the instructions. Terminal basis rotations share a
    /// final layer, so a qubit whose last gate is early idles until readout.
    pub(crate) fn schedule(&self) -> Schedule {
        let mut depth = vec![0usize; self.n_qubits];
        let mut layers: Vec<Layer> = vec![Layer::default()];
        for op in &self.ops {
            match *op {
                Op::Gate(g) => {
                    let qs = g.qubits();
                    let layer = qs.iter().map(|&q| depth[q]).max().unwrap_or(0) + 1;
                    for &q in &qs {
                        depth[q] = layer;
                    }
                    if layers.len() <= layer {
                        layers.resize_with(layer + 1, Layer::default);
                    }
                    layers[layer].gates.push(g);
                }
                Op::PauliError {
                    qubit,
                    pauli,
                    probability,
                } => {
                    layers[depth[qubit]]
                        .channels
                        .push((qubit, pauli, probability));
                }
            }
        }
        let rotations: Vec<Gate> = self
            .measured
            .iter()
            .filter(|&&q| self.bases[q] == Basis::X)
            .map(|&q| Gate::H { qubit: q })
            .collect();
        if !rotations.is_empty() {
            layers.push(Layer {
                gates: rotations,
                ..Layer::default()
            });
        }
        for layer in layers.iter_mut().skip(1) {
            let mut busy = vec![false; self.n_qubits];
            for g in &layer.gates {
                for q in g.qubits() {
                    busy[q] = true;
                }
            }
            layer.idle = (0..self.n_qubits).filter(|&q| !busy[q]).collect();
        }
        Schedule { layers }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Layer {
    pub gates: Vec<Gate>,
    /// Zero-duration channels applied after this layer's gates.
    pub channels: Vec<(usize, Pauli, f64)>,
    pub idle: Vec<usize>,
}

/// Layer 0 holds only channels that precede every gate on their qubit.
#[derive(Debug, Clone)]
pub(crate) struct Schedule {
    pub layers: Vec<Layer>,
}

impl Schedule {
    pub fn has_channels(&self) -> bool {
        self.layers.iter().any(|l| !l.channels.is_empty())
    }
}
