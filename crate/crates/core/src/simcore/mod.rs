//! Exact statevector simulation with Pauli-trajectory noise and seeded
//! shot sampling.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 is the least
//! significant bit). Outcome strings in a [`CountsTable`] are written in
//! the table's explicit `bit_order`, character `j` being the bit of
//! `bit_order[j]`, so downstream analysis never depends on the index
//! convention.

mod circuit;
mod counts;
mod gate;
mod noise;
mod sample;
mod state;

pub use circuit::{Basis, Circuit, Op};
pub use counts::{CountsTable, OutcomeTable, ProbabilityTable};
pub use gate::{Gate, Pauli};
pub use noise::{Confusion, NoiseModel};
pub use sample::{exact_distribution, sample_counts};
pub use state::{apply_gate, expectation, QuantumState};
