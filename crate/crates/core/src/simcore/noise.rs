use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-stochastic 2×2 readout confusion: `rows[true_bit][reported_bit]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Confusion(pub [[f64; 2]; 2]);

impl Confusion {
    pub const IDEAL: Confusion = Confusion([[1.0, 0.0], [0.0, 1.0]]);

    /// Symmetric bit flip with probability `p`.
    pub fn symmetric(p: f64) -> Self {
        Self::asymmetric(p, p)
    }

    /// `p01` = P(read 1 | true 0), `p10` = P(read 0 | true 1).
    pub fn asymmetric(p01: f64, p10: f64) -> Self {
        Confusion([[1.0 - p01, p01], [p10, 1.0 - p10]])
    }

    /// Probability of reporting the opposite of `true_bit`.
    pub fn flip_probability(&self, true_bit: bool) -> f64 {
        let row = self.0[usize::from(true_bit)];
        row[usize::from(!true_bit)]
    }

    fn validate(&self) -> Result<()> {
        for row in &self.0 {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidNoise(format!(
                    "confusion entry outside [0, 1]: {row:?}"
                )));
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidNoise(format!(
                    "confusion row {row:?} does not sum to 1"
                )));
            }
        }
        Ok(())
    }
}

impl Default for Confusion {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Stochastic Pauli noise plus classical readout confusion.
///
/// `readout` is indexed by qubit. An empty list means ideal readout; a
/// single entry applies to every qubit; otherwise qubits past the end of
/// the list read out ideally.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub single_qubit_depolarizing: f64,
    pub two_qubit_depolarizing: f64,
    pub idle_dephasing: f64,
    pub readout: Vec<Confusion>,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// A mild profile of the order of current superconducting devices:
    /// 0.1% single-qubit and 1% two-qubit depolarizing, 0.2% idle
    /// dephasing per layer and 1.5% symmetric readout error.
    pub fn hardware_like() -> Self {
        Self {
            single_qubit_depolarizing: 0.001,
            two_qubit_depolarizing: 0.01,
            idle_dephasing: 0.002,
            readout: vec![Confusion::symmetric(0.015)],
        }
    }

    /// Only readout confusion, identical on every qubit.
    pub fn readout_only(confusion: Confusion) -> Self {
        Self {
            readout: vec![confusion],
            ..Self::default()
        }
    }

    pub fn with_readout(mut self, confusion: Confusion) -> Self {
        self.readout = vec![confusion];
        self
    }

    pub fn readout_for(&self, qubit: usize) -> Confusion {
        match self.readout.len() {
            0 => Confusion::IDEAL,
            1 => self.readout[0],
            _ => self.readout.get(qubit).copied().unwrap_or(Confusion::IDEAL),
        }
    }

    /// True when some gate or idle channel can fire.
    pub fn has_quantum_noise(&self) -> bool {
        self.single_qubit_depolarizing > 0.0
            || self.two_qubit_depolarizing > 0.0
            || self.idle_dephasing > 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout.iter().any(|c| *c != Confusion::IDEAL)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("single_qubit_depolarizing", self.single_qubit_depolarizing),
            ("two_qubit_depolarizing", self.two_qubit_depolarizing),
            ("idle_dephasing", self.idle_dephasing),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} outside [0, 1]")));
            }
        }
        self.readout.iter().try_for_each(Confusion::validate)
    }
}
