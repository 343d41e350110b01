use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::circuit::{Circuit, Schedule};
use super::counts::{CountsTable, ProbabilityTable};
use super::gate::{Gate, Pauli};
use super::noise::NoiseModel;
use super::state::{bit, QuantumState};
use crate::{par, rng, Error, Result};

const MAX_EXACT_CHANNELS: usize = 20;

/// Samples `shots` measurement records of `circuit`.
///
/// Shot `i` draws from its own generator `rng::stream(seed, i)`, so the
/// table is a pure function of the inputs regardless of how shots are
/// distributed over threads. Gate and idle noise are injected as stochastic
/// Pauli trajectories; readout confusion flips each reported bit
/// independently after sampling.
pub fn sample_counts(
    circuit: &Circuit,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<CountsTable> {
    circuit.validate()?;
    noise.validate()?;
    if shots == 0 {
        return Err(Error::InvalidCircuit("shots must be at least 1".into()));
    }
    let schedule = circuit.schedule();
    let readout: Vec<(f64, f64)> = circuit
        .measured
        .iter()
        .map(|&q| {
            let c = noise.readout_for(q);
            (c.flip_probability(false), c.flip_probability(true))
        })
        .collect();

    let static_cdf = if noise.has_quantum_noise() || schedule.has_channels() {
        None
    } else {
        let state = run_schedule(circuit.n_qubits, &schedule, |_| false)?;
        Some(cumulative(&state.probabilities()))
    };

    let outcomes: Vec<usize> = par::map_range(shots as usize, |shot| {
        let mut rng = rng::stream(seed, shot as u64);
        let basis_index = match &static_cdf {
            Some(cdf) => draw(cdf, &mut rng),
            None => {
                let state = trajectory(circuit.n_qubits, &schedule, noise, &mut rng);
                draw(&cumulative(&state.probabilities()), &mut rng)
            }
        };
        let mut outcome = 0usize;
        for (j, &q) in circuit.measured.iter().enumerate() {
            let mut b = bit(basis_index, q);
            let flip = if b { readout[j].1 } else { readout[j].0 };
            if flip > 0.0 && rng.random::<f64>() < flip {
                b = !b;
            }
            if b {
                outcome |= 1 << j;
            }
        }
        outcome
    });

    let mut histogram = vec![0u64; 1 << circuit.measured.len()];
    for o in outcomes {
        histogram[o] += 1;
    }
    CountsTable::from_histogram(circuit.bit_order(), &histogram)
}

/// Exact outcome distribution of `circuit`.
///
/// Stochastic Pauli channels embedded in the circuit are enumerated
/// branch by branch and readout confusion is applied analytically. Gate
/// and idle noise have no exact counterpart here and are rejected.
pub fn exact_distribution(circuit: &Circuit, noise: &NoiseModel) -> Result<ProbabilityTable> {
    circuit.validate()?;
    noise.validate()?;
    if noise.has_quantum_noise() {
        return Err(Error::InvalidNoise(
            "exact evaluation supports readout confusion only; use sampling for gate noise".into(),
        ));
    }
    let schedule = circuit.schedule();
    let channels: Vec<f64> = schedule
        .layers
        .iter()
        .flat_map(|l| l.channels.iter().map(|c| c.2))
        .collect();
    if channels.len() > MAX_EXACT_CHANNELS {
        return Err(Error::InvalidCircuit(format!(
            "{} stochastic channels exceed the exact-enumeration limit of {MAX_EXACT_CHANNELS}",
            channels.len()
        )));
    }
    let width = circuit.measured.len();
    let mut probs = vec![0.0f64; 1 << width];
    for mask in 0usize..(1 << channels.len()) {
        let weight: f64 = channels
            .iter()
            .enumerate()
            .map(|(k, &p)| if (mask >> k) & 1 == 1 { p } else { 1.0 - p })
            .product();
        if weight == 0.0 {
            continue;
        }
        let state = run_schedule(circuit.n_qubits, &schedule, |k| (mask >> k) & 1 == 1)?;
        for (idx, p) in state.probabilities().into_iter().enumerate() {
            let mut outcome = 0usize;
            for (j, &q) in circuit.measured.iter().enumerate() {
                if bit(idx, q) {
                    outcome |= 1 << j;
                }
            }
            probs[outcome] += weight * p;
        }
    }
    for (j, &q) in circuit.measured.iter().enumerate() {
        let c = noise.readout_for(q);
        let mut next = vec![0.0f64; probs.len()];
        for (outcome, &p) in probs.iter().enumerate() {
            let b = (outcome >> j) & 1 == 1;
            let flip = c.flip_probability(b);
            next[outcome] += p * (1.0 - flip);
            next[outcome ^ (1 << j)] += p * flip;
        }
        probs = next;
    }
    ProbabilityTable::from_vector(circuit.bit_order(), &probs)
}

/// Runs the schedule noiselessly, channel `k` (in schedule order) firing
/// iff `fires(k)`.
fn run_schedule(
    n_qubits: usize,
    schedule: &Schedule,
    fires: impl Fn(usize) -> bool,
) -> Result<QuantumState> {
    let mut state = QuantumState::zero(n_qubits)?;
    let mut k = 0;
    for layer in &schedule.layers {
        for g in &layer.gates {
            state.apply(g)?;
        }
        for &(q, pauli, _) in &layer.channels {
            if fires(k) {
                state.apply_pauli(q, pauli)?;
            }
            k += 1;
        }
    }
    Ok(state)
}

/// One noisy trajectory: gates, depolarizing kicks after each gate, idle
/// dephasing per layer, then the circuit's own stochastic channels.
fn trajectory(
    n_qubits: usize,
    schedule: &Schedule,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> QuantumState {
    let mut state = QuantumState::zero(n_qubits).expect("validated width");
    for (k, layer) in schedule.layers.iter().enumerate() {
        for g in &layer.gates {
            state.apply(g).expect("validated gate");
            depolarize(&mut state, g, noise, rng);
        }
        if k > 0 && noise.idle_dephasing > 0.0 {
            for &q in &layer.idle {
                if rng.random::<f64>() < noise.idle_dephasing {
                    state.apply_pauli(q, Pauli::Z).expect("validated qubit");
                }
            }
        }
        for &(q, pauli, p) in &layer.channels {
            if rng.random::<f64>() < p {
                state.apply_pauli(q, pauli).expect("validated qubit");
            }
        }
    }
    state
}

/// With the gate's depolarizing probability, applies a uniformly random
/// non-identity Pauli on the gate's qubits (1 of 3 for one qubit, 1 of
/// 4^k - 1 for k qubits).
fn depolarize(state: &mut QuantumState, gate: &Gate, noise: &NoiseModel, rng: &mut ChaCha8Rng) {
    let qubits = gate.qubits();
    let p = if qubits.len() == 1 {
        noise.single_qubit_depolarizing
    } else {
        noise.two_qubit_depolarizing
    };
    if p == 0.0 || rng.random::<f64>() >= p {
        return;
    }
    let n_paulis = (1usize << (2 * qubits.len())) - 1;
    let mut code = rng.random_range(0..n_paulis) + 1;
    for &q in &qubits {
        let letter = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][code & 3];
        code >>= 2;
        state.apply_pauli(q, letter).expect("validated qubit");
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cdf.last().expect("nonempty");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}
