//! Statevector simulation of the RY/CX ansatz, exact expectations of diagonal
//! Hamiltonians, seeded measurement sampling, and logical depth accounting.
//!
//! Randomness is drawn from ChaCha8 seeded explicitly, with uniforms derived
//! from the top 53 bits of each 64-bit output, so histograms are reproducible
//! bit-for-bit across platforms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::hamiltonian::IsingHamiltonian;

/// Largest statevector allocated without an explicit override (2^26 complex
/// amplitudes ≈ 1 GiB).
pub const DEFAULT_STATEVECTOR_CAP: usize = 26;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("circuit needs at least 1 qubit and 1 layer")]
    EmptyCircuit,
    #[error("circuit has {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("{n_qubits} qubits exceed the statevector cap of {cap}")]
    CapExceeded { n_qubits: usize, cap: usize },
    #[error("state has {state_qubits} qubits but the Hamiltonian acts on {h_qubits}")]
    DimensionMismatch {
        state_qubits: usize,
        h_qubits: usize,
    },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("qubit {qubit} out of range for {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
}

/// Rotation angle source: a trainable parameter slot or a fixed constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    Ry { qubit: usize, angle: Angle },
    Cx { control: usize, target: usize },
}

impl GateOp {
    fn qubits(&self) -> [Option<usize>; 2] {
        match *self {
            GateOp::Ry { qubit, .. } => [Some(qubit), None],
            GateOp::Cx { control, target } => [Some(control), Some(target)],
        }
    }
}

/// Ordered gate list with a contiguous parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            ops: Vec::new(),
            n_params: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn ry(&mut self, qubit: usize, param: usize) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        self.n_params = self.n_params.max(param + 1);
        self.ops.push(GateOp::Ry {
            qubit,
            angle: Angle::Param(param),
        });
        Ok(())
    }

    pub fn ry_fixed(&mut self, qubit: usize, angle: f64) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        self.ops.push(GateOp::Ry {
            qubit,
            angle: Angle::Fixed(angle),
        });
        Ok(())
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        self.ops.push(GateOp::Cx { control, target });
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Count of RY / CX gates, mostly for resource reporting.
    pub fn gate_counts(&self) -> (usize, usize) {
        let ry = self
            .ops
            .iter()
            .filter(|op| matches!(op, GateOp::Ry { .. }))
            .count();
        (ry, self.ops.len() - ry)
    }
}

/// Hardware-efficient ansatz: per layer an RY rotation on every qubit followed
/// by a linear CX chain, then a final RY layer. `n_params = n·(layers+1)`.
pub fn build_ansatz(n_qubits: usize, layers: usize) -> Result<Circuit, SimError> {
    if n_qubits == 0 || layers == 0 {
        return Err(SimError::EmptyCircuit);
    }
    let mut c = Circuit::new(n_qubits);
    let mut param = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            c.ry(q, param)?;
            param += 1;
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.cx(q, q + 1)?;
        }
    }
    for q in 0..n_qubits {
        c.ry(q, param)?;
        param += 1;
    }
    Ok(c)
}

/// 2^n complex amplitudes; index bit q is qubit q (qubit 0 least significant).
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amps[index as usize].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Run the circuit on |0…0⟩. Fails when the parameter vector length is wrong
/// or the qubit count exceeds `DEFAULT_STATEVECTOR_CAP`.
pub fn apply_circuit(c: &Circuit, theta: &[f64]) -> Result<StateVector, SimError> {
    apply_circuit_capped(c, theta, DEFAULT_STATEVECTOR_CAP)
}

pub fn apply_circuit_capped(
    c: &Circuit,
    theta: &[f64],
    cap: usize,
) -> Result<StateVector, SimError> {
    if theta.len() != c.n_params {
        return Err(SimError::ParamCount {
            expected: c.n_params,
            got: theta.len(),
        });
    }
    if c.n_qubits > cap {
        return Err(SimError::CapExceeded {
            n_qubits: c.n_qubits,
            cap,
        });
    }
    let dim = 1usize << c.n_qubits;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(1.0, 0.0);

    for op in &c.ops {
        match *op {
            GateOp::Ry { qubit, angle } => {
                let theta_val = match angle {
                    Angle::Param(p) => theta[p],
                    Angle::Fixed(v) => v,
                };
                let (sin, cos) = (theta_val / 2.0).sin_cos();
                let mask = 1usize << qubit;
                for base in 0..dim {
                    if base & mask == 0 {
                        let a0 = amps[base];
                        let a1 = amps[base | mask];
                        amps[base] = cos * a0 - sin * a1;
                        amps[base | mask] = sin * a0 + cos * a1;
                    }
                }
            }
            GateOp::Cx { control, target } => {
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for base in 0..dim {
                    if base & cmask != 0 && base & tmask == 0 {
                        amps.swap(base, base | tmask);
                    }
                }
            }
        }
    }
    Ok(StateVector {
        n_qubits: c.n_qubits,
        amps,
    })
}

/// Exact expectation of a diagonal Hamiltonian: `Σ_b |amp_b|² · E(b)`. For
/// Z-monomial Hamiltonians this equals ⟨ψ|H|ψ⟩ with no basis rotations.
pub fn expectation(state: &StateVector, h: &IsingHamiltonian) -> Result<f64, SimError> {
    if state.n_qubits != h.n_qubits() {
        return Err(SimError::DimensionMismatch {
            state_qubits: state.n_qubits,
            h_qubits: h.n_qubits(),
        });
    }
    let compiled = h.compiled();
    let mut total = 0.0;
    for (idx, amp) in state.amps.iter().enumerate() {
        let p = amp.norm_sqr();
        if p > 0.0 {
            total += p * compiled.energy(idx as u64);
        }
    }
    Ok(total)
}

/// Measurement counts over textual bitstrings (qubit 0 rightmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

/// Multinomial sample of the measurement distribution, reproducible for a
/// fixed (seed, shots, state) triple.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<Histogram, SimError> {
    sample_with_readout_error(state, shots, seed, 0.0)
}

/// Like [`sample`], with an independent per-bit readout flip probability as
/// the only noise knob.
pub fn sample_with_readout_error(
    state: &StateVector,
    shots: u64,
    seed: u64,
    flip_probability: f64,
) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // sorted uniforms swept once through the probability array
    let mut draws: Vec<f64> = (0..shots).map(|_| uniform(&mut rng)).collect();
    draws.sort_by(f64::total_cmp);

    let mut outcomes: Vec<(u64, u64)> = Vec::new(); // (state index, count)
    let mut cumulative = 0.0;
    let mut next_draw = 0usize;
    for (idx, amp) in state.amps.iter().enumerate() {
        if next_draw >= draws.len() {
            break;
        }
        cumulative += amp.norm_sqr();
        let start = next_draw;
        while next_draw < draws.len() && draws[next_draw] < cumulative {
            next_draw += 1;
        }
        if next_draw > start {
            outcomes.push((idx as u64, (next_draw - start) as u64));
        }
    }
    // rounding may strand trailing draws just past the accumulated total
    if next_draw < draws.len() {
        let leftover = (draws.len() - next_draw) as u64;
        if let Some(last) = outcomes.last_mut() {
            last.1 += leftover;
        } else {
            outcomes.push(((state.amps.len() - 1) as u64, leftover));
        }
    }

    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    if flip_probability > 0.0 {
        for (index, count) in outcomes {
            for _ in 0..count {
                let mut flipped = index;
                for q in 0..state.n_qubits {
                    if uniform(&mut rng) < flip_probability {
                        flipped ^= 1 << q;
                    }
                }
                *counts
                    .entry(bits::index_to_text(flipped, state.n_qubits))
                    .or_insert(0) += 1;
            }
        }
    } else {
        for (index, count) in outcomes {
            *counts
                .entry(bits::index_to_text(index, state.n_qubits))
                .or_insert(0) += count;
        }
    }
    Ok(Histogram { shots, counts })
}

/// Uniform in [0, 1) from the top 53 bits of one ChaCha8 output.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Logical circuit depth: greedy ASAP layering into layers of disjoint-qubit
/// gates, preserving per-qubit op order. Hardware mapping is out of scope.
pub fn logical_depth(c: &Circuit) -> usize {
    let mut available = vec![0usize; c.n_qubits];
    let mut depth = 0;
    for op in c.ops() {
        let layer = op
            .qubits()
            .iter()
            .flatten()
            .map(|&q| available[q])
            .max()
            .unwrap_or(0)
            + 1;
        for &q in op.qubits().iter().flatten() {
            available[q] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}
