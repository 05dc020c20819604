//! The hybrid ground-state search: wire the ansatz, expectation evaluation
//! and a classical optimizer into one loop, then sample the optimized state
//! and decode the result.
//!
//! All randomness flows from `VqeConfig::seed`: restart r derives its own
//! stream from `seed ^ r`, so identical configs give byte-identical results
//! and restarts are independent of scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::hamiltonian::{decode, DecodedColoring, Encoding, IsingHamiltonian};
use crate::optim::{cobyla_minimize, spsa_minimize, OptTrace, OptimError, OptimizerConfig};
use crate::simulator::{
    apply_circuit_capped, build_ansatz, expectation, sample, Circuit, Histogram, SimError,
    DEFAULT_STATEVECTOR_CAP,
};

#[derive(Debug, Error)]
pub enum VqeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
    #[error("restarts must be at least 1")]
    ZeroRestarts,
    #[error("sampled mode needs shots >= 1")]
    ZeroShots,
    #[error("parameter index {index} out of range for {n_params} parameters")]
    ParamOutOfRange { index: usize, n_params: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Spsa,
    Cobyla,
}

/// Objective evaluation mode: exact statevector expectation, or the mean
/// energy of a finite-shot sample (the unbiased estimator for diagonal H).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Serialize)]
pub struct VqeConfig {
    pub layers: usize,
    pub optimizer: OptimizerKind,
    pub optimizer_cfg: OptimizerConfig,
    pub mode: EvalMode,
    /// Shots per objective evaluation in sampled mode, and for the final
    /// histogram in both modes.
    pub shots: u64,
    pub seed: u64,
    pub restarts: usize,
    pub statevector_cap: usize,
}

impl VqeConfig {
    pub fn new(optimizer: OptimizerKind, mode: EvalMode) -> Self {
        VqeConfig {
            layers: 2,
            optimizer,
            optimizer_cfg: OptimizerConfig::default(),
            mode,
            shots: 1024,
            seed: 0,
            restarts: 3,
            statevector_cap: DEFAULT_STATEVECTOR_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VqeResult {
    pub best_theta: Vec<f64>,
    pub best_energy: f64,
    /// Trace of the winning restart.
    pub trace: OptTrace,
    pub final_histogram: Histogram,
    /// Sampled bitstring of minimal energy; ties break to the higher count,
    /// then lexicographically. Used for decoding.
    pub best_bitstring: String,
    /// Most frequently sampled bitstring.
    pub modal_bitstring: String,
    pub decoded: Option<DecodedColoring>,
    /// `best_energy − oracle ground energy`, when a ground truth is known.
    pub ground_truth_gap: Option<f64>,
}

// seed salts decoupling the per-restart streams (init draw, optimizer,
// per-evaluation sampling) and the final histogram
const SALT_OPTIMIZER: u64 = 0x9E37_79B9_7F4A_7C15;
const SALT_EVAL: u64 = 0xD1B5_4A32_D192_ED03;
const SALT_HISTOGRAM: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// Minimize ⟨ψ(θ)|H|ψ(θ)⟩ over the ansatz parameters. Each restart draws θ0
/// uniformly from [−π, π]^d with seed ⊕ r, runs the configured optimizer, and
/// the best restart is kept. The optimized state is then sampled for the
/// result histogram, the minimal-energy sampled string, and (when an encoding
/// is attached) the decoded coloring.
pub fn vqe_solve(
    h: &IsingHamiltonian,
    enc: Option<&Encoding>,
    cfg: &VqeConfig,
) -> Result<VqeResult, VqeError> {
    if cfg.restarts == 0 {
        return Err(VqeError::ZeroRestarts);
    }
    if cfg.shots == 0 {
        return Err(VqeError::ZeroShots);
    }
    let circuit = build_ansatz(h.n_qubits(), cfg.layers)?;
    if h.n_qubits() > cfg.statevector_cap {
        return Err(SimError::CapExceeded {
            n_qubits: h.n_qubits(),
            cap: cfg.statevector_cap,
        }
        .into());
    }

    let mut winner: Option<OptTrace> = None;
    for restart in 0..cfg.restarts {
        let restart_seed = cfg.seed ^ restart as u64;
        let theta0 = draw_initial_theta(circuit.n_params(), restart_seed);
        let mut opt_cfg = cfg.optimizer_cfg.clone();
        opt_cfg.seed = restart_seed ^ SALT_OPTIMIZER;

        let trace = match cfg.mode {
            EvalMode::Exact => {
                let objective = |theta: &[f64]| exact_energy(&circuit, theta, h, cfg);
                run_optimizer(cfg.optimizer, objective, &theta0, &opt_cfg)?
            }
            EvalMode::Sampled => {
                let mut eval_counter = 0u64;
                let objective = |theta: &[f64]| {
                    let eval_seed = restart_seed ^ SALT_EVAL ^ eval_counter;
                    eval_counter += 1;
                    sampled_energy(&circuit, theta, h, cfg, eval_seed)
                };
                run_optimizer(cfg.optimizer, objective, &theta0, &opt_cfg)?
            }
        };

        if winner
            .as_ref()
            .is_none_or(|w| trace.best_value < w.best_value)
        {
            winner = Some(trace);
        }
    }
    let trace = winner.expect("at least one restart ran");

    let state = apply_circuit_capped(&circuit, &trace.best_theta, cfg.statevector_cap)?;
    let best_energy = match cfg.mode {
        // the exact expectation at best_theta, identical to the trace value
        EvalMode::Exact => expectation(&state, h)?,
        EvalMode::Sampled => trace.best_value,
    };
    let final_histogram = sample(&state, cfg.shots, cfg.seed ^ SALT_HISTOGRAM)?;

    let best_bitstring = pick_min_energy_string(&final_histogram, h);
    let modal_bitstring = pick_modal_string(&final_histogram);
    let decoded = match enc {
        Some(enc) => Some(decode(
            &bits::text_to_bits(&best_bitstring).expect("histogram keys are binary"),
            enc,
        )?),
        None => None,
    };

    Ok(VqeResult {
        best_theta: trace.best_theta.clone(),
        best_energy,
        trace,
        final_histogram,
        best_bitstring,
        modal_bitstring,
        decoded,
        ground_truth_gap: None,
    })
}

fn run_optimizer<F: FnMut(&[f64]) -> f64>(
    kind: OptimizerKind,
    objective: F,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptTrace, OptimError> {
    match kind {
        OptimizerKind::Spsa => spsa_minimize(objective, theta0, cfg),
        OptimizerKind::Cobyla => cobyla_minimize(objective, theta0, cfg),
    }
}

fn draw_initial_theta(n_params: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_params)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            (2.0 * u - 1.0) * std::f64::consts::PI
        })
        .collect()
}

fn exact_energy(circuit: &Circuit, theta: &[f64], h: &IsingHamiltonian, cfg: &VqeConfig) -> f64 {
    let state = apply_circuit_capped(circuit, theta, cfg.statevector_cap)
        .expect("dimensions checked before the loop");
    expectation(&state, h).expect("dimensions checked before the loop")
}

fn sampled_energy(
    circuit: &Circuit,
    theta: &[f64],
    h: &IsingHamiltonian,
    cfg: &VqeConfig,
    seed: u64,
) -> f64 {
    let state = apply_circuit_capped(circuit, theta, cfg.statevector_cap)
        .expect("dimensions checked before the loop");
    let histogram = sample(&state, cfg.shots, seed).expect("shots validated");
    mean_sampled_energy(&histogram, h)
}

/// Mean energy over a sample: `Σ count(b)·E(b) / shots`.
pub fn mean_sampled_energy(histogram: &Histogram, h: &IsingHamiltonian) -> f64 {
    let total: f64 = histogram
        .counts
        .iter()
        .map(|(text, &count)| {
            let bits = bits::text_to_bits(text).expect("histogram keys are binary");
            count as f64 * h.eval_energy(&bits).expect("key length matches")
        })
        .sum();
    total / histogram.shots as f64
}

fn pick_min_energy_string(histogram: &Histogram, h: &IsingHamiltonian) -> String {
    histogram
        .counts
        .iter()
        .map(|(text, &count)| {
            let bits = bits::text_to_bits(text).expect("histogram keys are binary");
            let energy = h.eval_energy(&bits).expect("key length matches");
            (text.clone(), count, energy)
        })
        .min_by(|(ta, ca, ea), (tb, cb, eb)| ea.total_cmp(eb).then(cb.cmp(ca)).then(ta.cmp(tb)))
        .map(|(text, _, _)| text)
        .expect("histogram is never empty")
}

fn pick_modal_string(histogram: &Histogram) -> String {
    histogram
        .counts
        .iter()
        .max_by(|(ta, ca), (tb, cb)| ca.cmp(cb).then(tb.cmp(ta)))
        .map(|(text, _)| text.clone())
        .expect("histogram is never empty")
}

/// Exact expectation along a one-parameter sweep, all other parameters frozen.
pub fn energy_landscape(
    h: &IsingHamiltonian,
    circuit: &Circuit,
    param_index: usize,
    grid: &[f64],
    frozen_theta: &[f64],
) -> Result<Vec<(f64, f64)>, VqeError> {
    if param_index >= circuit.n_params() {
        return Err(VqeError::ParamOutOfRange {
            index: param_index,
            n_params: circuit.n_params(),
        });
    }
    let mut theta = frozen_theta.to_vec();
    grid.iter()
        .map(|&value| {
            theta[param_index] = value;
            let state = apply_circuit_capped(circuit, &theta, DEFAULT_STATEVECTOR_CAP)?;
            Ok((value, expectation(&state, h)?))
        })
        .collect()
}
