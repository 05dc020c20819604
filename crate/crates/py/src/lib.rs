//! Python bindings for the gatesched toolkit: conflict graphs, coloring
//! Hamiltonians under both encodings, the QAP→QUBO→Ising path, the exhaustive
//! oracle and the simulated VQE.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gatesched::bits;
use gatesched::hamiltonian as ham;
use gatesched::optim::OptimizerConfig;
use gatesched::oracle;
use gatesched::qap;
use gatesched::schedule;
use gatesched::simulator;
use gatesched::vqe;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Flight-conflict graph over node indices.
#[pyclass(name = "ConflictGraph")]
struct PyConflictGraph {
    inner: schedule::ConflictGraph,
}

#[pymethods]
impl PyConflictGraph {
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyConflictGraph {
            inner: schedule::ConflictGraph::from_edges(n, edges).map_err(value_err)?,
        })
    }

    /// Parse a schedule CSV (`id,arrival,departure` plus `# gates=<k>`) and
    /// build its interval-overlap conflict graph. Returns (graph, gates).
    #[staticmethod]
    #[pyo3(signature = (text, gates=None, buffer=0))]
    fn from_schedule_csv(text: &str, gates: Option<usize>, buffer: i64) -> PyResult<(Self, usize)> {
        let parsed = schedule::parse_schedule(text, gates).map_err(value_err)?;
        let graph = schedule::build_conflict_graph_buffered(&parsed, buffer);
        Ok((PyConflictGraph { inner: graph }, parsed.gate_count))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    /// Graphviz DOT text, optionally filled per-node from a coloring.
    #[pyo3(signature = (coloring=None))]
    fn dot(&self, coloring: Option<Vec<usize>>) -> PyResult<String> {
        schedule::export_dot(&self.inner, coloring.as_deref()).map_err(value_err)
    }

    /// DSATUR greedy coloring: (color per node, colors used).
    fn greedy_coloring(&self) -> (Vec<usize>, usize) {
        oracle::greedy_coloring(&self.inner)
    }

    /// True iff `colors` is a proper coloring with fewer than k colors.
    fn verify_coloring(&self, colors: Vec<usize>, k: usize) -> bool {
        let decoded = ham::DecodedColoring {
            color_of: colors.into_iter().map(Some).collect(),
            valid: true,
        };
        oracle::verify_coloring(&self.inner, &decoded, k)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(runtime_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ConflictGraph(n={}, edges={})",
            self.inner.n(),
            self.inner.edge_count()
        )
    }
}

/// Qubit encoding of a k-coloring problem.
#[pyclass(name = "Encoding")]
struct PyEncoding {
    inner: ham::Encoding,
}

#[pymethods]
impl PyEncoding {
    #[staticmethod]
    fn one_hot(n_nodes: usize, n_colors: usize) -> PyResult<Self> {
        Ok(PyEncoding {
            inner: ham::Encoding::one_hot(n_nodes, n_colors).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn binary(n_nodes: usize, n_colors: usize) -> PyResult<Self> {
        Ok(PyEncoding {
            inner: ham::Encoding::binary(n_nodes, n_colors).map_err(value_err)?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn bits_per_node(&self) -> usize {
        self.inner.bits_per_node()
    }

    /// Decode a measured bitstring (qubit 0 rightmost) into per-node colors
    /// (None where a node failed to decode) plus an overall validity flag.
    fn decode(&self, bitstring: &str) -> PyResult<(Vec<Option<usize>>, bool)> {
        let bits = bits::text_to_bits(bitstring)
            .ok_or_else(|| PyValueError::new_err("bitstring must be 0s and 1s"))?;
        let d = ham::decode(&bits, &self.inner).map_err(value_err)?;
        Ok((d.color_of, d.valid))
    }

    fn __repr__(&self) -> String {
        format!(
            "Encoding(kind={:?}, n_nodes={}, n_colors={})",
            self.inner.kind, self.inner.n_nodes, self.inner.n_colors
        )
    }
}

/// Diagonal Ising Hamiltonian: weighted Pauli-Z monomials plus a constant.
#[pyclass(name = "Hamiltonian")]
struct PyHamiltonian {
    inner: ham::IsingHamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    /// Space-efficient coloring Hamiltonian on n·⌈log₂ k⌉ qubits. The penalty
    /// defaults to 4^m, the cost of one clashing edge.
    #[staticmethod]
    #[pyo3(signature = (graph, k, penalty=None))]
    fn binary_coloring(graph: &PyConflictGraph, k: usize, penalty: Option<f64>) -> PyResult<Self> {
        let m = ham::ceil_log2(k.max(2));
        let p = penalty.unwrap_or(4.0f64.powi(m as i32));
        Ok(PyHamiltonian {
            inner: ham::binary_coloring_hamiltonian(&graph.inner, k, p).map_err(value_err)?,
        })
    }

    /// Standard one-hot coloring Hamiltonian on n·k qubits with a dominating
    /// validity penalty by default.
    #[staticmethod]
    #[pyo3(signature = (graph, k, penalty=None))]
    fn onehot_coloring(graph: &PyConflictGraph, k: usize, penalty: Option<f64>) -> PyResult<Self> {
        let p = penalty.unwrap_or(graph.inner.edge_count() as f64 + 1.0);
        Ok(PyHamiltonian {
            inner: ham::onehot_coloring_hamiltonian(&graph.inner, k, p, None).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: serde_json::from_str(text).map_err(value_err)?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.inner.constant()
    }

    /// Terms as (support qubit list, coefficient) pairs.
    #[getter]
    fn terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.inner
            .terms()
            .iter()
            .map(|t| (t.support.clone(), t.coeff))
            .collect()
    }

    /// Energy of a measured bitstring (qubit 0 rightmost).
    fn eval_energy(&self, bitstring: &str) -> PyResult<f64> {
        let bits = bits::text_to_bits(bitstring)
            .ok_or_else(|| PyValueError::new_err("bitstring must be 0s and 1s"))?;
        self.inner.eval_energy(&bits).map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(runtime_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Hamiltonian(n_qubits={}, terms={})",
            self.inner.n_qubits(),
            self.inner.terms().len()
        )
    }
}

/// Flow/distance QAP with optional gate restrictions and time conflicts.
#[pyclass(name = "QapInstance")]
struct PyQapInstance {
    inner: qap::QapInstance,
}

#[pymethods]
impl PyQapInstance {
    #[new]
    #[pyo3(signature = (flow, distance, gate_allowed=None, conflicts=Vec::new()))]
    fn new(
        flow: Vec<Vec<f64>>,
        distance: Vec<Vec<f64>>,
        gate_allowed: Option<Vec<Vec<bool>>>,
        conflicts: Vec<(usize, usize)>,
    ) -> PyResult<Self> {
        Ok(PyQapInstance {
            inner: qap::QapInstance::new(flow, distance, gate_allowed, conflicts)
                .map_err(value_err)?,
        })
    }

    /// Flow-distance objective of a complete assignment (gate per plane).
    fn objective(&self, gates: Vec<usize>) -> PyResult<f64> {
        qap::qap_objective(&self.inner, &qap::Assignment::complete(gates)).map_err(value_err)
    }

    /// Exhaustive exact solve: (gate per plane, objective).
    fn brute_force(&self) -> PyResult<(Vec<usize>, f64)> {
        let (assignment, objective) = qap::brute_force_qap(&self.inner).map_err(value_err)?;
        let gates = assignment
            .gate_of
            .into_iter()
            .map(|g| g.expect("brute force returns complete assignments"))
            .collect();
        Ok((gates, objective))
    }

    /// Reduce to the Ising Hamiltonian of the penalized QUBO; the penalty
    /// defaults to one above the largest possible objective.
    #[pyo3(signature = (penalty=None))]
    fn to_ising(&self, penalty: Option<f64>) -> PyResult<PyHamiltonian> {
        let p = penalty.unwrap_or_else(|| self.inner.default_penalty());
        let qubo = qap::qap_to_qubo(&self.inner, p).map_err(value_err)?;
        Ok(PyHamiltonian {
            inner: ham::qubo_to_ising(&qubo),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "QapInstance(planes={}, gates={})",
            self.inner.n_planes(),
            self.inner.n_gates()
        )
    }
}

/// Exhaustive ground truth of a Hamiltonian.
#[pyclass(name = "GroundTruth")]
struct PyGroundTruth {
    #[pyo3(get)]
    ground_energy: f64,
    #[pyo3(get)]
    ground_states: Vec<String>,
    #[pyo3(get)]
    n_ground_states: u64,
    #[pyo3(get)]
    n_enumerated: u64,
}

#[pyfunction]
#[pyo3(signature = (h, cap=oracle::DEFAULT_ORACLE_CAP))]
fn ground_state(h: &PyHamiltonian, cap: usize) -> PyResult<PyGroundTruth> {
    let gt = oracle::brute_force_ground_state(&h.inner, cap).map_err(value_err)?;
    Ok(PyGroundTruth {
        ground_energy: gt.ground_energy,
        ground_states: gt.ground_states,
        n_ground_states: gt.n_ground_states,
        n_enumerated: gt.n_enumerated,
    })
}

/// Result of a VQE run.
#[pyclass(name = "VqeOutcome")]
struct PyVqeOutcome {
    #[pyo3(get)]
    best_energy: f64,
    #[pyo3(get)]
    best_theta: Vec<f64>,
    #[pyo3(get)]
    best_bitstring: String,
    #[pyo3(get)]
    modal_bitstring: String,
    #[pyo3(get)]
    decoded: Option<Vec<Option<usize>>>,
    #[pyo3(get)]
    decoded_valid: Option<bool>,
    #[pyo3(get)]
    histogram: BTreeMap<String, u64>,
    #[pyo3(get)]
    n_evals: usize,
}

/// Run the simulated VQE on a diagonal Hamiltonian.
#[pyfunction]
#[pyo3(signature = (h, encoding=None, optimizer="cobyla", mode="exact", layers=2,
                    shots=1024, seed=0, restarts=3, max_evals=1000))]
#[allow(clippy::too_many_arguments)]
fn vqe_solve(
    h: &PyHamiltonian,
    encoding: Option<&PyEncoding>,
    optimizer: &str,
    mode: &str,
    layers: usize,
    shots: u64,
    seed: u64,
    restarts: usize,
    max_evals: usize,
) -> PyResult<PyVqeOutcome> {
    let optimizer = match optimizer {
        "cobyla" => vqe::OptimizerKind::Cobyla,
        "spsa" => vqe::OptimizerKind::Spsa,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown optimizer `{other}`"
            )))
        }
    };
    let mode = match mode {
        "exact" => vqe::EvalMode::Exact,
        "sampled" => vqe::EvalMode::Sampled,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let mut cfg = vqe::VqeConfig::new(optimizer, mode);
    cfg.layers = layers;
    cfg.shots = shots;
    cfg.seed = seed;
    cfg.restarts = restarts;
    cfg.optimizer_cfg = OptimizerConfig {
        max_evals,
        seed,
        ..OptimizerConfig::default()
    };

    let result = vqe::vqe_solve(&h.inner, encoding.map(|e| &e.inner), &cfg).map_err(runtime_err)?;
    Ok(PyVqeOutcome {
        best_energy: result.best_energy,
        best_theta: result.best_theta,
        best_bitstring: result.best_bitstring,
        modal_bitstring: result.modal_bitstring,
        decoded: result.decoded.as_ref().map(|d| d.color_of.clone()),
        decoded_valid: result.decoded.as_ref().map(|d| d.valid),
        histogram: result.final_histogram.counts,
        n_evals: result.trace.n_evals,
    })
}

/// Logical (greedy disjoint-qubit layering) depth of the ansatz circuit.
#[pyfunction]
fn ansatz_depth(n_qubits: usize, layers: usize) -> PyResult<usize> {
    let circuit = simulator::build_ansatz(n_qubits, layers).map_err(value_err)?;
    Ok(simulator::logical_depth(&circuit))
}

#[pymodule]
fn gatesched_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConflictGraph>()?;
    m.add_class::<PyEncoding>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyQapInstance>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PyVqeOutcome>()?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(vqe_solve, m)?)?;
    m.add_function(wrap_pyfunction!(ansatz_depth, m)?)?;
    Ok(())
}
