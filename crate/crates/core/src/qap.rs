//! Classical quadratic assignment model for plane-gate scheduling, its exact
//! small-instance oracle, and the reduction to a QUBO problem.
//!
//! The objective is the flow-distance double sum over plane pairs; hard
//! constraints (one gate per plane, gate restrictions, no shared gate among
//! time-conflicting planes) become quadratic penalty blocks with a single
//! weight chosen large enough to dominate any objective gain.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QapError {
    #[error("flow matrix must be square ({rows} rows, row {row} has {cols} entries)")]
    RaggedMatrix {
        rows: usize,
        row: usize,
        cols: usize,
    },
    #[error("matrix entry ({i}, {j}) = {value} must be nonnegative")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("distance matrix must be symmetric with zero diagonal (entry ({i}, {j}))")]
    BadDistance { i: usize, j: usize },
    #[error("gate_allowed mask must be {planes}x{gates}")]
    BadMask { planes: usize, gates: usize },
    #[error("conflict pair ({i}, {j}) is invalid for {planes} planes")]
    BadConflict { i: usize, j: usize, planes: usize },
    #[error("plane {plane} is unassigned")]
    Incomplete { plane: usize },
    #[error("plane {plane} assigned to gate {gate}, but only {gates} gates exist")]
    GateOutOfRange {
        plane: usize,
        gate: usize,
        gates: usize,
    },
    #[error("instance too large for exhaustive search: {gates}^{planes} > {limit} assignments")]
    TooLarge {
        planes: usize,
        gates: usize,
        limit: u64,
    },
    #[error("no feasible assignment exists")]
    Infeasible,
    #[error("penalty must be positive, got {0}")]
    NonpositivePenalty(f64),
}

/// Flow/distance QAP data: `flow[i][j]` passengers connecting planes i and j,
/// `distance[k][l]` walking distance between gates k and l, plus optional
/// gate restrictions and time-conflict pairs from the conflict graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "QapJson", into = "QapJson")]
pub struct QapInstance {
    n_planes: usize,
    n_gates: usize,
    flow: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
    gate_allowed: Option<Vec<Vec<bool>>>,
    time_conflicts: BTreeSet<(usize, usize)>,
}

/// Wire format: `{ "flow": [[..]], "distance": [[..]], "gate_allowed": [[..]]|null,
/// "conflicts": [[i, j], ...] }`.
#[derive(Serialize, Deserialize)]
struct QapJson {
    flow: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
    gate_allowed: Option<Vec<Vec<bool>>>,
    conflicts: Vec<(usize, usize)>,
}

impl From<QapInstance> for QapJson {
    fn from(inst: QapInstance) -> Self {
        QapJson {
            flow: inst.flow,
            distance: inst.distance,
            gate_allowed: inst.gate_allowed,
            conflicts: inst.time_conflicts.into_iter().collect(),
        }
    }
}

impl TryFrom<QapJson> for QapInstance {
    type Error = QapError;

    fn try_from(raw: QapJson) -> Result<Self, Self::Error> {
        QapInstance::new(raw.flow, raw.distance, raw.gate_allowed, raw.conflicts)
    }
}

fn check_square(m: &[Vec<f64>]) -> Result<(), QapError> {
    let rows = m.len();
    for (row, r) in m.iter().enumerate() {
        if r.len() != rows {
            return Err(QapError::RaggedMatrix {
                rows,
                row,
                cols: r.len(),
            });
        }
        for (j, &v) in r.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(QapError::NegativeEntry {
                    i: row,
                    j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

impl QapInstance {
    pub fn new(
        flow: Vec<Vec<f64>>,
        distance: Vec<Vec<f64>>,
        gate_allowed: Option<Vec<Vec<bool>>>,
        conflicts: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, QapError> {
        check_square(&flow)?;
        check_square(&distance)?;
        let n_planes = flow.len();
        let n_gates = distance.len();
        for i in 0..n_gates {
            if distance[i][i] != 0.0 {
                return Err(QapError::BadDistance { i, j: i });
            }
            for j in (i + 1)..n_gates {
                if distance[i][j] != distance[j][i] {
                    return Err(QapError::BadDistance { i, j });
                }
            }
        }
        if let Some(mask) = &gate_allowed {
            if mask.len() != n_planes || mask.iter().any(|r| r.len() != n_gates) {
                return Err(QapError::BadMask {
                    planes: n_planes,
                    gates: n_gates,
                });
            }
        }
        let mut time_conflicts = BTreeSet::new();
        for (i, j) in conflicts {
            if i == j || i >= n_planes || j >= n_planes {
                return Err(QapError::BadConflict {
                    i,
                    j,
                    planes: n_planes,
                });
            }
            time_conflicts.insert((i.min(j), i.max(j)));
        }
        Ok(QapInstance {
            n_planes,
            n_gates,
            flow,
            distance,
            gate_allowed,
            time_conflicts,
        })
    }

    pub fn n_planes(&self) -> usize {
        self.n_planes
    }

    pub fn n_gates(&self) -> usize {
        self.n_gates
    }

    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flow[i][j]
    }

    pub fn distance(&self, k: usize, l: usize) -> f64 {
        self.distance[k][l]
    }

    pub fn gate_allowed(&self, plane: usize, gate: usize) -> bool {
        self.gate_allowed
            .as_ref()
            .map(|m| m[plane][gate])
            .unwrap_or(true)
    }

    pub fn conflicts(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.time_conflicts.iter().copied()
    }

    /// QUBO variable index for the decision "plane i parks at gate k".
    pub fn var(&self, plane: usize, gate: usize) -> usize {
        plane * self.n_gates + gate
    }

    /// Penalty weight that strictly dominates any objective gain from
    /// violating a constraint: `1 + Σ v_ij · max d_kl`.
    pub fn default_penalty(&self) -> f64 {
        let flow_sum: f64 = self.flow.iter().flatten().sum();
        let max_d = self
            .distance
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &d| acc.max(d));
        1.0 + flow_sum * max_d
    }

    /// Take the time conflicts from a flight-conflict graph: its edges are
    /// exactly the plane pairs that may never share a gate, the non-redundant
    /// reduction of the per-time-instant constraints.
    pub fn from_conflict_graph(
        flow: Vec<Vec<f64>>,
        distance: Vec<Vec<f64>>,
        gate_allowed: Option<Vec<Vec<bool>>>,
        graph: &crate::schedule::ConflictGraph,
    ) -> Result<Self, QapError> {
        QapInstance::new(flow, distance, gate_allowed, graph.edges())
    }
}

/// A gate per plane, `None` marking unassigned planes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub gate_of: Vec<Option<usize>>,
}

impl Assignment {
    pub fn complete(gates: Vec<usize>) -> Self {
        Assignment {
            gate_of: gates.into_iter().map(Some).collect(),
        }
    }

    /// Decode a 0/1 QUBO vector: a plane with exactly one chosen gate gets it,
    /// anything else stays unassigned.
    pub fn from_bits(bits: &[bool], n_planes: usize, n_gates: usize) -> Self {
        let gate_of = (0..n_planes)
            .map(|i| {
                let block = &bits[i * n_gates..(i + 1) * n_gates];
                let chosen: Vec<usize> = block
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &b)| b.then_some(k))
                    .collect();
                match chosen.as_slice() {
                    [gate] => Some(*gate),
                    _ => None,
                }
            })
            .collect();
        Assignment { gate_of }
    }

    pub fn to_bits(&self, n_gates: usize) -> Vec<bool> {
        let mut bits = vec![false; self.gate_of.len() * n_gates];
        for (plane, gate) in self.gate_of.iter().enumerate() {
            if let Some(k) = gate {
                bits[plane * n_gates + k] = true;
            }
        }
        bits
    }
}

/// A constraint violation found by [`check_feasible`]; violations are data,
/// not errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Unassigned {
        plane: usize,
    },
    GateRestriction {
        plane: usize,
        gate: usize,
    },
    TimeConflict {
        first: usize,
        second: usize,
        gate: usize,
    },
    /// Strict mode only: a gate hosting other than exactly one plane.
    GateLoad {
        gate: usize,
        planes: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flow-distance objective `Σ_{i,j} v_ij · d_{gate(i), gate(j)}` at a complete
/// assignment.
pub fn qap_objective(inst: &QapInstance, a: &Assignment) -> Result<f64, QapError> {
    let gates: Vec<usize> = a
        .gate_of
        .iter()
        .enumerate()
        .map(|(plane, g)| g.ok_or(QapError::Incomplete { plane }))
        .collect::<Result<_, _>>()?;
    for (plane, &g) in gates.iter().enumerate() {
        if g >= inst.n_gates {
            return Err(QapError::GateOutOfRange {
                plane,
                gate: g,
                gates: inst.n_gates,
            });
        }
    }
    let mut total = 0.0;
    for i in 0..inst.n_planes {
        for j in 0..inst.n_planes {
            total += inst.flow[i][j] * inst.distance[gates[i]][gates[j]];
        }
    }
    Ok(total)
}

/// List every constraint violation of an (possibly partial) assignment.
pub fn check_feasible(inst: &QapInstance, a: &Assignment) -> FeasibilityReport {
    let mut violations = Vec::new();
    for (plane, gate) in a.gate_of.iter().enumerate() {
        match *gate {
            None => violations.push(Violation::Unassigned { plane }),
            Some(g) if g >= inst.n_gates => {
                violations.push(Violation::GateRestriction { plane, gate: g })
            }
            Some(g) => {
                if !inst.gate_allowed(plane, g) {
                    violations.push(Violation::GateRestriction { plane, gate: g });
                }
            }
        }
    }
    for (i, j) in inst.conflicts() {
        if let (Some(gi), Some(gj)) = (a.gate_of[i], a.gate_of[j]) {
            if gi == gj {
                violations.push(Violation::TimeConflict {
                    first: i,
                    second: j,
                    gate: gi,
                });
            }
        }
    }
    FeasibilityReport { violations }
}

/// Strict feasibility for square instances: on top of [`check_feasible`],
/// every gate must host exactly one plane (a permutation assignment).
pub fn check_feasible_strict(inst: &QapInstance, a: &Assignment) -> FeasibilityReport {
    let mut report = check_feasible(inst, a);
    let mut load = vec![0usize; inst.n_gates];
    for gate in a.gate_of.iter().flatten() {
        if *gate < inst.n_gates {
            load[*gate] += 1;
        }
    }
    for (gate, &planes) in load.iter().enumerate() {
        if planes != 1 {
            report.violations.push(Violation::GateLoad { gate, planes });
        }
    }
    report
}

const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Exhaustive exact solver. Returns the globally minimal feasible assignment;
/// ties break to the lexicographically smallest `gate_of` array.
pub fn brute_force_qap(inst: &QapInstance) -> Result<(Assignment, f64), QapError> {
    let space = (inst.n_gates as u64)
        .checked_pow(inst.n_planes as u32)
        .unwrap_or(u64::MAX);
    if space > BRUTE_FORCE_LIMIT {
        return Err(QapError::TooLarge {
            planes: inst.n_planes,
            gates: inst.n_gates,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut gates = vec![0usize; inst.n_planes];
    loop {
        if feasible_gates(inst, &gates) {
            let a = Assignment::complete(gates.clone());
            let obj = qap_objective(inst, &a)?;
            // strict < keeps the first (lexicographically smallest) optimum
            if best.as_ref().is_none_or(|(_, b)| obj < *b) {
                best = Some((gates.clone(), obj));
            }
        }
        // odometer increment, last plane fastest: lexicographic order overall
        let mut pos = inst.n_planes;
        loop {
            if pos == 0 {
                return best
                    .map(|(g, obj)| (Assignment::complete(g), obj))
                    .ok_or(QapError::Infeasible);
            }
            pos -= 1;
            gates[pos] += 1;
            if gates[pos] < inst.n_gates {
                break;
            }
            gates[pos] = 0;
        }
    }
}

fn feasible_gates(inst: &QapInstance, gates: &[usize]) -> bool {
    for (plane, &g) in gates.iter().enumerate() {
        if !inst.gate_allowed(plane, g) {
            return false;
        }
    }
    inst.conflicts().all(|(i, j)| gates[i] != gates[j])
}

/// Quadratic unconstrained binary form `X^T Q X + g^T X + c` with Q stored as
/// its upper triangle; built from a QAP by [`qap_to_qubo`] or directly by the
/// coloring Hamiltonian builders.
#[derive(Debug, Clone)]
pub struct QuboProblem {
    n_vars: usize,
    /// Row-major n×n, populated on and above the diagonal only.
    q: Vec<f64>,
    g: Vec<f64>,
    c: f64,
    penalty: f64,
}

impl QuboProblem {
    pub fn new(n_vars: usize, penalty: f64) -> Self {
        QuboProblem {
            n_vars,
            q: vec![0.0; n_vars * n_vars],
            g: vec![0.0; n_vars],
            c: 0.0,
            penalty,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.g[i]
    }

    /// Upper-triangular quadratic weight; `quad(i, j)` with i > j reads 0.
    pub fn quad(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n_vars + j]
    }

    pub fn add_constant(&mut self, value: f64) {
        self.c += value;
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        self.g[i] += value;
    }

    /// Accumulate a quadratic weight, folding (i, j) into the upper triangle.
    /// `i == j` folds into the linear vector since x² = x on binary variables.
    pub fn add_quad(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            self.g[i] += value;
        } else {
            let (lo, hi) = (i.min(j), i.max(j));
            self.q[lo * self.n_vars + hi] += value;
        }
    }

    /// Evaluate at a 0/1 vector.
    pub fn eval(&self, x: &[bool]) -> f64 {
        assert_eq!(x.len(), self.n_vars, "QUBO dimension mismatch");
        let mut total = self.c;
        for i in 0..self.n_vars {
            if !x[i] {
                continue;
            }
            total += self.g[i] + self.q[i * self.n_vars + i];
            for j in (i + 1)..self.n_vars {
                if x[j] {
                    total += self.q[i * self.n_vars + j];
                }
            }
        }
        total
    }
}

/// Reduce the QAP to a QUBO on `|P|·|G|` variables, index (i, k) ↦ i·|G|+k:
/// flow·distance quadratic terms plus `penalty` times the one-gate-per-plane
/// and shared-gate-conflict blocks (and, when a gate mask is present, a linear
/// penalty on each forbidden variable).
pub fn qap_to_qubo(inst: &QapInstance, penalty: f64) -> Result<QuboProblem, QapError> {
    if penalty <= 0.0 {
        return Err(QapError::NonpositivePenalty(penalty));
    }
    let n_vars = inst.n_planes * inst.n_gates;
    let mut qubo = QuboProblem::new(n_vars, penalty);

    // objective: Σ_{i,j} Σ_{k,l} x_ik x_jl v_ij d_kl over ordered pairs
    for i in 0..inst.n_planes {
        for j in 0..inst.n_planes {
            for k in 0..inst.n_gates {
                for l in 0..inst.n_gates {
                    let w = inst.flow[i][j] * inst.distance[k][l];
                    if w != 0.0 {
                        qubo.add_quad(inst.var(i, k), inst.var(j, l), w);
                    }
                }
            }
        }
    }

    // P Σ_i (1 - Σ_k x_ik)² = P Σ_i [1 - Σ_k x_ik + 2 Σ_{k<l} x_ik x_il]
    for i in 0..inst.n_planes {
        qubo.add_constant(penalty);
        for k in 0..inst.n_gates {
            qubo.add_linear(inst.var(i, k), -penalty);
            for l in (k + 1)..inst.n_gates {
                qubo.add_quad(inst.var(i, k), inst.var(i, l), 2.0 * penalty);
            }
        }
    }

    // P Σ_{(i,j) conflicting} Σ_k x_ik x_jk
    for (i, j) in inst.conflicts() {
        for k in 0..inst.n_gates {
            qubo.add_quad(inst.var(i, k), inst.var(j, k), penalty);
        }
    }

    // gate restrictions: forbidden variables pay the penalty when set
    if inst.gate_allowed.is_some() {
        for i in 0..inst.n_planes {
            for k in 0..inst.n_gates {
                if !inst.gate_allowed(i, k) {
                    qubo.add_linear(inst.var(i, k), penalty);
                }
            }
        }
    }

    Ok(qubo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(n_planes: usize, n_gates: usize) -> QapInstance {
        QapInstance::new(
            vec![vec![0.0; n_planes]; n_planes],
            zero_diag_distance(n_gates),
            None,
            [],
        )
        .unwrap()
    }

    fn zero_diag_distance(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| if k == l { 0.0 } else { (k + l) as f64 })
                    .collect()
            })
            .collect()
    }

    /// Deterministic pseudo-random instance for cross-checks.
    fn random_instance(n_planes: usize, n_gates: usize, seed: u64) -> QapInstance {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 100.0
        };
        let flow: Vec<Vec<f64>> = (0..n_planes)
            .map(|_| (0..n_planes).map(|_| next()).collect())
            .collect();
        let mut distance = vec![vec![0.0; n_gates]; n_gates];
        for k in 0..n_gates {
            for l in (k + 1)..n_gates {
                let d = next();
                distance[k][l] = d;
                distance[l][k] = d;
            }
        }
        QapInstance::new(flow, distance, None, []).unwrap()
    }

    #[test]
    fn objective_zero_flow() {
        let inst = simple(3, 3);
        let a = Assignment::complete(vec![0, 1, 2]);
        assert_eq!(qap_objective(&inst, &a).unwrap(), 0.0);
    }

    #[test]
    fn objective_two_plane_hand_expansion() {
        // v_01 = v_10 = 5, d_01 = d_10 = 3: distinct gates cost 5·3 + 5·3 = 30
        let inst = QapInstance::new(
            vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            vec![vec![0.0, 3.0], vec![3.0, 0.0]],
            None,
            [],
        )
        .unwrap();
        let split = Assignment::complete(vec![0, 1]);
        assert_eq!(qap_objective(&inst, &split).unwrap(), 30.0);
        let shared = Assignment::complete(vec![0, 0]);
        assert_eq!(qap_objective(&inst, &shared).unwrap(), 0.0);
    }

    #[test]
    fn objective_matches_independent_double_sum() {
        let inst = random_instance(3, 3, 7);
        let a = Assignment::complete(vec![2, 0, 1]);
        let got = qap_objective(&inst, &a).unwrap();
        // independent re-statement of the double sum
        let mut expected = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let (gi, gj) = (a.gate_of[i].unwrap(), a.gate_of[j].unwrap());
                expected += inst.flow(i, j) * inst.distance(gi, gj);
            }
        }
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_incomplete_and_out_of_range() {
        let inst = simple(2, 2);
        let partial = Assignment {
            gate_of: vec![Some(0), None],
        };
        assert!(matches!(
            qap_objective(&inst, &partial),
            Err(QapError::Incomplete { plane: 1 })
        ));
        let bad = Assignment::complete(vec![0, 5]);
        assert!(matches!(
            qap_objective(&inst, &bad),
            Err(QapError::GateOutOfRange { plane: 1, .. })
        ));
    }

    #[test]
    fn feasibility_report_kinds() {
        let inst = QapInstance::new(
            vec![vec![0.0; 2]; 2],
            zero_diag_distance(2),
            Some(vec![vec![true, true], vec![true, false]]),
            [(0, 1)],
        )
        .unwrap();
        let ok = check_feasible(&inst, &Assignment::complete(vec![0, 1]));
        assert!(!ok.is_feasible()); // gate 1 masked out for plane 1
        assert_eq!(
            ok.violations,
            vec![Violation::GateRestriction { plane: 1, gate: 1 }]
        );

        let shared = check_feasible(&inst, &Assignment::complete(vec![0, 0]));
        assert_eq!(
            shared.violations,
            vec![Violation::TimeConflict {
                first: 0,
                second: 1,
                gate: 0
            }]
        );

        let partial = check_feasible(
            &inst,
            &Assignment {
                gate_of: vec![None, Some(0)],
            },
        );
        assert_eq!(partial.violations, vec![Violation::Unassigned { plane: 0 }]);
    }

    #[test]
    fn feasible_distinct_gates_no_conflicts() {
        let inst = simple(3, 3);
        let report = check_feasible(&inst, &Assignment::complete(vec![0, 1, 2]));
        assert!(report.is_feasible());
    }

    #[test]
    fn brute_force_trivial_and_infeasible() {
        let inst = simple(1, 1);
        let (a, obj) = brute_force_qap(&inst).unwrap();
        assert_eq!(a.gate_of, vec![Some(0)]);
        assert_eq!(obj, 0.0);

        let conflicted =
            QapInstance::new(vec![vec![0.0; 2]; 2], vec![vec![0.0]], None, [(0, 1)]).unwrap();
        assert!(matches!(
            brute_force_qap(&conflicted),
            Err(QapError::Infeasible)
        ));
    }

    #[test]
    fn brute_force_matches_reverse_order_enumeration() {
        let inst = random_instance(3, 3, 42);
        let (best, best_obj) = brute_force_qap(&inst).unwrap();

        // second, independent enumeration: reversed odometer order
        let mut alt_best: Option<(Vec<usize>, f64)> = None;
        let total = 3usize.pow(3);
        for code in (0..total).rev() {
            let gates = vec![code / 9 % 3, code / 3 % 3, code % 3];
            let obj = qap_objective(&inst, &Assignment::complete(gates.clone())).unwrap();
            if alt_best.as_ref().is_none_or(|(_, b)| obj <= *b) {
                alt_best = Some((gates, obj));
            }
        }
        let (_, alt_obj) = alt_best.unwrap();
        assert!((best_obj - alt_obj).abs() < 1e-12);
        // tie-break contract: no enumerated optimum is lexicographically
        // smaller than the reported one
        for code in 0..total {
            let gates = vec![code / 9 % 3, code / 3 % 3, code % 3];
            let obj = qap_objective(&inst, &Assignment::complete(gates.clone())).unwrap();
            if obj == best_obj {
                let reported: Vec<usize> = best.gate_of.iter().map(|g| g.unwrap()).collect();
                assert!(reported <= gates);
                break;
            }
        }
    }

    /// Direct statement of the QUBO objective + penalty blocks, used as the
    /// independent oracle for the matrix form.
    fn qubo_sum_form(inst: &QapInstance, penalty: f64, x: &[bool]) -> f64 {
        let xv = |i: usize, k: usize| x[inst.var(i, k)] as u8 as f64;
        let mut total = 0.0;
        for i in 0..inst.n_planes() {
            for j in 0..inst.n_planes() {
                for k in 0..inst.n_gates() {
                    for l in 0..inst.n_gates() {
                        total += xv(i, k) * xv(j, l) * inst.flow(i, j) * inst.distance(k, l);
                    }
                }
            }
        }
        for i in 0..inst.n_planes() {
            let row: f64 = (0..inst.n_gates()).map(|k| xv(i, k)).sum();
            total += penalty * (1.0 - row) * (1.0 - row);
        }
        for (i, j) in inst.conflicts() {
            for k in 0..inst.n_gates() {
                total += penalty * xv(i, k) * xv(j, k);
            }
        }
        total
    }

    #[test]
    fn strict_mode_requires_permutation_assignments() {
        let inst = simple(2, 2);
        let perm = check_feasible_strict(&inst, &Assignment::complete(vec![1, 0]));
        assert!(perm.is_feasible());
        let shared = check_feasible_strict(&inst, &Assignment::complete(vec![0, 0]));
        assert_eq!(
            shared.violations,
            vec![
                Violation::GateLoad { gate: 0, planes: 2 },
                Violation::GateLoad { gate: 1, planes: 0 },
            ]
        );
    }

    #[test]
    fn conflicts_come_from_the_conflict_graph() {
        let graph = crate::schedule::ConflictGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let inst = QapInstance::from_conflict_graph(
            vec![vec![0.0; 3]; 3],
            zero_diag_distance(2),
            None,
            &graph,
        )
        .unwrap();
        assert_eq!(inst.conflicts().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        // overlapping planes may not share, non-overlapping ones may
        let report = check_feasible(&inst, &Assignment::complete(vec![0, 1, 0]));
        assert!(report.is_feasible());
        let report = check_feasible(&inst, &Assignment::complete(vec![0, 0, 1]));
        assert!(!report.is_feasible());
    }

    #[test]
    fn qubo_matrix_form_matches_sum_form_exhaustively() {
        // the 4×4 case exercises the full documented size range
        let inst = random_instance(4, 4, 31);
        let penalty = inst.default_penalty();
        let qubo = qap_to_qubo(&inst, penalty).unwrap();
        for code in 0..(1u64 << 16) {
            let x: Vec<bool> = (0..16).map(|b| (code >> b) & 1 == 1).collect();
            let expected = qubo_sum_form(&inst, penalty, &x);
            assert!((qubo.eval(&x) - expected).abs() <= 1e-9);
        }

        for seed in 0..4u64 {
            let n_planes = 2 + (seed as usize % 2);
            let n_gates = 2 + (seed as usize / 2 % 2);
            let mut inst = random_instance(n_planes, n_gates, seed);
            if seed % 2 == 1 {
                inst = QapInstance::new(
                    (0..n_planes)
                        .map(|i| (0..n_planes).map(|j| inst.flow(i, j)).collect())
                        .collect(),
                    (0..n_gates)
                        .map(|k| (0..n_gates).map(|l| inst.distance(k, l)).collect())
                        .collect(),
                    None,
                    [(0, 1)],
                )
                .unwrap();
            }
            let penalty = inst.default_penalty();
            let qubo = qap_to_qubo(&inst, penalty).unwrap();
            let n = qubo.n_vars();
            for code in 0..(1u64 << n) {
                let x: Vec<bool> = (0..n).map(|b| (code >> b) & 1 == 1).collect();
                let expected = qubo_sum_form(&inst, penalty, &x);
                assert!(
                    (qubo.eval(&x) - expected).abs() <= 1e-9,
                    "mismatch at code {code}"
                );
            }
        }
    }

    #[test]
    fn qubo_equals_objective_on_feasible_points() {
        let inst = random_instance(3, 3, 5);
        let qubo = qap_to_qubo(&inst, inst.default_penalty()).unwrap();
        for gates in [[0, 1, 2], [2, 2, 0], [1, 0, 1]] {
            let a = Assignment::complete(gates.to_vec());
            let x = a.to_bits(inst.n_gates());
            let obj = qap_objective(&inst, &a).unwrap();
            assert!((qubo.eval(&x) - obj).abs() < 1e-9);
        }
    }

    #[test]
    fn qubo_all_zeros_pays_penalty_per_plane() {
        let inst = random_instance(3, 2, 9);
        let penalty = 100.0;
        let qubo = qap_to_qubo(&inst, penalty).unwrap();
        let x = vec![false; qubo.n_vars()];
        assert!((qubo.eval(&x) - penalty * 3.0).abs() < 1e-9);
    }

    #[test]
    fn double_gate_costs_at_least_penalty() {
        let inst = random_instance(2, 3, 11);
        let penalty = inst.default_penalty();
        let qubo = qap_to_qubo(&inst, penalty).unwrap();
        let single = Assignment::complete(vec![0, 1]).to_bits(3);
        let mut double = single.clone();
        double[inst.var(0, 2)] = true; // plane 0 now on gates 0 and 2
        assert!(qubo.eval(&double) - qubo.eval(&single) >= penalty - 1e-9);
    }

    #[test]
    fn nonpositive_penalty_rejected() {
        let inst = simple(2, 2);
        assert!(matches!(
            qap_to_qubo(&inst, 0.0),
            Err(QapError::NonpositivePenalty(_))
        ));
    }

    #[test]
    fn penalty_dominance_qubo_minimum_is_feasible_and_matches_oracle() {
        for seed in [3u64, 13, 23] {
            let base = random_instance(3, 2, seed);
            let inst = QapInstance::new(
                (0..3)
                    .map(|i| (0..3).map(|j| base.flow(i, j)).collect())
                    .collect(),
                (0..2)
                    .map(|k| (0..2).map(|l| base.distance(k, l)).collect())
                    .collect(),
                None,
                [(0, 1)],
            )
            .unwrap();
            let penalty = inst.default_penalty();
            let qubo = qap_to_qubo(&inst, penalty).unwrap();
            let n = qubo.n_vars();

            let mut min_val = f64::INFINITY;
            let mut minimizers = Vec::new();
            for code in 0..(1u64 << n) {
                let x: Vec<bool> = (0..n).map(|b| (code >> b) & 1 == 1).collect();
                let v = qubo.eval(&x);
                if v < min_val - 1e-9 {
                    min_val = v;
                    minimizers = vec![x];
                } else if (v - min_val).abs() <= 1e-9 {
                    minimizers.push(x);
                }
            }

            let (_, oracle_obj) = brute_force_qap(&inst).unwrap();
            assert!((min_val - oracle_obj).abs() < 1e-6);
            for x in minimizers {
                let a = Assignment::from_bits(&x, 3, 2);
                assert!(a.gate_of.iter().all(|g| g.is_some()));
                assert!(check_feasible(&inst, &a).is_feasible());
            }
        }
    }

    #[test]
    fn objective_invariant_under_gate_relabeling() {
        let inst = random_instance(3, 3, 17);
        let perm = [2usize, 0, 1];
        let permuted_distance: Vec<Vec<f64>> = (0..3)
            .map(|k| (0..3).map(|l| inst.distance(perm[k], perm[l])).collect())
            .collect();
        let relabeled = QapInstance::new(
            (0..3)
                .map(|i| (0..3).map(|j| inst.flow(i, j)).collect())
                .collect(),
            permuted_distance,
            None,
            [],
        )
        .unwrap();
        // gate g in the original is called π^{-1}(g) after relabeling
        let inv = |g: usize| perm.iter().position(|&p| p == g).unwrap();
        for gates in [[0, 1, 2], [1, 1, 0], [2, 0, 2]] {
            let orig = qap_objective(&inst, &Assignment::complete(gates.to_vec())).unwrap();
            let mapped: Vec<usize> = gates.iter().map(|&g| inv(g)).collect();
            let new = qap_objective(&relabeled, &Assignment::complete(mapped)).unwrap();
            assert!((orig - new).abs() < 1e-9);
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = QapInstance::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            Some(vec![vec![true, false], vec![true, true]]),
            [(0, 1)],
        )
        .unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: QapInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back.n_planes(), 2);
        assert!(!back.gate_allowed(0, 1));
        assert_eq!(back.conflicts().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn asymmetric_distance_rejected() {
        let err = QapInstance::new(
            vec![vec![0.0]],
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            None,
            [],
        )
        .unwrap_err();
        assert!(matches!(err, QapError::BadDistance { .. }));
    }
}
