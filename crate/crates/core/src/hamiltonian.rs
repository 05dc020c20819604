//! Diagonal Ising Hamiltonians for gate assignment under two qubit encodings.
//!
//! Everything here is a weighted sum of Pauli-Z monomials plus a constant, so
//! all operators are diagonal in the computational basis and energies can be
//! evaluated directly on bitstrings.
//!
//! Bit↔spin convention, fixed once for the whole crate: a measured bit
//! b ∈ {0,1} maps to spin z = 2b − 1, and a QUBO variable x equals b. The
//! spectrum is invariant under the global Z → −Z relabeling this implies
//! relative to the physics convention, and with it the non-power-of-two
//! penalty punishes exactly the out-of-range color codes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qap::QuboProblem;
use crate::schedule::ConflictGraph;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("bitstring has {got} bits, Hamiltonian acts on {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },
    #[error("one-hot encoding needs at least 1 color")]
    ZeroColors,
    #[error("binary encoding needs at least 2 colors, got {0}")]
    TooFewColors(usize),
    #[error("penalty must be positive, got {0}")]
    NonpositivePenalty(f64),
    #[error("expected {expected} edge weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("term references qubit {qubit}, but the Hamiltonian has {n_qubits}")]
    QubitOutOfRange { qubit: u32, n_qubits: usize },
}

/// One Z-monomial: `coeff · Π_{q ∈ support} Z_q`. Support indices are sorted
/// and distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTerm {
    pub support: Vec<u32>,
    pub coeff: f64,
}

/// Weighted Pauli-Z monomials plus a constant; diagonal by construction.
/// Terms are canonical: unique supports, zero coefficients dropped, sorted by
/// support size then lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HamiltonianJson", into = "HamiltonianJson")]
pub struct IsingHamiltonian {
    n_qubits: usize,
    constant: f64,
    terms: Vec<ZTerm>,
}

/// Wire format: `{ "n_qubits": int, "constant": float,
/// "terms": [{"support": [q, ...], "coeff": float}] }`.
#[derive(Serialize, Deserialize)]
struct HamiltonianJson {
    n_qubits: usize,
    constant: f64,
    terms: Vec<ZTerm>,
}

impl From<IsingHamiltonian> for HamiltonianJson {
    fn from(h: IsingHamiltonian) -> Self {
        HamiltonianJson {
            n_qubits: h.n_qubits,
            constant: h.constant,
            terms: h.terms,
        }
    }
}

impl TryFrom<HamiltonianJson> for IsingHamiltonian {
    type Error = HamiltonianError;

    fn try_from(raw: HamiltonianJson) -> Result<Self, Self::Error> {
        let mut b = IsingBuilder::new(raw.n_qubits);
        b.add_constant(raw.constant);
        for term in raw.terms {
            for &q in &term.support {
                if q as usize >= raw.n_qubits {
                    return Err(HamiltonianError::QubitOutOfRange {
                        qubit: q,
                        n_qubits: raw.n_qubits,
                    });
                }
            }
            let mut support = term.support;
            support.sort_unstable();
            support.dedup();
            b.add_term(support, term.coeff);
        }
        Ok(b.build())
    }
}

/// Accumulates Z-monomials, merging equal supports.
#[derive(Debug, Clone)]
pub struct IsingBuilder {
    n_qubits: usize,
    constant: f64,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl IsingBuilder {
    pub fn new(n_qubits: usize) -> Self {
        IsingBuilder {
            n_qubits,
            constant: 0.0,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    /// `support` must be sorted and duplicate-free.
    pub fn add_term(&mut self, support: Vec<u32>, coeff: f64) {
        if support.is_empty() {
            self.constant += coeff;
        } else {
            *self.terms.entry(support).or_insert(0.0) += coeff;
        }
    }

    pub fn build(self) -> IsingHamiltonian {
        let mut terms: Vec<ZTerm> = self
            .terms
            .into_iter()
            .filter(|&(_, coeff)| coeff != 0.0)
            .map(|(support, coeff)| ZTerm { support, coeff })
            .collect();
        terms.sort_by(|a, b| (a.support.len(), &a.support).cmp(&(b.support.len(), &b.support)));
        IsingHamiltonian {
            n_qubits: self.n_qubits,
            constant: self.constant,
            terms,
        }
    }
}

impl IsingHamiltonian {
    pub fn constant_only(n_qubits: usize, constant: f64) -> Self {
        IsingHamiltonian {
            n_qubits,
            constant,
            terms: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[ZTerm] {
        &self.terms
    }

    pub fn max_locality(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.support.len())
            .max()
            .unwrap_or(0)
    }

    /// Energy of a measured bitstring: `constant + Σ coeff · Π spin(b_q)`
    /// with spin(b) = 2b − 1.
    pub fn eval_energy(&self, bits: &[bool]) -> Result<f64, HamiltonianError> {
        if bits.len() != self.n_qubits {
            return Err(HamiltonianError::LengthMismatch {
                expected: self.n_qubits,
                got: bits.len(),
            });
        }
        let mut total = self.constant;
        for term in &self.terms {
            let zeros = term.support.iter().filter(|&&q| !bits[q as usize]).count();
            total += if zeros % 2 == 0 {
                term.coeff
            } else {
                -term.coeff
            };
        }
        Ok(total)
    }

    /// Mask-compiled view for hot loops (basis-state index evaluation).
    /// Requires at most 64 qubits.
    pub fn compiled(&self) -> CompiledHamiltonian {
        assert!(
            self.n_qubits <= 64,
            "compiled evaluation supports at most 64 qubits"
        );
        CompiledHamiltonian {
            n_qubits: self.n_qubits,
            constant: self.constant,
            masks: self
                .terms
                .iter()
                .map(|t| {
                    (
                        t.support.iter().fold(0u64, |m, &q| m | (1 << q)),
                        t.support.len() as u32,
                        t.coeff,
                    )
                })
                .collect(),
        }
    }
}

/// Precomputed bitmask form of an [`IsingHamiltonian`] for fast evaluation
/// over basis-state indices.
pub struct CompiledHamiltonian {
    n_qubits: usize,
    constant: f64,
    masks: Vec<(u64, u32, f64)>,
}

impl CompiledHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn energy(&self, index: u64) -> f64 {
        let mut total = self.constant;
        for &(mask, size, coeff) in &self.masks {
            let zeros = size - (index & mask).count_ones();
            total += if zeros.is_multiple_of(2) {
                coeff
            } else {
                -coeff
            };
        }
        total
    }
}

/// Qubit layouts for graph coloring: one qubit per (node, color) pair, or a
/// ⌈log₂ k⌉-bit code per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    OneHot,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub kind: EncodingKind,
    pub n_nodes: usize,
    pub n_colors: usize,
}

impl Encoding {
    pub fn one_hot(n_nodes: usize, n_colors: usize) -> Result<Self, HamiltonianError> {
        if n_colors == 0 {
            return Err(HamiltonianError::ZeroColors);
        }
        Ok(Encoding {
            kind: EncodingKind::OneHot,
            n_nodes,
            n_colors,
        })
    }

    pub fn binary(n_nodes: usize, n_colors: usize) -> Result<Self, HamiltonianError> {
        if n_colors < 2 {
            return Err(HamiltonianError::TooFewColors(n_colors));
        }
        Ok(Encoding {
            kind: EncodingKind::Binary,
            n_nodes,
            n_colors,
        })
    }

    /// Slots per node: k for one-hot, m = ⌈log₂ k⌉ for binary.
    pub fn bits_per_node(&self) -> usize {
        match self.kind {
            EncodingKind::OneHot => self.n_colors,
            EncodingKind::Binary => ceil_log2(self.n_colors),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_nodes * self.bits_per_node()
    }

    /// Qubit holding slot `l` of node `i`.
    pub fn qubit(&self, node: usize, slot: usize) -> usize {
        node * self.bits_per_node() + slot
    }
}

pub fn ceil_log2(k: usize) -> usize {
    assert!(k >= 1);
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

/// A coloring read back from measured bits; `valid` means every node decoded
/// to an in-range color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedColoring {
    pub color_of: Vec<Option<usize>>,
    pub valid: bool,
}

/// Read a gate assignment out of a measured bitstring. One-hot blocks decode
/// iff exactly one bit is set; binary blocks are big-endian color codes
/// (slot 0 most significant), valid iff the code is below k.
pub fn decode(bits: &[bool], enc: &Encoding) -> Result<DecodedColoring, HamiltonianError> {
    if bits.len() != enc.n_qubits() {
        return Err(HamiltonianError::LengthMismatch {
            expected: enc.n_qubits(),
            got: bits.len(),
        });
    }
    let bpn = enc.bits_per_node();
    let mut color_of = Vec::with_capacity(enc.n_nodes);
    for node in 0..enc.n_nodes {
        let block = &bits[node * bpn..(node + 1) * bpn];
        let color = match enc.kind {
            EncodingKind::OneHot => {
                let set: Vec<usize> = block
                    .iter()
                    .enumerate()
                    .filter_map(|(slot, &b)| b.then_some(slot))
                    .collect();
                match set.as_slice() {
                    [slot] => Some(*slot),
                    _ => None,
                }
            }
            EncodingKind::Binary => {
                let code = block.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                (code < enc.n_colors).then_some(code)
            }
        };
        color_of.push(color);
    }
    let valid = color_of.iter().all(|c| c.is_some());
    Ok(DecodedColoring { color_of, valid })
}

/// Convert a QUBO to its Ising form via x = (z + 1)/2: for every 0/1 vector
/// x, the Ising energy at spins z = 2x − 1 equals the QUBO value exactly.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingHamiltonian {
    let n = q.n_vars();
    let mut b = IsingBuilder::new(n);
    b.add_constant(q.constant());
    for i in 0..n {
        // diagonal acts linearly on binary variables
        let w = q.linear(i) + q.quad(i, i);
        if w != 0.0 {
            b.add_constant(w / 2.0);
            b.add_term(vec![i as u32], w / 2.0);
        }
        for j in (i + 1)..n {
            let w = q.quad(i, j);
            if w != 0.0 {
                // w x_i x_j = w/4 (1 + z_i + z_j + z_i z_j)
                b.add_constant(w / 4.0);
                b.add_term(vec![i as u32], w / 4.0);
                b.add_term(vec![j as u32], w / 4.0);
                b.add_term(vec![i as u32, j as u32], w / 4.0);
            }
        }
    }
    b.build()
}

/// Standard one-hot coloring Hamiltonian on n·k qubits: edge clash terms
/// `Σ_c w_e x_{i,c} x_{j,c}` plus the one-color-per-node penalty
/// `P Σ_i (1 − Σ_c x_{i,c})²`, converted through the QUBO form.
pub fn onehot_coloring_hamiltonian(
    graph: &ConflictGraph,
    k: usize,
    penalty: f64,
    weights: Option<&[f64]>,
) -> Result<IsingHamiltonian, HamiltonianError> {
    if k == 0 {
        return Err(HamiltonianError::ZeroColors);
    }
    if penalty <= 0.0 {
        return Err(HamiltonianError::NonpositivePenalty(penalty));
    }
    if let Some(w) = weights {
        if w.len() != graph.edge_count() {
            return Err(HamiltonianError::WeightCount {
                expected: graph.edge_count(),
                got: w.len(),
            });
        }
    }
    let n = graph.n();
    let var = |node: usize, color: usize| node * k + color;
    let mut qubo = QuboProblem::new(n * k, penalty);
    for (e, (i, j)) in graph.edges().enumerate() {
        let w = weights.map(|w| w[e]).unwrap_or(1.0);
        for c in 0..k {
            qubo.add_quad(var(i, c), var(j, c), w);
        }
    }
    for i in 0..n {
        qubo.add_constant(penalty);
        for c in 0..k {
            qubo.add_linear(var(i, c), -penalty);
            for c2 in (c + 1)..k {
                qubo.add_quad(var(i, c), var(i, c2), 2.0 * penalty);
            }
        }
    }
    Ok(qubo_to_ising(&qubo))
}

/// Space-efficient coloring Hamiltonian on n·⌈log₂ k⌉ qubits.
///
/// Per edge (i, j), the cost is
/// `Σ_{a ∈ {0,1}^m} Π_l (1 + (−1)^{a_l} Z_{i,l}) (1 + (−1)^{a_l} Z_{j,l})`,
/// which contributes 4^m when both nodes carry the same code and 0 otherwise.
/// When k is not a power of two, each out-of-range code v ∈ [k, 2^m) adds a
/// per-node projector of weight `penalty` (costing penalty·2^m when hit).
pub fn binary_coloring_hamiltonian(
    graph: &ConflictGraph,
    k: usize,
    penalty: f64,
) -> Result<IsingHamiltonian, HamiltonianError> {
    if k < 2 {
        return Err(HamiltonianError::TooFewColors(k));
    }
    if penalty <= 0.0 {
        return Err(HamiltonianError::NonpositivePenalty(penalty));
    }
    let enc = Encoding::binary(graph.n(), k)?;
    let m = enc.bits_per_node();
    let mut b = IsingBuilder::new(enc.n_qubits());

    for (i, j) in graph.edges() {
        for a in 0..(1usize << m) {
            // product over slots of (1 + (-1)^{a_l} Z_{i,l})(1 + (-1)^{a_l} Z_{j,l})
            let mut poly = ZPoly::one();
            for l in 0..m {
                let sign = if (a >> (m - 1 - l)) & 1 == 1 {
                    -1.0
                } else {
                    1.0
                };
                poly.mul_one_plus_z(enc.qubit(i, l) as u32, sign);
                poly.mul_one_plus_z(enc.qubit(j, l) as u32, sign);
            }
            poly.accumulate_into(&mut b, 1.0);
        }
    }

    // penalize codes v in [k, 2^m): projector onto bits(v), scaled by penalty.
    // under spin(b) = 2b − 1 the factor selecting bit value 1 is (1 + Z).
    for v in k..(1usize << m) {
        for node in 0..graph.n() {
            let mut poly = ZPoly::one();
            for l in 0..m {
                let bit = (v >> (m - 1 - l)) & 1;
                let sign = if bit == 1 { 1.0 } else { -1.0 };
                poly.mul_one_plus_z(enc.qubit(node, l) as u32, sign);
            }
            poly.accumulate_into(&mut b, penalty);
        }
    }

    Ok(b.build())
}

/// Symbolic polynomial over Z-monomials, keyed by sorted support.
struct ZPoly {
    terms: BTreeMap<Vec<u32>, f64>,
}

impl ZPoly {
    fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), 1.0);
        ZPoly { terms }
    }

    /// Multiply by `(1 + sign · Z_q)`; Z_q² = 1 folds repeated factors.
    fn mul_one_plus_z(&mut self, q: u32, sign: f64) {
        let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (support, coeff) in &self.terms {
            *next.entry(support.clone()).or_insert(0.0) += coeff;
            let mut toggled = support.clone();
            match toggled.binary_search(&q) {
                Ok(pos) => {
                    toggled.remove(pos);
                }
                Err(pos) => toggled.insert(pos, q),
            }
            *next.entry(toggled).or_insert(0.0) += sign * coeff;
        }
        self.terms = next;
    }

    fn accumulate_into(self, builder: &mut IsingBuilder, scale: f64) {
        for (support, coeff) in self.terms {
            builder.add_term(support, scale * coeff);
        }
    }
}

/// Resource usage of an encoded problem, per the qubit-count formulae plus
/// the built Hamiltonian's term list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub qubits: usize,
    pub terms: usize,
    pub max_locality: usize,
}

pub fn resource_report(enc: &Encoding, h: &IsingHamiltonian) -> ResourceReport {
    ResourceReport {
        qubits: enc.n_qubits(),
        terms: h.terms().len(),
        max_locality: h.max_locality(),
    }
}
