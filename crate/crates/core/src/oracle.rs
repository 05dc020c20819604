//! Classical ground truth: exhaustive ground-state search over all basis
//! states, proper-coloring verification, and a DSATUR greedy baseline.
//!
//! Every quantum-path result in the toolkit is validated against these.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::hamiltonian::{DecodedColoring, IsingHamiltonian};
use crate::schedule::ConflictGraph;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{n_qubits} qubits exceed the enumeration cap of {cap} (2^{cap} states)")]
    CapExceeded { n_qubits: usize, cap: usize },
}

/// Default enumeration cap: 2^24 ≈ 16.7M evaluations stays under a minute.
pub const DEFAULT_ORACLE_CAP: usize = 24;

/// At most this many minimizers are listed; the true count is always kept.
pub const GROUND_STATE_LIST_CAP: usize = 10_000;

/// Exact minimum of a diagonal Hamiltonian with its minimizing bitstrings
/// (list truncated at [`GROUND_STATE_LIST_CAP`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub ground_energy: f64,
    pub ground_states: Vec<String>,
    pub n_ground_states: u64,
    pub n_enumerated: u64,
}

/// Enumerate all 2^n bitstrings and return the exact minimum and all
/// minimizers. The chunked scan parallelizes; the merge is deterministic
/// (chunks combine in index order, minimizers stay index-sorted).
pub fn brute_force_ground_state(
    h: &IsingHamiltonian,
    cap: usize,
) -> Result<GroundTruth, OracleError> {
    let n = h.n_qubits();
    if n > cap || n > 63 {
        return Err(OracleError::CapExceeded {
            n_qubits: n,
            cap: cap.min(63),
        });
    }
    let total: u64 = 1u64 << n;
    let compiled = h.compiled();

    let chunk_size: u64 = 1 << 16;
    let n_chunks = total.div_ceil(chunk_size);

    struct Partial {
        min: f64,
        states: Vec<u64>,
        count: u64,
    }

    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * chunk_size;
            let end = (start + chunk_size).min(total);
            let mut min = f64::INFINITY;
            let mut states = Vec::new();
            let mut count = 0u64;
            for idx in start..end {
                let e = compiled.energy(idx);
                if e < min {
                    min = e;
                    states.clear();
                    states.push(idx);
                    count = 1;
                } else if e == min {
                    count += 1;
                    if states.len() < GROUND_STATE_LIST_CAP {
                        states.push(idx);
                    }
                }
            }
            Partial { min, states, count }
        })
        .collect();

    let mut min = f64::INFINITY;
    let mut states: Vec<u64> = Vec::new();
    let mut count = 0u64;
    for p in partials {
        if p.min < min {
            min = p.min;
            states = p.states;
            count = p.count;
        } else if p.min == min {
            count += p.count;
            let room = GROUND_STATE_LIST_CAP.saturating_sub(states.len());
            states.extend(p.states.into_iter().take(room));
        }
    }

    Ok(GroundTruth {
        ground_energy: min,
        ground_states: states
            .into_iter()
            .map(|idx| bits::index_to_text(idx, n))
            .collect(),
        n_ground_states: count,
        n_enumerated: total,
    })
}

/// True iff the decoded coloring is complete, uses colors below k, and no
/// edge is monochromatic.
pub fn verify_coloring(g: &ConflictGraph, coloring: &DecodedColoring, k: usize) -> bool {
    if !coloring.valid || coloring.color_of.len() != g.n() {
        return false;
    }
    let colors: Vec<usize> = coloring.color_of.iter().map(|c| c.unwrap()).collect();
    colors.iter().all(|&c| c < k) && g.edges().all(|(i, j)| colors[i] != colors[j])
}

/// DSATUR greedy coloring: repeatedly color the node with the highest
/// saturation (distinct neighbor colors), breaking ties by higher degree then
/// lower index, with the smallest feasible color. Always proper.
pub fn greedy_coloring(g: &ConflictGraph) -> (Vec<usize>, usize) {
    let n = g.n();
    let adj = g.adjacency_lists();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut color: Vec<Option<usize>> = vec![None; n];
    let mut colors_used = 0usize;

    for _ in 0..n {
        // saturation = number of distinct colors among colored neighbors
        let node = (0..n)
            .filter(|&v| color[v].is_none())
            .max_by_key(|&v| {
                let mut neighbor_colors: Vec<usize> =
                    adj[v].iter().filter_map(|&u| color[u]).collect();
                neighbor_colors.sort_unstable();
                neighbor_colors.dedup();
                // ties: higher degree, then lower index
                (neighbor_colors.len(), degree[v], std::cmp::Reverse(v))
            })
            .expect("uncolored node exists");
        let mut taken: Vec<usize> = adj[node].iter().filter_map(|&u| color[u]).collect();
        taken.sort_unstable();
        taken.dedup();
        let c = (0..).find(|c| !taken.contains(c)).unwrap();
        color[node] = Some(c);
        colors_used = colors_used.max(c + 1);
    }

    (color.into_iter().map(|c| c.unwrap()).collect(), colors_used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{binary_coloring_hamiltonian, decode, Encoding, IsingBuilder};

    #[test]
    fn ground_state_of_single_z() {
        let mut b = IsingBuilder::new(1);
        b.add_term(vec![0], 1.0);
        let gt = brute_force_ground_state(&b.build(), 24).unwrap();
        assert_eq!(gt.ground_energy, -1.0);
        assert_eq!(gt.ground_states, vec!["0"]);
        assert_eq!(gt.n_ground_states, 1);
        assert_eq!(gt.n_enumerated, 2);
    }

    #[test]
    fn triangle_three_colors_has_six_ground_states() {
        let g = ConflictGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let h = binary_coloring_hamiltonian(&g, 3, 16.0).unwrap();
        let gt = brute_force_ground_state(&h, 24).unwrap();
        assert_eq!(gt.ground_energy, 0.0);
        assert_eq!(gt.n_ground_states, 6);
        assert_eq!(gt.ground_states.len(), 6);
        // each ground state decodes to a proper 3-coloring
        let enc = Encoding::binary(3, 3).unwrap();
        for s in &gt.ground_states {
            let d = decode(&crate::bits::text_to_bits(s).unwrap(), &enc).unwrap();
            assert!(verify_coloring(&g, &d, 3));
        }
    }

    #[test]
    fn single_edge_two_colors_ground_states() {
        let g = ConflictGraph::from_edges(2, [(0, 1)]).unwrap();
        let h = binary_coloring_hamiltonian(&g, 2, 4.0).unwrap();
        let gt = brute_force_ground_state(&h, 24).unwrap();
        assert_eq!(gt.ground_energy, 0.0);
        assert_eq!(gt.ground_states, vec!["01", "10"]);
    }

    #[test]
    fn constant_hamiltonian_lists_everything_up_to_cap() {
        let h = IsingHamiltonian::constant_only(3, 2.5);
        let gt = brute_force_ground_state(&h, 24).unwrap();
        assert_eq!(gt.ground_energy, 2.5);
        assert_eq!(gt.n_ground_states, 8);
    }

    #[test]
    fn cap_is_enforced() {
        let h = IsingHamiltonian::constant_only(25, 0.0);
        assert!(matches!(
            brute_force_ground_state(&h, 24),
            Err(OracleError::CapExceeded {
                n_qubits: 25,
                cap: 24
            })
        ));
    }

    #[test]
    fn enumeration_order_does_not_matter() {
        // reversed-order sequential enumeration as the independent check
        let g = ConflictGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let h = binary_coloring_hamiltonian(&g, 2, 4.0).unwrap();
        let gt = brute_force_ground_state(&h, 24).unwrap();

        let compiled = h.compiled();
        let total = 1u64 << h.n_qubits();
        let mut min = f64::INFINITY;
        let mut states: Vec<u64> = Vec::new();
        for idx in (0..total).rev() {
            let e = compiled.energy(idx);
            if e < min {
                min = e;
                states = vec![idx];
            } else if e == min {
                states.push(idx);
            }
        }
        states.sort_unstable();
        assert_eq!(gt.ground_energy, min);
        assert_eq!(
            gt.ground_states,
            states
                .into_iter()
                .map(|i| crate::bits::index_to_text(i, h.n_qubits()))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn verify_coloring_cases() {
        let empty = ConflictGraph::new(2);
        let ok = DecodedColoring {
            color_of: vec![Some(0), Some(0)],
            valid: true,
        };
        assert!(verify_coloring(&empty, &ok, 1));

        let edge = ConflictGraph::from_edges(2, [(0, 1)]).unwrap();
        assert!(!verify_coloring(&edge, &ok, 2));

        let invalid = DecodedColoring {
            color_of: vec![Some(0), None],
            valid: false,
        };
        assert!(!verify_coloring(&edge, &invalid, 2));
    }

    #[test]
    fn greedy_empty_graph_uses_one_color() {
        let g = ConflictGraph::new(3);
        let (colors, used) = greedy_coloring(&g);
        assert_eq!(colors, vec![0, 0, 0]);
        assert_eq!(used, 1);
    }

    #[test]
    fn greedy_k4_needs_four_colors() {
        let g =
            ConflictGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let (colors, used) = greedy_coloring(&g);
        assert_eq!(used, 4);
        let mut sorted = colors.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }

    #[test]
    fn greedy_output_is_always_proper() {
        // a few structured graphs: path, cycle, bipartite
        let graphs = [
            ConflictGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
            ConflictGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap(),
            ConflictGraph::from_edges(6, [(0, 3), (0, 4), (1, 4), (1, 5), (2, 5)]).unwrap(),
        ];
        for g in graphs {
            let (colors, used) = greedy_coloring(&g);
            let decoded = DecodedColoring {
                color_of: colors.iter().map(|&c| Some(c)).collect(),
                valid: true,
            };
            assert!(verify_coloring(&g, &decoded, used));
        }
    }

    #[test]
    fn binary_ground_energy_zero_iff_colorable() {
        // K4 with k=3 is not colorable: ground energy must be positive
        let k4 =
            ConflictGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let h = binary_coloring_hamiltonian(&k4, 3, 16.0).unwrap();
        let gt = brute_force_ground_state(&h, 24).unwrap();
        assert!(gt.ground_energy > 0.0);

        // path is 2-colorable: ground energy exactly zero
        let p3 = ConflictGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let h = binary_coloring_hamiltonian(&p3, 2, 4.0).unwrap();
        let gt = brute_force_ground_state(&h, 24).unwrap();
        assert_eq!(gt.ground_energy, 0.0);
    }
}
