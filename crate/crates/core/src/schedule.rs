//! Flight schedules and the interval-overlap conflict graph.
//!
//! Flights occupy a gate over the half-open interval `[arrival, departure)`,
//! in integer minutes, so back-to-back flights with `dep_i == arr_j` do not
//! conflict and overlap tests stay exact. The conflict graph has one node per
//! flight and an edge wherever two occupancy intervals intersect; coloring it
//! with at most `gate_count` colors is the gate-assignment problem.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate flight id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: flight `{id}` has arrival {arrival} >= departure {departure}")]
    EmptyInterval {
        line: usize,
        id: String,
        arrival: i64,
        departure: i64,
    },
    #[error("gate count missing: add a `# gates=<k>` directive or pass --gates")]
    MissingGateCount,
    #[error("gate count must be at least 1")]
    ZeroGates,
    #[error("coloring covers {got} nodes but the graph has {n}")]
    ColoringSize { n: usize, got: usize },
    #[error("edge ({i}, {j}) is out of range for {n} nodes")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },
    #[error("self-loop on node {node} is not allowed")]
    SelfLoop { node: usize },
}

/// A flight's gate-occupancy interval, in integer minutes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flight {
    pub id: String,
    pub arrival: i64,
    pub departure: i64,
}

/// An ordered list of flights plus the number of gates available to park them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlightSchedule {
    pub flights: Vec<Flight>,
    pub gate_count: usize,
}

/// Undirected loop-free graph over flight indices, stored as a set of
/// normalized `(i, j)` pairs with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ConflictGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

/// Wire format: `{ "n": int, "edges": [[i, j], ...] }`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl From<ConflictGraph> for GraphJson {
    fn from(g: ConflictGraph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges.into_iter().collect(),
        }
    }
}

impl TryFrom<GraphJson> for ConflictGraph {
    type Error = ScheduleError;

    fn try_from(raw: GraphJson) -> Result<Self, Self::Error> {
        ConflictGraph::from_edges(raw.n, raw.edges)
    }
}

impl ConflictGraph {
    pub fn new(n: usize) -> Self {
        ConflictGraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Build from an edge list, normalizing pair order and rejecting
    /// self-loops and out-of-range endpoints.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ScheduleError> {
        let mut g = ConflictGraph::new(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), ScheduleError> {
        if i == j {
            return Err(ScheduleError::SelfLoop { node: i });
        }
        if i >= self.n || j >= self.n {
            return Err(ScheduleError::EdgeOutOfRange { i, j, n: self.n });
        }
        self.edges.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in sorted order, each unordered pair exactly once as `(i, j)`, i < j.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Symmetric 0/1 adjacency matrix view.
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.n]; self.n];
        for &(i, j) in &self.edges {
            a[i][j] = 1;
            a[j][i] = 1;
        }
        a
    }

    /// Neighbor lists, sorted ascending per node.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| i == node || j == node)
            .count()
    }
}

/// Parse the CSV schedule format: header `id,arrival,departure`, one flight
/// per row, timestamps either integer minutes or `HH:MM`. A `# gates=<k>`
/// directive line supplies the gate count unless `gate_override` is given.
pub fn parse_schedule(
    text: &str,
    gate_override: Option<usize>,
) -> Result<FlightSchedule, ScheduleError> {
    let mut flights = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut directive_gates: Option<usize> = None;
    let mut header_seen = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(value) = rest.strip_prefix("gates") {
                let value = value.trim_start();
                if let Some(k_str) = value.strip_prefix('=') {
                    let k =
                        k_str
                            .trim()
                            .parse::<usize>()
                            .map_err(|_| ScheduleError::Malformed {
                                line: line_no,
                                msg: format!("invalid gate count `{}`", k_str.trim()),
                            })?;
                    directive_gates = Some(k);
                }
            }
            continue;
        }
        if !header_seen {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields != ["id", "arrival", "departure"] {
                return Err(ScheduleError::Malformed {
                    line: line_no,
                    msg: "expected header `id,arrival,departure`".into(),
                });
            }
            header_seen = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ScheduleError::Malformed {
                line: line_no,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(ScheduleError::Malformed {
                line: line_no,
                msg: "empty flight id".into(),
            });
        }
        if let Some(first) = seen.insert(id.to_string(), line_no) {
            let _ = first;
            return Err(ScheduleError::DuplicateId {
                line: line_no,
                id: id.to_string(),
            });
        }
        let arrival = parse_minutes(fields[1], line_no)?;
        let departure = parse_minutes(fields[2], line_no)?;
        if arrival >= departure {
            return Err(ScheduleError::EmptyInterval {
                line: line_no,
                id: id.to_string(),
                arrival,
                departure,
            });
        }
        flights.push(Flight {
            id: id.to_string(),
            arrival,
            departure,
        });
    }

    let gate_count = gate_override
        .or(directive_gates)
        .ok_or(ScheduleError::MissingGateCount)?;
    if gate_count == 0 {
        return Err(ScheduleError::ZeroGates);
    }
    Ok(FlightSchedule {
        flights,
        gate_count,
    })
}

fn parse_minutes(field: &str, line: usize) -> Result<i64, ScheduleError> {
    if let Some((h, m)) = field.split_once(':') {
        let hours: i64 = h.parse().map_err(|_| ScheduleError::Malformed {
            line,
            msg: format!("invalid time `{field}`"),
        })?;
        let minutes: i64 = m.parse().map_err(|_| ScheduleError::Malformed {
            line,
            msg: format!("invalid time `{field}`"),
        })?;
        if hours < 0 || !(0..60).contains(&minutes) || m.len() != 2 {
            return Err(ScheduleError::Malformed {
                line,
                msg: format!("invalid time `{field}`"),
            });
        }
        Ok(hours * 60 + minutes)
    } else {
        field.parse().map_err(|_| ScheduleError::Malformed {
            line,
            msg: format!("invalid timestamp `{field}`"),
        })
    }
}

/// Conflict graph of a schedule: edge `{i, j}` iff the half-open occupancy
/// intervals of flights i and j intersect.
pub fn build_conflict_graph(schedule: &FlightSchedule) -> ConflictGraph {
    build_conflict_graph_buffered(schedule, 0)
}

/// Same as [`build_conflict_graph`] but with every interval widened by
/// `buffer` minutes on each side, for turnaround padding.
pub fn build_conflict_graph_buffered(schedule: &FlightSchedule, buffer: i64) -> ConflictGraph {
    let mut g = ConflictGraph::new(schedule.flights.len());
    for (i, a) in schedule.flights.iter().enumerate() {
        for (j, b) in schedule.flights.iter().enumerate().skip(i + 1) {
            let (a0, a1) = (a.arrival - buffer, a.departure + buffer);
            let (b0, b1) = (b.arrival - buffer, b.departure + buffer);
            if a0 < b1 && b0 < a1 {
                g.add_edge(i, j).expect("indices in range by construction");
            }
        }
    }
    g
}

/// Fill palette for DOT output; color c uses entry `c % PALETTE.len()`.
const PALETTE: [&str; 12] = [
    "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00",
    "#cab2d6", "#6a3a9a", "#ffff99", "#b15928",
];

/// Render the graph as Graphviz DOT text. With a coloring (one color index
/// per node, covering all nodes) nodes are filled from a fixed palette.
pub fn export_dot(
    graph: &ConflictGraph,
    coloring: Option<&[usize]>,
) -> Result<String, ScheduleError> {
    if let Some(colors) = coloring {
        if colors.len() != graph.n() {
            return Err(ScheduleError::ColoringSize {
                n: graph.n(),
                got: colors.len(),
            });
        }
    }
    let mut out = String::from("graph G {\n");
    if let Some(colors) = coloring {
        out.push_str("  node [style=filled];\n");
        for (node, &c) in colors.iter().enumerate() {
            out.push_str(&format!(
                "  {node} [fillcolor=\"{}\"];\n",
                PALETTE[c % PALETTE.len()]
            ));
        }
    } else {
        for node in 0..graph.n() {
            out.push_str(&format!("  {node};\n"));
        }
    }
    for (i, j) in graph.edges() {
        out.push_str(&format!("  {i} -- {j};\n"));
    }
    out.push_str("}\n");
    Ok(out)
}
