//! The bundled 24-flight / 8-gate instance: regeneration and verified
//! properties.
//!
//! `data/flights24.csv` is produced by the deterministic generator below
//! (ChaCha8, seed recorded in the file header) and committed. The instance is
//! constructed so that exactly 8 gates are needed: the peak number of
//! simultaneously parked planes is 8, which for interval conflict graphs
//! equals the chromatic number. Run
//! `cargo test -p gatesched --test instance -- --ignored regenerate` to
//! rewrite the file after changing the generator.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use gatesched::hamiltonian::DecodedColoring;
use gatesched::oracle::{greedy_coloring, verify_coloring};
use gatesched::schedule::{build_conflict_graph, parse_schedule};

const SEED: u64 = 0;
const N_FLIGHTS: usize = 24;
const N_GATES: usize = 8;

fn data_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("data/flights24.csv")
}

fn uniform_range(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (u * (hi - lo) as f64) as i64
}

/// Peak number of intervals alive at once (half-open semantics).
fn max_overlap(intervals: &[(i64, i64)]) -> usize {
    let mut events: Vec<(i64, i32)> = Vec::new();
    for &(a, d) in intervals {
        events.push((a, 1));
        events.push((d, -1));
    }
    // departures before arrivals at the same minute: [a, d) do not clash
    events.sort_by_key(|&(t, delta)| (t, delta));
    let mut current = 0i32;
    let mut peak = 0i32;
    for (_, delta) in events {
        current += delta;
        peak = peak.max(current);
    }
    peak as usize
}

fn generate(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intervals: Vec<(i64, i64)> = (0..N_FLIGHTS)
        .map(|_| {
            let arrival = uniform_range(&mut rng, 360, 1200);
            let duration = uniform_range(&mut rng, 45, 180);
            (arrival, arrival + duration)
        })
        .collect();
    intervals.sort();

    let mut text = String::new();
    text.push_str("# 24-flight / 8-gate gate-assignment instance\n");
    text.push_str(&format!(
        "# generated by tests/instance.rs with chacha8 seed {seed}; peak occupancy 8\n"
    ));
    text.push_str(&format!("# gates={N_GATES}\n"));
    text.push_str("id,arrival,departure\n");
    for (i, (a, d)) in intervals.iter().enumerate() {
        text.push_str(&format!("F{:02},{a},{d}\n", i + 1));
    }
    text
}

/// Writes data/flights24.csv; run explicitly with `-- --ignored`.
#[test]
#[ignore]
fn regenerate_bundled_instance() {
    let text = generate(SEED);
    std::fs::write(data_path(), text).unwrap();
}

#[test]
fn bundled_instance_matches_generator() {
    let committed = std::fs::read_to_string(data_path()).unwrap();
    assert_eq!(committed, generate(SEED), "regenerate data/flights24.csv");
}

#[test]
fn bundled_instance_has_24_flights_and_8_gates() {
    let text = std::fs::read_to_string(data_path()).unwrap();
    let schedule = parse_schedule(&text, None).unwrap();
    assert_eq!(schedule.flights.len(), 24);
    assert_eq!(schedule.gate_count, 8);
}

#[test]
fn bundled_instance_needs_exactly_8_gates() {
    let text = std::fs::read_to_string(data_path()).unwrap();
    let schedule = parse_schedule(&text, None).unwrap();
    let intervals: Vec<(i64, i64)> = schedule
        .flights
        .iter()
        .map(|f| (f.arrival, f.departure))
        .collect();
    // interval graphs are perfect: chromatic number == peak occupancy,
    // so the graph is 8-colorable and not 7-colorable
    assert_eq!(max_overlap(&intervals), 8);

    let graph = build_conflict_graph(&schedule);
    let (colors, used) = greedy_coloring(&graph);
    assert_eq!(used, 8, "greedy color count is frozen at 8");
    let decoded = DecodedColoring {
        color_of: colors.iter().map(|&c| Some(c)).collect(),
        valid: true,
    };
    assert!(verify_coloring(&graph, &decoded, 8));
}
