//! Command-line pipeline: `graph` (schedule → conflict graph), `solve`
//! (graph → Hamiltonian → VQE → decoded assignment), `compare` (one-hot vs
//! binary resources) and `oracle` (exact ground truth).
//!
//! Commands hand data off through files so each stage is independently
//! testable: every run writes its artifacts plus a manifest echoing the fully
//! resolved configuration, input hashes and seed. Replaying the manifest's
//! argv reproduces the result byte-for-byte (durations live only in the
//! manifest).
//!
//! Exit codes: 0 success, 2 input error, 3 resource error, 4 internal error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::hamiltonian::{
    binary_coloring_hamiltonian, onehot_coloring_hamiltonian, resource_report, Encoding,
    IsingHamiltonian, ResourceReport,
};
use crate::optim::{write_trace_csv, OptimizerConfig};
use crate::oracle::{brute_force_ground_state, greedy_coloring, verify_coloring, GroundTruth};
use crate::schedule::{build_conflict_graph_buffered, export_dot, parse_schedule, ConflictGraph};
use crate::simulator::{build_ansatz, logical_depth, DEFAULT_STATEVECTOR_CAP};
use crate::vqe::{vqe_solve, EvalMode, OptimizerKind, VqeConfig};

/// Environment variable overriding the statevector cap (qubit count).
pub const STATEVECTOR_CAP_ENV: &str = "GATESCHED_STATEVECTOR_CAP";

#[derive(Debug)]
pub enum CliError {
    /// Bad input file, flag combination or format (exit 2).
    Input(String),
    /// Problem too large for the configured caps (exit 3).
    Resource(String),
    /// Output write failures and other internal faults (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Resource(msg) | CliError::Internal(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gatesched",
    version,
    about = "Gate scheduling via QUBO/Ising graph coloring and a simulated VQE"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a flight schedule CSV and emit the conflict graph (JSON + DOT)
    /// with a greedy gate assignment
    Graph(GraphArgs),
    /// Encode a conflict graph as an Ising Hamiltonian and search its ground
    /// state with the simulated VQE
    Solve(SolveArgs),
    /// Compare one-hot and binary encodings: qubits, terms, logical depth
    Compare(CompareArgs),
    /// Exhaustive ground truth for a Hamiltonian or encoded graph
    Oracle(OracleArgs),
}

#[derive(clap::Args, Debug)]
pub struct GraphArgs {
    /// Schedule CSV (`id,arrival,departure` with a `# gates=<k>` directive)
    pub input: PathBuf,
    /// Override the schedule's gate count
    #[arg(long)]
    pub gates: Option<usize>,
    /// Widen every occupancy interval by this many minutes on each side
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(i64).range(0..))]
    pub buffer: i64,
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    /// Print the machine-readable summary to stdout
    #[arg(long)]
    pub json: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Onehot,
    Binary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Spsa,
    Cobyla,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    /// Conflict graph JSON or schedule CSV (decided by extension)
    pub input: PathBuf,
    /// Number of gates (colors); defaults to the schedule's gate count for
    /// CSV input
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = EncodingArg::Binary)]
    pub encoding: EncodingArg,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Cobyla)]
    pub optimizer: OptimizerArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1024)]
    pub shots: u64,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Master seed; a random one is drawn (and recorded) when omitted
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Constraint penalty weight; defaults to 4^m (binary) or one above the
    /// total edge weight (one-hot)
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_evals: usize,
    /// Skip the exact ground-truth comparison above this qubit count
    #[arg(long, default_value_t = crate::oracle::DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    /// Interval widening when the input is a schedule CSV
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(i64).range(0..))]
    pub buffer: i64,
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(clap::Args, Debug)]
pub struct CompareArgs {
    /// Conflict graph JSON; alternatively give --nodes for a complete graph
    pub input: Option<PathBuf>,
    /// Compare on the complete graph with this many nodes
    #[arg(long, conflicts_with = "input")]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Also run the VQE under both encodings and report wall-times
    #[arg(long)]
    pub solve: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(clap::Args, Debug)]
pub struct OracleArgs {
    /// Hamiltonian JSON, or a conflict graph JSON when --encoding is given
    pub input: PathBuf,
    #[arg(long, value_enum, requires = "k")]
    pub encoding: Option<EncodingArg>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long, default_value_t = crate::oracle::DEFAULT_ORACLE_CAP)]
    pub cap: usize,
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// One manifest per run: resolved argv (replayable), config echo, input
/// hashes, seed, version, wall-clock duration and output files.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    version: String,
    duration_ms: u128,
    outputs: Vec<String>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Graph(args) => cmd_graph(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

// ---------------------------------------------------------------- graph

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    edges: usize,
    gates: usize,
    colors_used: usize,
    proper: bool,
}

fn cmd_graph(args: GraphArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let text = read_input(&args.input)?;
    let schedule = parse_schedule(&text, args.gates)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
    let graph = build_conflict_graph_buffered(&schedule, args.buffer);
    let (colors, colors_used) = greedy_coloring(&graph);
    let decoded = crate::hamiltonian::DecodedColoring {
        color_of: colors.iter().map(|&c| Some(c)).collect(),
        valid: true,
    };
    let proper = verify_coloring(&graph, &decoded, colors_used);
    let dot = export_dot(&graph, Some(&colors))
        .map_err(|e| CliError::Internal(format!("dot export: {e}")))?;

    let out = ensure_out_dir(&args.out)?;
    write_json(&out, "graph.json", &graph)?;
    write_text(&out, "graph.dot", &dot)?;
    write_json(
        &out,
        "coloring.json",
        &serde_json::json!({ "colors": colors }),
    )?;

    let summary = GraphSummary {
        n: graph.n(),
        edges: graph.edge_count(),
        gates: schedule.gate_count,
        colors_used,
        proper,
    };
    let mut argv = vec![
        "graph".to_string(),
        args.input.display().to_string(),
        "--buffer".into(),
        args.buffer.to_string(),
    ];
    if let Some(gates) = args.gates {
        argv.extend(["--gates".into(), gates.to_string()]);
    }
    write_manifest(
        &out,
        "graph",
        argv,
        serde_json::to_value(&summary).unwrap(),
        &[&args.input],
        None,
        started,
        &["graph.json", "graph.dot", "coloring.json"],
    )?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    } else {
        println!(
            "parsed {} flights with {} gates",
            schedule.flights.len(),
            schedule.gate_count
        );
        println!(
            "conflict graph: {} nodes, {} edges",
            graph.n(),
            graph.edge_count()
        );
        println!(
            "greedy gate assignment uses {colors_used} gates ({})",
            if proper { "proper" } else { "IMPROPER" }
        );
        println!(
            "wrote graph.json, graph.dot, coloring.json to {}",
            out.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- solve

#[derive(Serialize)]
struct SolveConfigEcho {
    input: String,
    k: usize,
    encoding: &'static str,
    optimizer: &'static str,
    mode: &'static str,
    shots: u64,
    layers: usize,
    seed: u64,
    restarts: usize,
    penalty: f64,
    max_evals: usize,
    oracle_cap: usize,
    buffer: i64,
    statevector_cap: usize,
}

#[derive(Serialize)]
struct GroundTruthSummary {
    ground_energy: f64,
    gap: f64,
    n_ground_states: u64,
}

#[derive(Serialize)]
struct SolveResultFile {
    config: SolveConfigEcho,
    n_qubits: usize,
    resources: ResourceReport,
    best_energy: f64,
    best_theta: Vec<f64>,
    best_bitstring: String,
    modal_bitstring: String,
    /// Gate per flight decoded from the best sampled bitstring.
    decoded_gates: Vec<Option<usize>>,
    /// True when every flight decoded to an in-range gate and no conflicting
    /// pair shares one.
    valid: bool,
    ground_truth: Option<GroundTruthSummary>,
    trace_file: String,
    histogram_file: String,
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (graph, schedule_gates) = load_graph(&args.input, args.buffer)?;
    let k = args
        .k
        .or(schedule_gates)
        .ok_or_else(|| CliError::Input("supply --k (graph input carries no gate count)".into()))?;
    if graph.n() == 0 {
        return Err(CliError::Input("graph has no nodes to assign".into()));
    }

    let seed = args.seed.unwrap_or_else(entropy_seed);
    let statevector_cap = statevector_cap_from_env()?;
    let (enc, h, penalty) = build_encoded_hamiltonian(&graph, k, args.encoding, args.penalty)?;

    if enc.n_qubits() > statevector_cap {
        let report = resource_report(&enc, &h);
        let mut msg = format!(
            "problem needs {} qubits ({} Hamiltonian terms, locality {}), above the statevector cap of {statevector_cap}",
            report.qubits, report.terms, report.max_locality
        );
        if args.encoding == EncodingArg::Onehot {
            let binary_qubits = Encoding::binary(graph.n(), k.max(2))
                .map(|e| e.n_qubits())
                .unwrap_or(usize::MAX);
            if binary_qubits <= statevector_cap {
                msg.push_str(&format!(
                    "; --encoding binary needs only {binary_qubits} qubits for the same instance"
                ));
            } else {
                msg.push_str("; even --encoding binary is beyond desk scale here");
            }
        }
        return Err(CliError::Resource(msg));
    }

    let mut cfg = VqeConfig::new(
        match args.optimizer {
            OptimizerArg::Spsa => OptimizerKind::Spsa,
            OptimizerArg::Cobyla => OptimizerKind::Cobyla,
        },
        match args.mode {
            ModeArg::Exact => EvalMode::Exact,
            ModeArg::Sampled => EvalMode::Sampled,
        },
    );
    cfg.layers = args.layers;
    cfg.shots = args.shots;
    cfg.seed = seed;
    cfg.restarts = args.restarts;
    cfg.statevector_cap = statevector_cap;
    cfg.optimizer_cfg = OptimizerConfig {
        max_evals: args.max_evals,
        seed, // replaced per restart inside vqe_solve
        ..OptimizerConfig::default()
    };

    let mut result = vqe_solve(&h, Some(&enc), &cfg).map_err(vqe_error)?;

    let ground_truth = if h.n_qubits() <= args.oracle_cap {
        let gt = brute_force_ground_state(&h, args.oracle_cap)
            .map_err(|e| CliError::Resource(e.to_string()))?;
        result.ground_truth_gap = Some(result.best_energy - gt.ground_energy);
        Some(GroundTruthSummary {
            ground_energy: gt.ground_energy,
            gap: result.best_energy - gt.ground_energy,
            n_ground_states: gt.n_ground_states,
        })
    } else {
        None
    };

    let decoded = result.decoded.clone().expect("encoding was supplied");
    let valid = verify_coloring(&graph, &decoded, k);

    let config = SolveConfigEcho {
        input: args.input.display().to_string(),
        k,
        encoding: encoding_name(args.encoding),
        optimizer: match args.optimizer {
            OptimizerArg::Spsa => "spsa",
            OptimizerArg::Cobyla => "cobyla",
        },
        mode: match args.mode {
            ModeArg::Exact => "exact",
            ModeArg::Sampled => "sampled",
        },
        shots: args.shots,
        layers: args.layers,
        seed,
        restarts: args.restarts,
        penalty,
        max_evals: args.max_evals,
        oracle_cap: args.oracle_cap,
        buffer: args.buffer,
        statevector_cap,
    };

    let result_file = SolveResultFile {
        config,
        n_qubits: h.n_qubits(),
        resources: resource_report(&enc, &h),
        best_energy: result.best_energy,
        best_theta: result.best_theta.clone(),
        best_bitstring: result.best_bitstring.clone(),
        modal_bitstring: result.modal_bitstring.clone(),
        decoded_gates: decoded.color_of.clone(),
        valid,
        ground_truth,
        trace_file: "trace.csv".into(),
        histogram_file: "histogram.json".into(),
    };

    let out = ensure_out_dir(&args.out)?;
    write_json(&out, "result.json", &result_file)?;
    write_json(&out, "histogram.json", &result.final_histogram)?;
    write_json(&out, "hamiltonian.json", &h)?;
    let mut trace_bytes = Vec::new();
    write_trace_csv(&result.trace, &mut trace_bytes)
        .map_err(|e| CliError::Internal(format!("trace csv: {e}")))?;
    write_text(&out, "trace.csv", &String::from_utf8(trace_bytes).unwrap())?;

    let argv = vec![
        "solve".to_string(),
        args.input.display().to_string(),
        "--k".into(),
        k.to_string(),
        "--encoding".into(),
        encoding_name(args.encoding).into(),
        "--optimizer".into(),
        result_file.config.optimizer.into(),
        "--mode".into(),
        result_file.config.mode.into(),
        "--shots".into(),
        args.shots.to_string(),
        "--layers".into(),
        args.layers.to_string(),
        "--seed".into(),
        seed.to_string(),
        "--restarts".into(),
        args.restarts.to_string(),
        "--penalty".into(),
        format!("{penalty}"),
        "--max-evals".into(),
        args.max_evals.to_string(),
        "--oracle-cap".into(),
        args.oracle_cap.to_string(),
        "--buffer".into(),
        args.buffer.to_string(),
    ];
    write_manifest(
        &out,
        "solve",
        argv,
        serde_json::to_value(&result_file.config).unwrap(),
        &[&args.input],
        Some(seed),
        started,
        &[
            "result.json",
            "trace.csv",
            "histogram.json",
            "hamiltonian.json",
        ],
    )?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&result_file).unwrap());
    } else {
        println!(
            "{} qubits ({}), best energy {:.6}",
            h.n_qubits(),
            encoding_name(args.encoding),
            result_file.best_energy
        );
        println!(
            "best sampled bitstring {} (modal {})",
            result_file.best_bitstring, result_file.modal_bitstring
        );
        let gates: Vec<String> = result_file
            .decoded_gates
            .iter()
            .map(|g| g.map(|x| x.to_string()).unwrap_or_else(|| "-".into()))
            .collect();
        println!(
            "decoded gate assignment [{}] ({})",
            gates.join(", "),
            if valid { "valid" } else { "invalid" }
        );
        if let Some(gt) = &result_file.ground_truth {
            println!(
                "oracle ground energy {:.6}, gap {:.3e}",
                gt.ground_energy, gt.gap
            );
        }
        println!(
            "wrote result.json, trace.csv, histogram.json to {}",
            out.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- compare

#[derive(Serialize)]
struct CompareRow {
    encoding: &'static str,
    qubits: usize,
    hamiltonian_terms: usize,
    max_locality: usize,
    ansatz_depth: usize,
    solve_wall_ms: Option<u128>,
    best_energy: Option<f64>,
}

#[derive(Serialize)]
struct CompareFile {
    n: usize,
    k: usize,
    layers: usize,
    graph_edges: usize,
    one_hot: CompareRow,
    binary: CompareRow,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (graph, source) = match (&args.input, args.nodes) {
        (Some(path), None) => (load_graph(path, 0)?.0, path.display().to_string()),
        (None, Some(n)) => (complete_graph(n), format!("complete graph n={n}")),
        _ => {
            return Err(CliError::Input(
                "give either a graph file or --nodes".into(),
            ))
        }
    };
    if args.k < 2 {
        return Err(CliError::Input(
            "compare needs --k of at least 2 (binary encoding)".into(),
        ));
    }
    let seed = args.seed.unwrap_or_else(entropy_seed);

    let mut rows: Vec<CompareRow> = Vec::new();
    for encoding in [EncodingArg::Onehot, EncodingArg::Binary] {
        let (enc, h, _) = build_encoded_hamiltonian(&graph, args.k, encoding, None)?;
        let report = resource_report(&enc, &h);
        let circuit = build_ansatz(enc.n_qubits().max(1), args.layers)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let depth = logical_depth(&circuit);

        let (solve_wall_ms, best_energy) = if args.solve {
            let cap = statevector_cap_from_env()?;
            if enc.n_qubits() > cap {
                (None, None)
            } else {
                let mut cfg = VqeConfig::new(OptimizerKind::Cobyla, EvalMode::Exact);
                cfg.layers = args.layers;
                cfg.seed = seed;
                cfg.statevector_cap = cap;
                let solve_started = Instant::now();
                let result = vqe_solve(&h, Some(&enc), &cfg).map_err(vqe_error)?;
                (
                    Some(solve_started.elapsed().as_millis()),
                    Some(result.best_energy),
                )
            }
        } else {
            (None, None)
        };

        rows.push(CompareRow {
            encoding: encoding_name(encoding),
            qubits: report.qubits,
            hamiltonian_terms: report.terms,
            max_locality: report.max_locality,
            ansatz_depth: depth,
            solve_wall_ms,
            best_energy,
        });
    }
    let binary = rows.pop().unwrap();
    let one_hot = rows.pop().unwrap();
    let file = CompareFile {
        n: graph.n(),
        k: args.k,
        layers: args.layers,
        graph_edges: graph.edge_count(),
        one_hot,
        binary,
    };

    let out = ensure_out_dir(&args.out)?;
    write_json(&out, "comparison.json", &file)?;

    let mut argv = vec!["compare".to_string()];
    if let Some(path) = &args.input {
        argv.push(path.display().to_string());
    }
    if let Some(n) = args.nodes {
        argv.extend(["--nodes".into(), n.to_string()]);
    }
    argv.extend([
        "--k".into(),
        args.k.to_string(),
        "--layers".into(),
        args.layers.to_string(),
    ]);
    if args.solve {
        argv.push("--solve".into());
        argv.extend(["--seed".into(), seed.to_string()]);
    }
    let input_paths: Vec<&Path> = args.input.iter().map(|p| p.as_path()).collect();
    write_manifest(
        &out,
        "compare",
        argv,
        serde_json::json!({ "source": source, "k": args.k, "layers": args.layers }),
        &input_paths,
        args.solve.then_some(seed),
        started,
        &["comparison.json"],
    )?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&file).unwrap());
    } else {
        println!(
            "n={} k={} layers={} ({} edges)",
            file.n, file.k, file.layers, file.graph_edges
        );
        println!("{:<22}{:>10}{:>10}", "", "one-hot", "binary");
        println!(
            "{:<22}{:>10}{:>10}",
            "qubits", file.one_hot.qubits, file.binary.qubits
        );
        println!(
            "{:<22}{:>10}{:>10}",
            "hamiltonian terms", file.one_hot.hamiltonian_terms, file.binary.hamiltonian_terms
        );
        println!(
            "{:<22}{:>10}{:>10}",
            "ansatz depth", file.one_hot.ansatz_depth, file.binary.ansatz_depth
        );
        if let (Some(a), Some(b)) = (file.one_hot.solve_wall_ms, file.binary.solve_wall_ms) {
            println!("{:<22}{:>10}{:>10}", "solve wall (ms)", a, b);
        }
        println!("wrote comparison.json to {}", out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- oracle

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let h: IsingHamiltonian = match args.encoding {
        Some(encoding) => {
            let (graph, _) = load_graph(&args.input, 0)?;
            let k = args.k.expect("clap enforces --k with --encoding");
            let (_, h, _) = build_encoded_hamiltonian(&graph, k, encoding, args.penalty)?;
            h
        }
        None => {
            let text = read_input(&args.input)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?
        }
    };

    let gt: GroundTruth =
        brute_force_ground_state(&h, args.cap).map_err(|e| CliError::Resource(e.to_string()))?;

    let out = ensure_out_dir(&args.out)?;
    write_json(&out, "groundtruth.json", &gt)?;

    let mut argv = vec!["oracle".to_string(), args.input.display().to_string()];
    if let Some(encoding) = args.encoding {
        argv.extend([
            "--encoding".into(),
            encoding_name(encoding).into(),
            "--k".into(),
            args.k.unwrap().to_string(),
        ]);
        if let Some(p) = args.penalty {
            argv.extend(["--penalty".into(), format!("{p}")]);
        }
    }
    argv.extend(["--cap".into(), args.cap.to_string()]);
    write_manifest(
        &out,
        "oracle",
        argv,
        serde_json::json!({ "cap": args.cap }),
        &[&args.input],
        None,
        started,
        &["groundtruth.json"],
    )?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&gt).unwrap());
    } else {
        println!(
            "ground energy {:.6} attained by {} of {} states",
            gt.ground_energy, gt.n_ground_states, gt.n_enumerated
        );
        println!("wrote groundtruth.json to {}", out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- shared

fn encoding_name(e: EncodingArg) -> &'static str {
    match e {
        EncodingArg::Onehot => "onehot",
        EncodingArg::Binary => "binary",
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Load a conflict graph from `.json` (graph schema) or `.csv` (schedule);
/// for CSV the schedule's gate count is returned too.
fn load_graph(path: &Path, buffer: i64) -> Result<(ConflictGraph, Option<usize>), CliError> {
    let text = read_input(path)?;
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        let schedule = parse_schedule(&text, None)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let gates = schedule.gate_count;
        Ok((
            build_conflict_graph_buffered(&schedule, buffer),
            Some(gates),
        ))
    } else {
        let graph: ConflictGraph = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok((graph, None))
    }
}

fn complete_graph(n: usize) -> ConflictGraph {
    let mut g = ConflictGraph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.add_edge(i, j).expect("indices in range");
        }
    }
    g
}

/// Build the encoded Hamiltonian with the default penalty unless overridden:
/// 4^m for binary, one above the total edge weight for one-hot.
fn build_encoded_hamiltonian(
    graph: &ConflictGraph,
    k: usize,
    encoding: EncodingArg,
    penalty: Option<f64>,
) -> Result<(Encoding, IsingHamiltonian, f64), CliError> {
    let input_err = |e: crate::hamiltonian::HamiltonianError| CliError::Input(e.to_string());
    match encoding {
        EncodingArg::Onehot => {
            let enc = Encoding::one_hot(graph.n(), k).map_err(input_err)?;
            let p = penalty.unwrap_or(graph.edge_count() as f64 + 1.0);
            let h = onehot_coloring_hamiltonian(graph, k, p, None).map_err(input_err)?;
            Ok((enc, h, p))
        }
        EncodingArg::Binary => {
            let enc = Encoding::binary(graph.n(), k).map_err(input_err)?;
            let m = enc.bits_per_node();
            let p = penalty.unwrap_or(4.0f64.powi(m as i32));
            let h = binary_coloring_hamiltonian(graph, k, p).map_err(input_err)?;
            Ok((enc, h, p))
        }
    }
}

fn vqe_error(e: crate::vqe::VqeError) -> CliError {
    use crate::simulator::SimError;
    use crate::vqe::VqeError;
    match e {
        VqeError::Sim(SimError::CapExceeded { n_qubits, cap }) => CliError::Resource(format!(
            "{n_qubits} qubits exceed the statevector cap of {cap}"
        )),
        other => CliError::Internal(other.to_string()),
    }
}

fn statevector_cap_from_env() -> Result<usize, CliError> {
    match std::env::var(STATEVECTOR_CAP_ENV) {
        Ok(value) => value.trim().parse().map_err(|_| {
            CliError::Input(format!(
                "{STATEVECTOR_CAP_ENV} must be a qubit count, got `{value}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_STATEVECTOR_CAP),
    }
}

/// Seed source when --seed is omitted; recorded in the manifest either way.
fn entropy_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    nanos ^ (std::process::id() as u64).rotate_left(32)
}

fn ensure_out_dir(out: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out.display())))?;
    Ok(out.to_path_buf())
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialize {name}: {e}")))?;
    text.push('\n');
    write_text(out, name, &text)
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(out.join(name), text)
        .map_err(|e| CliError::Internal(format!("cannot write {name}: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    out: &Path,
    command: &str,
    argv: Vec<String>,
    config: serde_json::Value,
    inputs: &[&Path],
    seed: Option<u64>,
    started: Instant,
    outputs: &[&str],
) -> Result<(), CliError> {
    let mut hashes = BTreeMap::new();
    for path in inputs {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Input(format!("cannot hash {}: {e}", path.display())))?;
        hashes.insert(
            path.display().to_string(),
            hex::encode(Sha256::digest(&bytes)),
        );
    }
    let manifest = RunManifest {
        command: command.to_string(),
        argv,
        config,
        inputs: hashes,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_ms: started.elapsed().as_millis(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    write_json(out, "manifest.json", &manifest)
}
