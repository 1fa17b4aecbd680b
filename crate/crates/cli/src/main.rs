//! `infunc`: analyses and simulations for zero-error in-network function
//! computation. Subcommands mirror the library: one-way partitions, directed
//! trees, DAG rate regions, interactive two-node protocols, undirected-tree
//! protocols, general-graph aggregation, and the built-in verification suite.

mod report;
mod suite;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use infunc_core::dag::{
    check_rate_point, dag_outer_bound, dag_outer_bound_avg, simulate_split_aggregation,
    tree_achievable_points, BoundKind, CutBound, FoldOp,
};
use infunc_core::graph_agg::{
    graph_cut_bounds, ratio_check, star_aggregation_rates, star_schemes, symmetric_cut_rate,
    tradeoff_lp, TreeScheme,
};
use infunc_core::interactive::{
    block_rate, fooling_bound_threshold, general_separation_coding, interval_bounds,
    interval_canonical_speaker, run_general_protocol, run_interval_protocol,
    run_threshold_protocol, threshold_codebook, threshold_complexity, worst_case_total,
    IntervalSpec, Speaker, ThresholdSpec,
};
use infunc_core::json::{
    DistributionJson, FunctionJson, GraphJson, RateVectorJson, TreeListJson,
};
use infunc_core::model::{Block, Caps, JointDistribution, NetworkGraph, NodeId, Rate};
use infunc_core::partition::{
    block_partition, huffman_code, optimal_partition, optimal_partition_supported,
    InducedDistribution,
};
use infunc_core::tree_code::{run_tree_computation, tree_average_rates, TreeEncoderSet};
use infunc_core::tree_protocol::{
    centroid, run_tree_interval_protocol, run_tree_protocol, verify_edge_optimality,
};
use infunc_core::util::ceil_log2_pow;
use infunc_core::FunctionTable;

use report::{dp6, verdicts, RateJson, Report};

#[derive(Parser)]
#[command(name = "infunc", version, about = "Zero-error in-network function computation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format (csv applies to paper-suite).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized sweeps; falls back to $INFUNC_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Node cap for cut enumeration (2^(n-1) subsets).
    #[arg(long, global = true, default_value_t = 16)]
    cut_cap: usize,
    /// Tuple cap for alphabet enumeration.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    tuple_cap: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal one-way partition of one side of a two-argument function.
    Partition(PartitionArgs),
    /// Per-edge optimal rates of a directed tree.
    TreeRates(TreeRatesArgs),
    /// Simulate the directed-tree block computation.
    TreeSim(TreeSimArgs),
    /// Cut-based outer bounds on a DAG rate region.
    DagBounds(DagBoundsArgs),
    /// Achievable rate points from directed spanning trees of a DAG.
    DagTrees(DagBoundsArgs),
    /// Split-aggregation simulation for parity / max / min on a DAG.
    DagSim(DagSimArgs),
    /// Interactive two-node protocols (threshold, interval, general).
    TwoNode(TwoNodeArgs),
    /// Interactive sum-threshold / sum-interval protocol on an undirected tree.
    TreeProto(TreeProtoArgs),
    /// Cut-set lower bounds for sum-threshold on a general graph.
    GraphBounds(GraphBoundsArgs),
    /// Star aggregation rates and the 2(1 - 1/n) ratio on a complete graph.
    GraphStars(GraphStarsArgs),
    /// Tree time-sharing tradeoff LP with exact-rational certificate.
    Lp(LpArgs),
    /// Run every built-in verification check.
    PaperSuite(PaperSuiteArgs),
}

#[derive(Args, Serialize)]
struct PartitionArgs {
    #[arg(long)]
    function: PathBuf,
    /// Which argument to partition (0 or 1).
    #[arg(long)]
    side: usize,
    #[arg(long)]
    dist: Option<PathBuf>,
    /// Report the N-fold block extension too.
    #[arg(long)]
    block: Option<u64>,
}

#[derive(Args, Serialize)]
struct TreeRatesArgs {
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    dist: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TreeSimArgs {
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    block: usize,
}

#[derive(Args, Serialize)]
struct DagBoundsArgs {
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    dist: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DagSimArgs {
    #[arg(long)]
    graph: PathBuf,
    /// One of parity, max, min.
    #[arg(long)]
    builtin: String,
    /// Range for parity (defaults to the common alphabet size).
    #[arg(long = "mod")]
    modulus: Option<u32>,
    #[arg(long)]
    block: usize,
}

#[derive(Args, Serialize)]
struct TwoNodeArgs {
    /// threshold | interval | general
    #[arg(long)]
    kind: String,
    #[arg(long)]
    m1: Option<u32>,
    #[arg(long)]
    m2: Option<u32>,
    #[arg(long)]
    theta: Option<u32>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    function: Option<PathBuf>,
    /// Which node speaks first (1 or 2); intervals default to the
    /// smaller side, everything else to node 1.
    #[arg(long)]
    first: Option<u8>,
    #[arg(long)]
    block: Option<usize>,
    /// Number of random blocks to simulate.
    #[arg(long)]
    sim: Option<usize>,
}

#[derive(Args, Serialize)]
struct TreeProtoArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    theta: Option<u32>,
    /// Interval bounds as "a,b".
    #[arg(long)]
    interval: Option<String>,
    #[arg(long)]
    block: usize,
    #[arg(long, default_value_t = 1)]
    sim: usize,
    /// Root node id (defaults to a centroid).
    #[arg(long)]
    root: Option<u32>,
}

#[derive(Args, Serialize)]
struct GraphBoundsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    theta: u32,
}

#[derive(Args, Serialize)]
struct GraphStarsArgs {
    #[arg(long)]
    n: usize,
    /// Per-node capacity, either one value or a comma list.
    #[arg(long)]
    l: String,
    #[arg(long)]
    theta: u32,
}

#[derive(Args, Serialize)]
struct LpArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Target rate vector file.
    #[arg(long, conflicts_with = "rates_from_cuts")]
    rates: Option<PathBuf>,
    /// Use the exact symmetric cut rate on every edge as the target.
    #[arg(long)]
    rates_from_cuts: bool,
    #[arg(long)]
    theta: u32,
    /// Explicit spanning trees (defaults to the n stars of a complete graph).
    #[arg(long)]
    trees: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PaperSuiteArgs {
    /// Shift the threshold inside the sum-threshold check (fault injection).
    #[arg(long, hide = true, default_value_t = 0)]
    inject_theta_offset: i32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, what: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} file {}", path.display()))
}

fn load_function(path: &PathBuf) -> Result<FunctionTable> {
    let spec: FunctionJson = read_json(path, "function")?;
    Ok(spec.build()?)
}

fn load_graph(path: &PathBuf) -> Result<NetworkGraph> {
    let spec: GraphJson = read_json(path, "graph")?;
    Ok(spec.build()?)
}

fn load_dist(path: &PathBuf) -> Result<JointDistribution> {
    let spec: DistributionJson = read_json(path, "distribution")?;
    Ok(spec.build()?)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let defaults = Caps::default();
    if cli.cut_cap > defaults.cut_nodes {
        eprintln!(
            "warning: cut cap raised to {} nodes; enumeration is 2^(n-1) subsets",
            cli.cut_cap
        );
    }
    if cli.tuple_cap > defaults.tuples {
        eprintln!(
            "warning: tuple cap raised to {}; alphabet enumerations may be slow",
            cli.tuple_cap
        );
    }
    let caps = Caps {
        cut_nodes: cli.cut_cap,
        tuples: cli.tuple_cap,
        ..Caps::default()
    };
    let seed = cli
        .seed
        .or_else(|| std::env::var("INFUNC_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    let report = match &cli.command {
        Cmd::Partition(args) => cmd_partition(args)?,
        Cmd::TreeRates(args) => cmd_tree_rates(args, &caps)?,
        Cmd::TreeSim(args) => cmd_tree_sim(args, &caps, seed)?,
        Cmd::DagBounds(args) => cmd_dag_bounds(args, &caps)?,
        Cmd::DagTrees(args) => cmd_dag_trees(args, &caps)?,
        Cmd::DagSim(args) => cmd_dag_sim(args, &caps, seed)?,
        Cmd::TwoNode(args) => cmd_two_node(args, seed)?,
        Cmd::TreeProto(args) => cmd_tree_proto(args, seed)?,
        Cmd::GraphBounds(args) => cmd_graph_bounds(args, &caps)?,
        Cmd::GraphStars(args) => cmd_graph_stars(args, &caps)?,
        Cmd::Lp(args) => cmd_lp(args, &caps)?,
        Cmd::PaperSuite(args) => cmd_paper_suite(args)?,
    };
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => {
            if let Cmd::PaperSuite(_) = cli.command {
                paper_suite_csv(&report)
            } else {
                bail!("csv output is only available for paper-suite");
            }
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, &text)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => print!("{text}"),
    }
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let name = report.first_failure().unwrap_or("unknown");
        eprintln!("verdict failed: {name}");
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_partition(args: &PartitionArgs) -> Result<Report> {
    let f = load_function(&args.function)?;
    let part = optimal_partition(&f, args.side)?;
    let mut verdict_list = vec![("partition_computed", true)];
    let mut results = json!({
        "side": args.side,
        "classes": part.classes(),
        "k": part.class_count(),
        "worst_case_bits": part.single_shot_bits(),
        "rate": RateJson::log2(part.class_count()),
    });
    if let Some(path) = &args.dist {
        let p = load_dist(path)?;
        let rel = optimal_partition_supported(&f, args.side, &p)?;
        results["supported_relation"] = json!({
            "transitive": rel.transitive,
            "strictly_positive": rel.partition.is_some(),
        });
        if rel.partition.is_some() {
            let q = InducedDistribution::new(&part, args.side, &p)?;
            let code = huffman_code(&q)?;
            let expected = code.expected_length(&q.probs);
            results["entropy"] = json!(dp6(q.entropy_bits()));
            results["expected_length"] = json!({
                "exact": expected.to_string(),
                "bits": dp6(expected.to_f64().unwrap()),
            });
            let kraft_ok = code.kraft_sum() <= num_rational::BigRational::from_integer(1.into());
            verdict_list.push(("huffman_kraft_exact", kraft_ok));
            verdict_list.push(("huffman_prefix_free", code.is_prefix_free()));
            let h = q.entropy_bits();
            let e = expected.to_f64().unwrap();
            verdict_list.push(("entropy_sandwich", h - 1e-9 <= e && e <= h + 1.0 + 1e-9));
        }
    }
    if let Some(n) = args.block {
        let rep = block_partition(&f, args.side, n)?;
        results["block"] = json!({
            "n": n,
            "block_classes": rep.block_classes.to_string(),
            "total_bits": rep.total_bits,
            "rate": RateJson::from(&Rate::frac(rep.total_bits, n)),
        });
    }
    Ok(Report::new(
        "partition",
        serde_json::to_value(args)?,
        results,
        verdicts(&verdict_list),
    ))
}

fn cmd_tree_rates(args: &TreeRatesArgs, caps: &Caps) -> Result<Report> {
    let f = load_function(&args.function)?;
    let g = load_graph(&args.graph)?;
    let mut per_edge = Vec::new();
    for v in g.nodes() {
        if v == g.collector() {
            continue;
        }
        let alpha = infunc_core::tree_code::edge_alphabet(&f, &g, v, caps)?;
        per_edge.push(json!({
            "edge": (v.0, g.parent(v).map(|p| p.0).unwrap_or(0)),
            "alphabet_size": alpha.len(),
            "single_shot_bits": alpha.single_shot_bits(),
            "wc_rate": RateJson::log2(alpha.len() as u64),
        }));
    }
    let mut results = json!({ "edges": per_edge });
    if let Some(path) = &args.dist {
        let p = load_dist(path)?;
        let rates = tree_average_rates(&f, &g, &p, caps)?;
        results["average"] = json!(rates
            .iter()
            .map(|r| json!({
                "edge": (r.node.0, r.parent.0),
                "avg_rate": dp6(r.entropy_bits),
                "huffman_expected_len": {
                    "exact": r.huffman_expected_len.to_string(),
                    "bits": dp6(r.huffman_expected_len.to_f64().unwrap()),
                },
            }))
            .collect::<Vec<_>>());
    }
    Ok(Report::new(
        "tree-rates",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("rates_computed", true)]),
    ))
}

fn cmd_tree_sim(args: &TreeSimArgs, caps: &Caps, seed: u64) -> Result<Report> {
    let f = load_function(&args.function)?;
    let g = load_graph(&args.graph)?;
    let enc = TreeEncoderSet::optimal(&f, &g, caps)?;
    let block = Block::random(g.alphabet_sizes(), args.block, seed);
    let run = run_tree_computation(&f, &g, &enc, &block)?;
    let zero_error = run.decoded == block.eval_function(&f);
    let mut within = true;
    let mut edges = Vec::new();
    for v in g.nodes() {
        if v == g.collector() {
            continue;
        }
        let parent = g.parent(v).unwrap();
        let bits = run.transcript.bits_from_to(v, parent);
        let bound = ceil_log2_pow(enc.out_size(v), args.block as u64);
        within &= bits <= bound;
        edges.push(json!({
            "edge": (v.0, parent.0),
            "bits": bits,
            "bound": bound,
        }));
    }
    let results = json!({
        "seed": seed,
        "block": args.block,
        "total_bits": run.transcript.total_bits(),
        "edges": edges,
        "zero_error": zero_error,
    });
    Ok(Report::new(
        "tree-sim",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("zero_error", zero_error), ("within_bounds", within)]),
    ))
}

fn bound_json(b: &CutBound) -> Value {
    json!({
        "cut": b.cut.inside.iter().map(|v| v.0).collect::<Vec<_>>(),
        "crossing": b.cut.crossing.iter().map(|e| (e.0.0, e.1.0)).collect::<Vec<_>>(),
        "kind": match b.kind { BoundKind::WorstCase => "worst-case", BoundKind::AverageCase => "average-case" },
        "class_count": b.class_count,
        "bound": match &b.exact {
            Some(rate) => serde_json::to_value(RateJson::from(rate)).unwrap(),
            None => serde_json::to_value(RateJson::from_bits(b.bound_bits)).unwrap(),
        },
    })
}

fn cmd_dag_bounds(args: &DagBoundsArgs, caps: &Caps) -> Result<Report> {
    let f = load_function(&args.function)?;
    let g = load_graph(&args.graph)?;
    let bounds = dag_outer_bound(&f, &g, caps)?;
    let mut results = json!({
        "worst_case": bounds.iter().map(bound_json).collect::<Vec<_>>(),
    });
    if let Some(path) = &args.dist {
        let p = load_dist(path)?;
        let avg = dag_outer_bound_avg(&f, &g, &p, caps)?;
        results["average_case"] = json!(avg.iter().map(bound_json).collect::<Vec<_>>());
    }
    Ok(Report::new(
        "dag-bounds",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("bounds_computed", true)]),
    ))
}

fn cmd_dag_trees(args: &DagBoundsArgs, caps: &Caps) -> Result<Report> {
    let f = load_function(&args.function)?;
    let g = load_graph(&args.graph)?;
    let bounds = dag_outer_bound(&f, &g, caps)?;
    let p = args.dist.as_ref().map(load_dist).transpose()?;
    let points = tree_achievable_points(&f, &g, p.as_ref(), caps)?;
    let mut consistent = true;
    let mut out = Vec::new();
    for pt in &points {
        // average-case points are checked against the worst-case bounds only
        // when no distribution is supplied
        if p.is_none() {
            consistent &= check_rate_point(&bounds, &pt.rates)?.satisfies_all;
        }
        out.push(json!({
            "tree": pt.tree_edges.iter().map(|e| (e.0.0, e.1.0)).collect::<Vec<_>>(),
            "rates": pt
                .rates
                .entries()
                .map(|(e, r)| json!({"edge": (e.0.0, e.1.0), "bits": dp6(r)}))
                .collect::<Vec<_>>(),
        }));
    }
    Ok(Report::new(
        "dag-trees",
        serde_json::to_value(args)?,
        json!({ "points": out }),
        verdicts(&[("points_satisfy_bounds", consistent)]),
    ))
}

fn cmd_dag_sim(args: &DagSimArgs, caps: &Caps, seed: u64) -> Result<Report> {
    let g = load_graph(&args.graph)?;
    let range = args
        .modulus
        .unwrap_or_else(|| g.alphabet_sizes().first().copied().unwrap_or(2));
    let op = FoldOp::parse(&args.builtin, range)?;
    let block = Block::random(g.alphabet_sizes(), args.block, seed);
    let run = simulate_split_aggregation(op, &g, &block, None, caps)?;
    let f = op.function_table(g.node_count())?;
    let zero_error = run.decoded == block.eval_function(&f);
    let mut bounds_met = true;
    let mut binding_met = true;
    let cuts: Vec<Value> = run
        .cut_usage
        .iter()
        .map(|u| {
            bounds_met &= u.measured_bits_per_instance >= u.bound_bits - 1e-9;
            let slack = u.cut.crossing.len() as f64 / args.block as f64;
            let equality = u.measured_bits_per_instance <= u.bound_bits + slack + 1e-9;
            if u.crosses_once {
                binding_met &= equality;
            }
            json!({
                "cut": u.cut.inside.iter().map(|v| v.0).collect::<Vec<_>>(),
                "bound": dp6(u.bound_bits),
                "measured": dp6(u.measured_bits_per_instance),
                "crosses_once": u.crosses_once,
            })
        })
        .collect();
    let results = json!({
        "seed": seed,
        "builtin": args.builtin,
        "range": range,
        "rates": run
            .rates
            .entries()
            .map(|(e, r)| json!({"edge": (e.0.0, e.1.0), "bits": dp6(r)}))
            .collect::<Vec<_>>(),
        "cuts": cuts,
        "zero_error": zero_error,
    });
    Ok(Report::new(
        "dag-sim",
        serde_json::to_value(args)?,
        results,
        verdicts(&[
            ("zero_error", zero_error),
            ("cut_bounds_respected", bounds_met),
            ("binding_cuts_met_with_equality", binding_met),
        ]),
    ))
}

fn cmd_two_node(args: &TwoNodeArgs, seed: u64) -> Result<Report> {
    match args.kind.as_str() {
        "threshold" => two_node_threshold(args, seed),
        "interval" => two_node_interval(args, seed),
        "general" => two_node_general(args, seed),
        other => bail!("unknown kind {other:?}: expected threshold, interval, or general"),
    }
}

fn need<T: Copy>(v: Option<T>, name: &str, kind: &str) -> Result<T> {
    v.with_context(|| format!("--{name} is required for --kind {kind}"))
}

fn speaker_of(first: Option<u8>, default: Speaker) -> Result<Speaker> {
    match first {
        None => Ok(default),
        Some(1) => Ok(Speaker::Node1),
        Some(2) => Ok(Speaker::Node2),
        Some(other) => bail!("--first must be 1 or 2, got {other}"),
    }
}

fn two_node_threshold(args: &TwoNodeArgs, seed: u64) -> Result<Report> {
    let m1 = need(args.m1, "m1", "threshold")?;
    let m2 = need(args.m2, "m2", "threshold")?;
    let theta = need(args.theta, "theta", "threshold")?;
    let spec = ThresholdSpec::new(m1, m2, theta)?;
    let speaker = speaker_of(args.first, Speaker::Node1)?;
    let rate = threshold_complexity(&spec);
    let fooling = fooling_bound_threshold(&spec);
    let coding = infunc_core::interactive::threshold_coding_size(&spec);
    let mut verdict_list = vec![
        ("fooling_verified", fooling.verified),
        ("fooling_matches_formula", fooling.size() == coding),
    ];
    let mut results = json!({
        "kind": "threshold",
        "m1": m1, "m2": m2, "theta": theta,
        "coding_size": coding,
        "rate": RateJson::from(&rate),
        "fooling_size": fooling.size(),
    });
    if let Some(n) = args.block {
        let (_, code) = threshold_codebook(&spec, n, speaker);
        let total = code.total_bits();
        results["L"] = json!(total);
        results["block_rate"] = json!(RateJson::from(&block_rate(coding, n as u64)));
        let (kraft, kraft_ok) = code.kraft_exact();
        results["kraft"] = json!({"sum": kraft.to_string(), "feasible": kraft_ok});
        verdict_list.push(("kraft_exact", kraft_ok));
        if let Some(trials) = args.sim {
            let mut max_bits = 0u64;
            let mut zero_error = true;
            for trial in 0..trials {
                let block = Block::random(&[m1 + 1, m2 + 1], n, seed.wrapping_add(trial as u64));
                let out = run_threshold_protocol(
                    &spec,
                    block.seq(NodeId(1)),
                    block.seq(NodeId(2)),
                    speaker,
                )?;
                max_bits = max_bits.max(out.total_bits);
                zero_error &= (0..n).all(|t| {
                    out.decoded_node1[t]
                        == u8::from(block.seq(NodeId(1))[t] + block.seq(NodeId(2))[t] >= theta)
                        && out.decoded_node1[t] == out.decoded_node2[t]
                });
            }
            results["sim_max_bits"] = json!(max_bits);
            results["zero_error"] = json!(zero_error);
            verdict_list.push(("zero_error", zero_error));
            verdict_list.push(("totals_within_bound", max_bits <= total));
        }
    }
    Ok(Report::new(
        "two-node",
        serde_json::to_value(args)?,
        results,
        verdicts(&verdict_list),
    ))
}

fn two_node_interval(args: &TwoNodeArgs, seed: u64) -> Result<Report> {
    let m1 = need(args.m1, "m1", "interval")?;
    let m2 = need(args.m2, "m2", "interval")?;
    let a = need(args.a, "a", "interval")?;
    let b = need(args.b, "b", "interval")?;
    let spec = IntervalSpec::new(m1, m2, a, b)?;
    let speaker = speaker_of(args.first, interval_canonical_speaker(&spec))?;
    let bounds = interval_bounds(&spec);
    let gap = bounds.upper_bits - bounds.lower_bits;
    let mut verdict_list = vec![
        ("fooling_verified", bounds.fooling.verified),
        ("gap_at_most_one_bit", gap <= 1.0 + 1e-9),
    ];
    let mut results = json!({
        "kind": "interval",
        "m1": m1, "m2": m2, "a": a, "b": b,
        "lower_bits": dp6(bounds.lower_bits),
        "upper_bits": dp6(bounds.upper_bits),
        "fooling_size": bounds.fooling.size(),
        "upper_coding_size": bounds.upper_coding_size,
    });
    if let (Some(n), Some(trials)) = (args.block, args.sim) {
        let mut max_bits = 0u64;
        let mut zero_error = true;
        for trial in 0..trials {
            let block = Block::random(&[m1 + 1, m2 + 1], n, seed.wrapping_add(trial as u64));
            let out = run_interval_protocol(
                &spec,
                block.seq(NodeId(1)),
                block.seq(NodeId(2)),
                speaker,
            )?;
            max_bits = max_bits.max(out.total_bits);
            zero_error &= (0..n).all(|t| {
                let s = block.seq(NodeId(1))[t] + block.seq(NodeId(2))[t];
                out.decoded_node1[t] == u8::from(a <= s && s <= b)
                    && out.decoded_node1[t] == out.decoded_node2[t]
            });
        }
        results["sim_max_bits"] = json!(max_bits);
        results["zero_error"] = json!(zero_error);
        verdict_list.push(("zero_error", zero_error));
        verdict_list.push((
            "totals_within_bound",
            max_bits <= worst_case_total(bounds.upper_coding_size, args.block.unwrap() as u64),
        ));
    }
    Ok(Report::new(
        "two-node",
        serde_json::to_value(args)?,
        results,
        verdicts(&verdict_list),
    ))
}

fn two_node_general(args: &TwoNodeArgs, seed: u64) -> Result<Report> {
    let path = args
        .function
        .as_ref()
        .context("--function is required for --kind general")?;
    let f = load_function(path)?;
    let scheme = general_separation_coding(&f)?;
    let mut verdict_list = vec![(
        "determined_classes_at_most_one_each",
        scheme.always_zero <= 1 && scheme.always_one <= 1,
    )];
    let mut results = json!({
        "kind": "general",
        "reduced_alphabet_size": scheme.reduced_alphabet_size,
        "always_zero": scheme.always_zero,
        "always_one": scheme.always_one,
        "rate": RateJson::from(&scheme.rate),
    });
    if let (Some(n), Some(trials)) = (args.block, args.sim) {
        let sizes = [f.alphabet(0).size(), f.alphabet(1).size()];
        let mut max_bits = 0u64;
        let mut zero_error = true;
        for trial in 0..trials {
            let block = Block::random(&sizes, n, seed.wrapping_add(trial as u64));
            let out = run_general_protocol(&scheme, block.seq(NodeId(1)), block.seq(NodeId(2)))?;
            max_bits = max_bits.max(out.total_bits);
            zero_error &= (0..n).all(|t| {
                let expect = f.eval(&[block.seq(NodeId(1))[t], block.seq(NodeId(2))[t]]) as u8;
                out.decoded_node1[t] == expect && out.decoded_node2[t] == expect
            });
        }
        results["sim_max_bits"] = json!(max_bits);
        results["zero_error"] = json!(zero_error);
        verdict_list.push(("zero_error", zero_error));
    }
    Ok(Report::new(
        "two-node",
        serde_json::to_value(args)?,
        results,
        verdicts(&verdict_list),
    ))
}

fn cmd_tree_proto(args: &TreeProtoArgs, seed: u64) -> Result<Report> {
    let g = load_graph(&args.graph)?;
    let root = match args.root {
        Some(r) => NodeId(r),
        None => centroid(&g)?,
    };
    let interval = args
        .interval
        .as_ref()
        .map(|s| -> Result<(u32, u32)> {
            let (a, b) = s
                .split_once(',')
                .context("--interval must be \"a,b\"")?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .transpose()?;
    if interval.is_some() == args.theta.is_some() {
        bail!("give exactly one of --theta or --interval");
    }
    let n = args.block;
    let mut zero_error = true;
    let mut within = true;
    let mut per_edge: BTreeMap<(u32, u32), (u64, u64, u64)> = BTreeMap::new(); // max bits, bound, coding
    for trial in 0..args.sim.max(1) {
        let block = Block::random(g.alphabet_sizes(), n, seed.wrapping_add(trial as u64));
        let (run, upper) = match (args.theta, interval) {
            (Some(theta), None) => {
                let run = run_tree_protocol(&g, theta, root, &block)?;
                (run, None)
            }
            (None, Some((a, b))) => {
                let out = run_tree_interval_protocol(&g, a, b, root, &block)?;
                (out.run, Some(out.upper_bound_bits))
            }
            _ => unreachable!(),
        };
        // decoded blocks agree everywhere with the truth
        let truth: Vec<u8> = (0..n)
            .map(|t| {
                let s: u32 = block.instance(t).iter().sum();
                match (args.theta, interval) {
                    (Some(theta), None) => u8::from(s >= theta),
                    (None, Some((a, b))) => u8::from(a <= s && s <= b),
                    _ => unreachable!(),
                }
            })
            .collect();
        for v in g.nodes() {
            zero_error &= run.decoded[v.index()] == truth;
        }
        for (i, e) in run.edges.iter().enumerate() {
            let total = e.up_bits + e.down_bits;
            let bound = match &upper {
                Some(u) => u[i],
                None => e.bound_bits,
            };
            within &= total <= bound;
            let key = (e.child.0.min(e.parent.0), e.child.0.max(e.parent.0));
            let entry = per_edge.entry(key).or_insert((0, bound, e.coding_size));
            entry.0 = entry.0.max(total);
        }
    }
    let mut verdict_list = vec![("zero_error", zero_error), ("within_bounds", within)];
    if let Some(theta) = args.theta {
        let optimality = verify_edge_optimality(&g, theta)?;
        verdict_list.push((
            "edge_rates_match_fooling_bounds",
            optimality.iter().all(|r| r.matched),
        ));
    }
    let results = json!({
        "seed": seed,
        "root": root.0,
        "edges": per_edge
            .iter()
            .map(|(e, (bits, bound, coding))| json!({
                "edge": e,
                "measured_max_bits": bits,
                "bound_ceiling": bound,
                "complexity": RateJson::log2(*coding),
            }))
            .collect::<Vec<_>>(),
        "zero_error": zero_error,
    });
    Ok(Report::new(
        "tree-proto",
        serde_json::to_value(args)?,
        results,
        verdicts(&verdict_list),
    ))
}

fn cmd_graph_bounds(args: &GraphBoundsArgs, caps: &Caps) -> Result<Report> {
    let g = load_graph(&args.graph)?;
    let bounds = graph_cut_bounds(&g, args.theta, caps)?;
    let results = json!({
        "cuts": bounds
            .iter()
            .map(|b| json!({
                "cut": b.cut.inside.iter().map(|v| v.0).collect::<Vec<_>>(),
                "crossing_edges": b.cut.crossing.len(),
                "m_f": b.min_side_capacity,
                "bound": RateJson::log2(b.coding_size),
            }))
            .collect::<Vec<_>>(),
        "symmetric_cut_rate": dp6(symmetric_cut_rate(&bounds)),
    });
    Ok(Report::new(
        "graph-bounds",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("bounds_computed", true)]),
    ))
}

fn cmd_graph_stars(args: &GraphStarsArgs, caps: &Caps) -> Result<Report> {
    let ls: Vec<u32> = if args.l.contains(',') {
        args.l
            .split(',')
            .map(|s| s.trim().parse().context("bad capacity list"))
            .collect::<Result<_>>()?
    } else {
        vec![args.l.trim().parse().context("bad capacity")?; args.n]
    };
    if ls.len() != args.n {
        bail!("expected {} capacities, got {}", args.n, ls.len());
    }
    let g = NetworkGraph::complete_with_capacities(&ls)?;
    let stars = star_aggregation_rates(&g, args.theta)?;
    let report = ratio_check(&g, args.theta, caps)?;
    let limit = 2.0 * (1.0 - 1.0 / args.n as f64);
    let results = json!({
        "n": args.n,
        "l": ls,
        "theta": args.theta,
        "per_edge": stars
            .per_edge
            .entries()
            .map(|(e, r)| json!({"edge": (e.0.0, e.1.0), "bits": dp6(r)}))
            .collect::<Vec<_>>(),
        "r_ach": dp6(report.r_ach),
        "r_cut": dp6(report.r_cut),
        "ratio": dp6(report.ratio),
        "ratio_limit": dp6(limit),
        "exact_ratio": report.exact_ratio.map(|(a, b)| format!("{a}/{b}")),
    });
    Ok(Report::new(
        "graph-stars",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("within_2opt", report.ratio <= limit + 1e-9)]),
    ))
}

fn cmd_lp(args: &LpArgs, caps: &Caps) -> Result<Report> {
    let g = load_graph(&args.graph)?;
    let schemes: Vec<TreeScheme> = match &args.trees {
        Some(path) => {
            let list: TreeListJson = read_json(path, "trees")?;
            list.trees
                .iter()
                .enumerate()
                .map(|(i, edges)| TreeScheme::from_tree(&g, edges, args.theta, format!("tree-{i}")))
                .collect::<infunc_core::Result<_>>()?
        }
        None => star_schemes(&g, args.theta)?,
    };
    let sol = if args.rates_from_cuts {
        let bounds = graph_cut_bounds(&g, args.theta, caps)?;
        let r_cut = infunc_core::graph_agg::symmetric_cut_rate_exact(&bounds);
        let r: infunc_core::graph_agg::ExactRates =
            g.edges().iter().map(|&e| (e, r_cut.clone())).collect();
        infunc_core::graph_agg::tradeoff_lp_exact(&g, &schemes, &r)?
    } else {
        let path = args
            .rates
            .as_ref()
            .context("give --rates <file> or --rates-from-cuts")?;
        let rates: RateVectorJson = read_json(path, "rates")?;
        tradeoff_lp(&g, &schemes, &rates.build()?)?
    };
    let results = json!({
        "theta": args.theta,
        "schemes": schemes.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
        "t_star": {"exact": sol.t_star.to_string(), "bits": dp6(sol.t_star_f64)},
        "lambda_star": sol
            .lambda
            .iter()
            .zip(&sol.lambda_f64)
            .map(|(l, f)| json!({"exact": l.to_string(), "value": dp6(*f)}))
            .collect::<Vec<_>>(),
        "lambda_l1": sol.lambda_l1.to_string(),
    });
    Ok(Report::new(
        "lp",
        serde_json::to_value(args)?,
        results,
        verdicts(&[("certificate_exact", sol.certificate_ok)]),
    ))
}

fn cmd_paper_suite(args: &PaperSuiteArgs) -> Result<Report> {
    let checks = suite::run_suite(args.inject_theta_offset);
    let verdict_map: BTreeMap<String, bool> =
        checks.iter().map(|c| (c.name.clone(), c.passed)).collect();
    let results = json!({
        "checks": checks,
        "passed": checks.iter().filter(|c| c.passed).count(),
        "total": checks.len(),
    });
    Ok(Report::new(
        "paper-suite",
        serde_json::to_value(args)?,
        results,
        verdict_map,
    ))
}

fn paper_suite_csv(report: &Report) -> String {
    let mut out = String::from("name,passed,details\n");
    if let Some(checks) = report.results.get("checks").and_then(Value::as_array) {
        for c in checks {
            let name = c.get("name").and_then(Value::as_str).unwrap_or("");
            let passed = c.get("passed").and_then(Value::as_bool).unwrap_or(false);
            let details = c.get("details").and_then(Value::as_str).unwrap_or("");
            out.push_str(&format!("{name},{passed},\"{details}\"\n"));
        }
    }
    out
}
