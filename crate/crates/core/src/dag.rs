//! Rate-region machinery for directed acyclic graphs: cut-based outer
//! bounds, achievable extreme points from directed spanning in-trees, and a
//! block-splitting scheme that attains the bounds for parity, max, and min.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::Zero;

use crate::codebook::pack_base_k;
use crate::error::{Error, Result};
use crate::model::{
    enumerate_cuts_capped, Caps, Cut, FunctionTable, GraphKind, JointDistribution, NetworkGraph,
    NodeId, Rate, RateVector,
};
use crate::simplex::{hull_contains, rational_from_f64};
use crate::transcript::ProtocolTranscript;
use crate::tree_code::edge_alphabet;
use crate::util::{entropy_bits, tuple_index, tuples};

/// Which flavor of outer bound a constraint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    WorstCase,
    AverageCase,
}

/// One cut constraint: the rates on the crossing edges must sum to at least
/// `bound_bits`.
#[derive(Clone, Debug)]
pub struct CutBound {
    pub cut: Cut,
    pub kind: BoundKind,
    /// Number of distinguishable classes of the cut side (>= 1).
    pub class_count: u64,
    pub bound_bits: f64,
    pub exact: Option<Rate>,
}

fn check_dag(f: &FunctionTable, g: &NetworkGraph) -> Result<()> {
    if !matches!(g.kind(), GraphKind::Dag | GraphKind::DirectedTree) {
        return Err(Error::WrongGraphKind {
            expected: "dag",
            got: g.kind().name(),
        });
    }
    if f.arity() != g.node_count() || f.alphabet_sizes() != g.alphabet_sizes() {
        return Err(Error::InvalidFunction(
            "function does not match the graph's node alphabets".into(),
        ));
    }
    Ok(())
}

fn node_sizes(g: &NetworkGraph, nodes: &[NodeId]) -> Vec<u32> {
    nodes.iter().map(|&v| g.alphabet_size(v)).collect()
}

/// Classes of assignments over `s_nodes` under agreement of `f` against every
/// assignment of the remaining nodes. Returns the class id per assignment
/// (row-major over `s_nodes`) and the class count.
fn cut_side_classes(
    f: &FunctionTable,
    g: &NetworkGraph,
    s_nodes: &[NodeId],
    caps: &Caps,
) -> Result<(Vec<u32>, u64)> {
    let c_nodes: Vec<NodeId> = g.nodes().filter(|v| !s_nodes.contains(v)).collect();
    let s_sizes = node_sizes(g, s_nodes);
    let c_sizes = node_sizes(g, &c_nodes);
    caps.check_tuples(&s_sizes)?;
    caps.check_tuples(&c_sizes)?;
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut class_of = Vec::new();
    let mut full = vec![0u32; g.node_count()];
    for sa in tuples(&s_sizes) {
        for (v, &x) in s_nodes.iter().zip(&sa) {
            full[v.index()] = x;
        }
        let mut profile = Vec::new();
        for ca in tuples(&c_sizes) {
            for (v, &x) in c_nodes.iter().zip(&ca) {
                full[v.index()] = x;
            }
            profile.push(f.eval(&full));
        }
        let next = ids.len() as u32;
        let id = *ids.entry(profile).or_insert(next);
        class_of.push(id);
    }
    Ok((class_of, ids.len() as u64))
}

/// Worst-case outer bound: one constraint per cut, `sum of crossing rates >=
/// log2(class count)`.
pub fn dag_outer_bound(f: &FunctionTable, g: &NetworkGraph, caps: &Caps) -> Result<Vec<CutBound>> {
    check_dag(f, g)?;
    let mut bounds = Vec::new();
    for cut in enumerate_cuts_capped(g, g.collector(), caps.cut_nodes)? {
        let (_, count) = cut_side_classes(f, g, &cut.inside, caps)?;
        bounds.push(CutBound {
            cut,
            kind: BoundKind::WorstCase,
            class_count: count,
            bound_bits: (count as f64).log2(),
            exact: Some(Rate::log2_int(count)),
        });
    }
    Ok(bounds)
}

/// Average-case outer bound under a strictly positive distribution: per cut,
/// the conditional entropy of the cut side's class given the values of the
/// complement nodes that have a directed path into the cut side.
pub fn dag_outer_bound_avg(
    f: &FunctionTable,
    g: &NetworkGraph,
    p: &JointDistribution,
    caps: &Caps,
) -> Result<Vec<CutBound>> {
    check_dag(f, g)?;
    if !p.matches(f) {
        return Err(Error::InvalidDistribution(
            "distribution shape does not match the function".into(),
        ));
    }
    if !p.is_strictly_positive() {
        return Err(Error::ZeroProbability);
    }
    let sizes = g.alphabet_sizes().to_vec();
    caps.check_tuples(&sizes)?;
    let mut bounds = Vec::new();
    for cut in enumerate_cuts_capped(g, g.collector(), caps.cut_nodes)? {
        let s_nodes = cut.inside.clone();
        let (class_of, count) = cut_side_classes(f, g, &s_nodes, caps)?;
        let s_sizes = node_sizes(g, &s_nodes);
        // nodes outside S with a directed path into S
        let r_nodes: Vec<NodeId> = g
            .nodes()
            .filter(|v| !cut.contains(*v))
            .filter(|&v| {
                let mut stack = vec![v];
                let mut seen = vec![false; g.node_count()];
                seen[v.index()] = true;
                while let Some(u) = stack.pop() {
                    for (_, w) in g.out_edges(u) {
                        if cut.contains(w) {
                            return true;
                        }
                        if !seen[w.index()] {
                            seen[w.index()] = true;
                            stack.push(w);
                        }
                    }
                }
                false
            })
            .collect();
        // joint distribution of (class, x_R), exactly
        let mut joint: BTreeMap<(u32, Vec<u32>), BigRational> = BTreeMap::new();
        let mut r_marginal: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for full in tuples(&sizes) {
            let s_tuple: Vec<u32> = s_nodes.iter().map(|v| full[v.index()]).collect();
            let r_tuple: Vec<u32> = r_nodes.iter().map(|v| full[v.index()]).collect();
            let class = class_of[tuple_index(&s_sizes, &s_tuple)];
            let pr = p.prob(&full).clone();
            *joint
                .entry((class, r_tuple.clone()))
                .or_insert_with(BigRational::zero) += pr.clone();
            *r_marginal.entry(r_tuple).or_insert_with(BigRational::zero) += pr;
        }
        let h_joint = entropy_bits(&joint.values().cloned().collect::<Vec<_>>());
        let h_r = entropy_bits(&r_marginal.values().cloned().collect::<Vec<_>>());
        bounds.push(CutBound {
            cut,
            kind: BoundKind::AverageCase,
            class_count: count,
            bound_bits: h_joint - h_r,
            exact: None,
        });
    }
    Ok(bounds)
}

/// Verdict of checking a rate vector against a set of cut bounds.
#[derive(Clone, Debug)]
pub struct RateVerdict {
    pub satisfies_all: bool,
    /// Indices into the bound list whose constraints are violated.
    pub violated: Vec<usize>,
}

/// Compares `sum of crossing rates` against each bound with a 1e-9 slack.
pub fn check_rate_point(bounds: &[CutBound], r: &RateVector) -> Result<RateVerdict> {
    let mut violated = Vec::new();
    for (i, b) in bounds.iter().enumerate() {
        let total = r.total_over(&b.cut.crossing)?;
        if total + crate::RATE_TOLERANCE < b.bound_bits {
            violated.push(i);
        }
    }
    Ok(RateVerdict {
        satisfies_all: violated.is_empty(),
        violated,
    })
}

/// One achievable extreme-point candidate: a directed spanning in-tree and
/// its per-edge rates (asymptotic worst case, or entropies when `p` given).
#[derive(Clone, Debug)]
pub struct TreePoint {
    pub tree_edges: Vec<(NodeId, NodeId)>,
    pub rates: RateVector,
}

/// Enumerates every directed spanning tree toward the collector (one chosen
/// out-edge per non-collector node) and computes its optimal per-edge rates.
/// Unused DAG edges get rate zero.
pub fn tree_achievable_points(
    f: &FunctionTable,
    g: &NetworkGraph,
    p: Option<&JointDistribution>,
    caps: &Caps,
) -> Result<Vec<TreePoint>> {
    check_dag(f, g)?;
    let collector = g.collector();
    let non_collector: Vec<NodeId> = g.nodes().filter(|&v| v != collector).collect();
    let choices: Vec<Vec<(NodeId, NodeId)>> = non_collector
        .iter()
        .map(|&v| g.out_edges(v).collect())
        .collect();
    let count: u128 = choices.iter().map(|c| c.len() as u128).product();
    if count > caps.trees as u128 {
        return Err(Error::TreeCapExceeded {
            count,
            cap: caps.trees,
        });
    }
    let mut points = Vec::new();
    let radix: Vec<u32> = choices.iter().map(|c| c.len() as u32).collect();
    for pick in tuples(&radix) {
        let tree_edges: Vec<(NodeId, NodeId)> = pick
            .iter()
            .enumerate()
            .map(|(i, &j)| choices[i][j as usize])
            .collect();
        let edge_pairs: Vec<(u32, u32)> =
            tree_edges.iter().map(|&(a, b)| (a.0, b.0)).collect();
        let tree = NetworkGraph::new(
            GraphKind::DirectedTree,
            g.node_count(),
            &edge_pairs,
            g.alphabet_sizes(),
            Some(collector.0),
        )?;
        let mut rates = RateVector::new();
        for &e in g.edges() {
            rates.set(e, 0.0)?;
        }
        if let Some(p) = p {
            for r in crate::tree_code::tree_average_rates(f, &tree, p, caps)? {
                rates.set((r.node, r.parent), r.entropy_bits)?;
            }
        } else {
            for &v in &non_collector {
                let alpha = edge_alphabet(f, &tree, v, caps)?;
                let parent = tree.parent(v).expect("tree edge");
                rates.set((v, parent), alpha.rate_bits())?;
            }
        }
        points.push(TreePoint { tree_edges, rates });
    }
    Ok(points)
}

/// Is `target` in the convex hull of the tree points? Exact LP membership on
/// rationalized coordinates, ordered by the DAG edge list.
pub fn in_tree_point_hull(
    g: &NetworkGraph,
    points: &[TreePoint],
    target: &RateVector,
) -> Result<bool> {
    let edges = g.edges();
    let point_vecs: Vec<Vec<BigRational>> = points
        .iter()
        .map(|p| {
            edges
                .iter()
                .map(|&e| rational_from_f64(p.rates.rate_or_zero(e)))
                .collect()
        })
        .collect();
    let target_vec: Vec<BigRational> = edges
        .iter()
        .map(|&e| rational_from_f64(target.rate_or_zero(e)))
        .collect();
    hull_contains(&point_vecs, &target_vec)
}

/// Elementwise aggregation operator with a fixed finite range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldOp {
    ParityMod(u32),
    Max(u32),
    Min(u32),
}

impl FoldOp {
    pub fn range(&self) -> u32 {
        match *self {
            FoldOp::ParityMod(d) | FoldOp::Max(d) | FoldOp::Min(d) => d,
        }
    }

    pub fn identity(&self) -> u32 {
        match *self {
            FoldOp::ParityMod(_) => 0,
            FoldOp::Max(_) => 0,
            FoldOp::Min(d) => d - 1,
        }
    }

    pub fn apply(&self, a: u32, b: u32) -> u32 {
        match *self {
            FoldOp::ParityMod(d) => ((a as u64 + b as u64) % d as u64) as u32,
            FoldOp::Max(_) => a.max(b),
            FoldOp::Min(_) => a.min(b),
        }
    }

    pub fn function_table(&self, n: usize) -> Result<FunctionTable> {
        let d = self.range();
        let sizes = vec![d; n];
        match self {
            FoldOp::ParityMod(_) => FunctionTable::parity(&sizes, d),
            FoldOp::Max(_) => FunctionTable::max_of(&sizes),
            FoldOp::Min(_) => FunctionTable::min_of(&sizes),
        }
    }

    pub fn parse(name: &str, range: u32) -> Result<FoldOp> {
        match name {
            "parity" => Ok(FoldOp::ParityMod(range)),
            "max" => Ok(FoldOp::Max(range)),
            "min" => Ok(FoldOp::Min(range)),
            other => Err(Error::UnsupportedAggregation(other.into())),
        }
    }
}

/// How one cut fared under the split-aggregation schedule.
#[derive(Clone, Debug)]
pub struct SplitCutUsage {
    pub cut: Cut,
    pub bound_bits: f64,
    pub measured_bits_per_instance: f64,
    /// True when every instance's aggregate crosses the cut exactly once;
    /// those cuts are met with equality up to ceiling slack.
    pub crosses_once: bool,
}

/// Result of the block-splitting simulation.
#[derive(Clone, Debug)]
pub struct SplitAggregation {
    pub transcript: ProtocolTranscript,
    pub decoded: Vec<u32>,
    pub rates: RateVector,
    pub cut_usage: Vec<SplitCutUsage>,
}

/// Divisible-function scheme: every node folds the partial aggregates it
/// received into its own block, then partitions its instances across its
/// out-edges (largest-remainder on the weights, contiguous segments in edge
/// order). The description length per instance never grows, so every cut the
/// schedule crosses exactly once is met with equality up to rounding.
pub fn simulate_split_aggregation(
    op: FoldOp,
    g: &NetworkGraph,
    block: &crate::model::Block,
    weights: Option<&BTreeMap<(NodeId, NodeId), f64>>,
    caps: &Caps,
) -> Result<SplitAggregation> {
    if !matches!(g.kind(), GraphKind::Dag | GraphKind::DirectedTree) {
        return Err(Error::WrongGraphKind {
            expected: "dag",
            got: g.kind().name(),
        });
    }
    let d = op.range();
    if g.alphabet_sizes().iter().any(|&s| s != d) {
        return Err(Error::InvalidGraph(format!(
            "split aggregation needs every alphabet equal to the range {d}"
        )));
    }
    block.validate_against(g.alphabet_sizes())?;
    let n = block.len();
    let collector = g.collector();
    let order = g.topological_order()?;

    // partial aggregate per node per instance; start with the node's block
    let mut partial: Vec<Vec<u32>> = (0..g.node_count())
        .map(|i| block.seq(NodeId::from_index(i)).to_vec())
        .collect();
    let mut transcript = ProtocolTranscript::new(n);
    let mut rates = RateVector::new();
    for &e in g.edges() {
        rates.set(e, 0.0)?;
    }
    // how many times each instance crosses each cut
    let cuts = enumerate_cuts_capped(g, collector, caps.cut_nodes)?;
    let mut crossings: Vec<Vec<u32>> = vec![vec![0; n]; cuts.len()];

    // process in reverse topological order of the *reachability to collector*:
    // a node transmits after receiving everything, which topological order of
    // the DAG guarantees when we walk sources first
    for &v in &order {
        if v == collector {
            continue;
        }
        let out: Vec<(NodeId, NodeId)> = g.out_edges(v).collect();
        let share: Vec<f64> = match weights {
            Some(w) => {
                let raw: Vec<f64> = out
                    .iter()
                    .map(|e| w.get(e).copied().unwrap_or(0.0))
                    .collect();
                let total: f64 = raw.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "weights on the out-edges of {v} must have a positive sum"
                    )));
                }
                raw.iter().map(|x| x / total).collect()
            }
            None => vec![1.0 / out.len() as f64; out.len()],
        };
        // largest-remainder apportionment of the n instances
        let mut counts: Vec<usize> = share.iter().map(|s| (s * n as f64).floor() as usize).collect();
        let mut remainder: Vec<(f64, usize)> = share
            .iter()
            .enumerate()
            .map(|(i, s)| (s * n as f64 - counts[i] as f64, i))
            .collect();
        remainder.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut assigned: usize = counts.iter().sum();
        let mut i = 0;
        while assigned < n {
            counts[remainder[i].1] += 1;
            assigned += 1;
            i = (i + 1) % remainder.len();
        }
        // contiguous segments in edge order
        let mut start = 0usize;
        for (edge_i, &(from, to)) in out.iter().enumerate() {
            let seg = start..start + counts[edge_i];
            start += counts[edge_i];
            let values: Vec<u32> = seg.clone().map(|t| partial[v.index()][t]).collect();
            let bits = pack_base_k(&values, d as u64);
            rates.add((from, to), bits.len() as f64 / n as f64);
            transcript.push(from, to, bits);
            for t in seg.clone() {
                partial[to.index()][t] = op.apply(partial[to.index()][t], partial[v.index()][t]);
            }
            for (ci, cut) in cuts.iter().enumerate() {
                if cut.contains(from) && !cut.contains(to) {
                    for t in seg.clone() {
                        crossings[ci][t] += 1;
                    }
                }
            }
        }
    }
    let decoded = partial[collector.index()].clone();

    let mut cut_usage = Vec::new();
    for (ci, cut) in cuts.into_iter().enumerate() {
        let measured: f64 = cut
            .crossing
            .iter()
            .map(|&e| rates.rate_or_zero(e))
            .sum();
        cut_usage.push(SplitCutUsage {
            bound_bits: (d as f64).log2(),
            measured_bits_per_instance: measured,
            crosses_once: crossings[ci].iter().all(|&c| c == 1),
            cut,
        });
    }
    Ok(SplitAggregation {
        transcript,
        decoded,
        rates,
        cut_usage,
    })
}
