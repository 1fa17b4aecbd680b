//! Interactive computation of sum-threshold and sum-interval functions on
//! undirected trees, with every node decoding the whole function block.
//!
//! Each edge reduces to a two-node problem by aggregating its two sides.
//! Codewords flow from the leaves to a chosen root: a node folds the class
//! representatives received from its children into its own letter, classifies
//! the partial sum under the edge scheme, and transmits. Once the root has
//! decoded, replies flow back down, one bit per ambiguous instance per edge,
//! so the total on edge e is exactly `ceil(N log2 M_e)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::interactive::{fooling_bound_threshold, SumScheme, ThresholdSpec};
use crate::model::{Block, GraphKind, NetworkGraph, NodeId};
use crate::transcript::ProtocolTranscript;
use crate::util::ceil_log2_pow;

/// Per-edge two-node reduction: capacities of the two components and the
/// resulting complexity.
#[derive(Clone, Debug)]
pub struct EdgeCutProfile {
    pub edge: (NodeId, NodeId),
    pub small_side_capacity: u32,
    pub large_side_capacity: u32,
    pub coding_size: u64,
    pub complexity_bits: f64,
}

fn require_tree(g: &NetworkGraph) -> Result<()> {
    if g.kind() != GraphKind::UndirectedTree {
        return Err(Error::WrongGraphKind {
            expected: "undirected-tree",
            got: g.kind().name(),
        });
    }
    Ok(())
}

/// Capacity of each component after removing edge `(a, b)`: the side
/// containing `a` first.
fn split_capacities(g: &NetworkGraph, a: NodeId, b: NodeId) -> (u32, u32) {
    let caps = g.capacities();
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![a];
    seen[a.index()] = true;
    let mut side_a = 0u32;
    while let Some(v) = stack.pop() {
        side_a += caps[v.index()];
        for w in g.neighbors(v) {
            if (v == a && w == b) || (v == b && w == a) {
                continue;
            }
            if !seen[w.index()] {
                seen[w.index()] = true;
                stack.push(w);
            }
        }
    }
    let total: u32 = caps.iter().sum();
    (side_a, total - side_a)
}

/// Codeword count for a sum-threshold function across a cut with component
/// capacities `l_a`, `l_b`: `min(2 theta + 1, 2 min(l_a, l_b) + 2,
/// 2 (l_v - theta + 1) + 1)`.
pub fn threshold_cut_coding_size(theta: u32, l_a: u32, l_b: u32) -> u64 {
    let total = (l_a + l_b) as u64;
    let theta = theta as u64;
    if theta > total {
        return 1; // constant function
    }
    (2 * theta + 1)
        .min(2 * l_a.min(l_b) as u64 + 2)
        .min(2 * (total - theta + 1) + 1)
}

/// The exact complexity of every edge for the sum-threshold function with
/// per-node capacities taken from the graph alphabets (`l_i = size_i - 1`;
/// binary measurements have `l_i = 1`).
pub fn edge_complexities(g: &NetworkGraph, theta: u32) -> Result<Vec<EdgeCutProfile>> {
    require_tree(g)?;
    let total: u32 = g.capacities().iter().sum();
    if theta > total + 1 {
        return Err(Error::ThresholdOutOfRange {
            theta,
            max: total + 1,
        });
    }
    Ok(g.edges()
        .iter()
        .map(|&(a, b)| {
            let (la, lb) = split_capacities(g, a, b);
            let m = threshold_cut_coding_size(theta, la, lb);
            EdgeCutProfile {
                edge: (a, b),
                small_side_capacity: la.min(lb),
                large_side_capacity: la.max(lb),
                coding_size: m,
                complexity_bits: (m as f64).log2(),
            }
        })
        .collect())
}

/// Root choice plus the orders in which codewords move up and replies move
/// down; children always transmit before their parent, parents always reply
/// before their children.
#[derive(Clone, Debug)]
pub struct ScheduledProtocol {
    pub root: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub upward: Vec<NodeId>,
    pub downward: Vec<NodeId>,
    /// Capacity of the subtree hanging below each node (including itself).
    pub subtree_capacity: Vec<u32>,
}

impl ScheduledProtocol {
    pub fn new(g: &NetworkGraph, root: NodeId) -> Result<Self> {
        require_tree(g)?;
        g.check_node(root)?;
        let n = g.node_count();
        let caps = g.capacities();
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut order = vec![root];
        let mut seen = vec![false; n];
        seen[root.index()] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for w in g.neighbors(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    parent[w.index()] = Some(v);
                    depth[w.index()] = depth[v.index()] + 1;
                    order.push(w);
                }
            }
        }
        let mut upward = order.clone();
        upward.sort_by_key(|v| std::cmp::Reverse(depth[v.index()]));
        let downward = order;
        let mut subtree_capacity = caps.clone();
        for &v in &upward {
            if let Some(p) = parent[v.index()] {
                subtree_capacity[p.index()] += subtree_capacity[v.index()];
            }
        }
        Ok(ScheduledProtocol {
            root,
            parent,
            upward,
            downward,
            subtree_capacity,
        })
    }

    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        self.parent
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Some(v))
            .map(|(i, _)| NodeId::from_index(i))
            .collect()
    }
}

/// A centroid of the tree: a node minimizing the largest component left by
/// its removal (smallest id among minimizers).
pub fn centroid(g: &NetworkGraph) -> Result<NodeId> {
    require_tree(g)?;
    let n = g.node_count();
    let mut best = (usize::MAX, NodeId(1));
    for v in g.nodes() {
        let mut largest = 0;
        let mut seen = vec![false; n];
        seen[v.index()] = true;
        for w in g.neighbors(v) {
            if seen[w.index()] {
                continue;
            }
            let mut size = 0;
            let mut stack = vec![w];
            seen[w.index()] = true;
            while let Some(u) = stack.pop() {
                size += 1;
                for x in g.neighbors(u) {
                    if !seen[x.index()] {
                        seen[x.index()] = true;
                        stack.push(x);
                    }
                }
            }
            largest = largest.max(size);
        }
        if (largest, v) < best {
            best = (largest, v);
        }
    }
    Ok(best.1)
}

/// One edge of a finished run, child side first.
#[derive(Clone, Debug)]
pub struct TreeEdgeUsage {
    pub child: NodeId,
    pub parent: NodeId,
    pub up_bits: u64,
    pub down_bits: u64,
    pub coding_size: u64,
    /// ceil(N log2 M_e): the worst-case (and in fact exact) per-edge total.
    pub bound_bits: u64,
}

/// Result of one block run: per-node decoded function blocks and the
/// transcript.
#[derive(Clone, Debug)]
pub struct TreeProtocolRun {
    pub schedule: ScheduledProtocol,
    pub transcript: ProtocolTranscript,
    pub decoded: Vec<Vec<u8>>,
    pub edges: Vec<TreeEdgeUsage>,
}

/// Runs the recursive aggregation protocol for any Boolean predicate of the
/// total sum. Threshold and interval functions are the two wrappers below.
pub fn run_sum_tree_protocol(
    g: &NetworkGraph,
    pred: &dyn Fn(u32) -> bool,
    root: NodeId,
    block: &Block,
) -> Result<TreeProtocolRun> {
    require_tree(g)?;
    block.validate_against(g.alphabet_sizes())?;
    let n_nodes = g.node_count();
    let n = block.len();
    let schedule = ScheduledProtocol::new(g, root)?;
    let total_capacity: u32 = g.capacities().iter().sum();

    // per-edge schemes, keyed by child
    let mut schemes: BTreeMap<NodeId, SumScheme> = BTreeMap::new();
    for v in g.nodes() {
        if v == root {
            continue;
        }
        let sub = schedule.subtree_capacity[v.index()];
        schemes.insert(
            v,
            SumScheme::for_predicate(sub, total_capacity - sub, pred),
        );
    }

    let mut transcript = ProtocolTranscript::new(n);
    // upward pass: fold child representatives, classify, transmit
    let mut sent_classes: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
    let mut partial_sums: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
    for &v in &schedule.upward {
        let mut sums: Vec<u32> = block.seq(v).to_vec();
        for c in schedule.children(v) {
            let scheme = &schemes[&c];
            for (t, s) in sums.iter_mut().enumerate() {
                *s += scheme.rep(sent_classes[&c][t]);
            }
        }
        if v != root {
            let scheme = &schemes[&v];
            let classes: Vec<u32> = sums.iter().map(|&s| scheme.class_of(s)).collect();
            let code = scheme.block_code(n);
            let word = code.encode(&classes);
            let parent = schedule.parent[v.index()].unwrap();
            transcript.push(v, parent, word);
            sent_classes.insert(v, classes);
        }
        partial_sums.insert(v, sums);
    }

    // the root decodes the block from its folded sums
    let mut decoded: Vec<Vec<u8>> = vec![Vec::new(); n_nodes];
    decoded[root.index()] = partial_sums[&root]
        .iter()
        .map(|&s| u8::from(pred(s)))
        .collect();

    // downward pass: one reply bit per ambiguous instance per edge
    let mut edges = Vec::new();
    for &v in &schedule.downward {
        for c in schedule.children(v) {
            let scheme = &schemes[&c];
            let classes = &sent_classes[&c];
            let parent_values = decoded[v.index()].clone();
            let mut reply = Vec::new();
            let mut child_values = Vec::with_capacity(n);
            for (t, &cls) in classes.iter().enumerate() {
                match scheme.determined(cls) {
                    Some(value) => child_values.push(value),
                    None => {
                        reply.push(parent_values[t]);
                        child_values.push(parent_values[t]);
                    }
                }
            }
            transcript.push(v, c, reply);
            decoded[c.index()] = child_values;
            let up_bits = transcript.bits_from_to(c, v);
            let down_bits = transcript.bits_from_to(v, c);
            let m = scheme.coding_size();
            edges.push(TreeEdgeUsage {
                child: c,
                parent: v,
                up_bits,
                down_bits,
                coding_size: m,
                bound_bits: ceil_log2_pow(m, n as u64),
            });
        }
    }
    Ok(TreeProtocolRun {
        schedule,
        transcript,
        decoded,
        edges,
    })
}

/// Sum-threshold protocol: every node ends up with the indicator block of
/// `sum >= theta`; per-edge totals are exactly `ceil(N log2 M_e)` with `M_e`
/// from `edge_complexities`.
pub fn run_tree_protocol(
    g: &NetworkGraph,
    theta: u32,
    root: NodeId,
    block: &Block,
) -> Result<TreeProtocolRun> {
    let total: u32 = g.capacities().iter().sum();
    if theta > total + 1 {
        return Err(Error::ThresholdOutOfRange {
            theta,
            max: total + 1,
        });
    }
    run_sum_tree_protocol(g, &move |s| s >= theta, root, block)
}

/// Sum-interval protocol under the hypothesis `b <= capacity / 2`. Reports
/// the per-edge ceiling `ceil(N log2 min(2(b+1)+1, 2 l_sub + 2))` (with
/// `l_sub` the transmitting subtree's capacity) alongside the lower-bound
/// profile `min(2b - a + 3, l_small + 1)` per edge.
#[derive(Clone, Debug)]
pub struct TreeIntervalRun {
    pub run: TreeProtocolRun,
    pub upper_bound_bits: Vec<u64>,
    pub lower_bound_profile: Vec<f64>,
}

pub fn run_tree_interval_protocol(
    g: &NetworkGraph,
    a: u32,
    b: u32,
    root: NodeId,
    block: &Block,
) -> Result<TreeIntervalRun> {
    let total: u32 = g.capacities().iter().sum();
    if a > b {
        return Err(Error::Invalid(format!(
            "interval bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    let constant_one = a == 0 && b >= total;
    if !constant_one && 2 * b > total {
        return Err(Error::IntervalHypothesis { b, capacity: total });
    }
    let run = run_sum_tree_protocol(g, &move |s| a <= s && s <= b, root, block)?;
    let n = block.len() as u64;
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for e in &run.edges {
        if constant_one {
            upper.push(0);
            lower.push(0.0);
            continue;
        }
        let sub = run.schedule.subtree_capacity[e.child.index()] as u64;
        let upper_m = (2 * (b as u64 + 1) + 1).min(2 * sub + 2);
        upper.push(ceil_log2_pow(upper_m, n));
        let small = sub.min(total as u64 - sub);
        let lower_m = (2 * b as u64 - a as u64 + 3).min(small + 1);
        lower.push((lower_m as f64).log2());
    }
    Ok(TreeIntervalRun {
        run,
        upper_bound_bits: upper,
        lower_bound_profile: lower,
    })
}

/// Cross-check per edge: the two-node reduction's fooling-set size equals
/// the edge coding size, so the achieved rate matches the lower bound.
#[derive(Clone, Debug)]
pub struct EdgeOptimalityReport {
    pub edge: (NodeId, NodeId),
    pub fooling_size: u64,
    pub coding_size: u64,
    pub matched: bool,
}

pub fn verify_edge_optimality(g: &NetworkGraph, theta: u32) -> Result<Vec<EdgeOptimalityReport>> {
    let profiles = edge_complexities(g, theta)?;
    let total: u32 = g.capacities().iter().sum();
    let mut out = Vec::new();
    for p in profiles {
        let spec = ThresholdSpec::new(p.small_side_capacity, p.large_side_capacity, theta.min(total + 1))?;
        let fooling = fooling_bound_threshold(&spec);
        if !fooling.verified {
            return Err(Error::Invalid(format!(
                "fooling property failed on edge ({}, {})",
                p.edge.0, p.edge.1
            )));
        }
        // degenerate thresholds have empty bands; both sides then report 1
        let fooling_size = fooling.size().max(1);
        out.push(EdgeOptimalityReport {
            edge: p.edge,
            fooling_size,
            coding_size: p.coding_size,
            matched: fooling_size == p.coding_size,
        });
    }
    Ok(out)
}
