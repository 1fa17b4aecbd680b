//! Shared domain types: finite alphabets, total function tables, joint
//! distributions with exact rational probabilities, network graphs, blocks of
//! measurements, and rate vectors.
//!
//! Letters of an alphabet of size `s` are canonically `0..s-1`; node ids are
//! dense integers `1..=n` with `v1` the collector or root where one applies.
//! All types are immutable after construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{self, product_size, tuple_index, tuples, SplitMix64};

/// A finite alphabet; letters are `0..size-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidFunction("alphabet size must be >= 1".into()));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn letters(&self) -> impl Iterator<Item = u32> {
        0..self.size
    }
}

/// 1-based node identifier; `v1` is the collector/root where applicable.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A total function from a product of finite alphabets to a finite range,
/// stored as a flat row-major table (last argument varies fastest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    alphabets: Vec<Alphabet>,
    range_size: u32,
    values: Vec<u32>,
}

impl FunctionTable {
    pub fn new(alphabet_sizes: &[u32], range_size: u32, values: Vec<u32>) -> Result<Self> {
        if alphabet_sizes.is_empty() {
            return Err(Error::InvalidFunction("arity must be >= 1".into()));
        }
        if range_size == 0 {
            return Err(Error::InvalidFunction("range size must be >= 1".into()));
        }
        let alphabets = alphabet_sizes
            .iter()
            .map(|&s| Alphabet::new(s))
            .collect::<Result<Vec<_>>>()?;
        let expected = product_size(alphabet_sizes);
        if values.len() as u128 != expected {
            return Err(Error::InvalidFunction(format!(
                "value table has {} entries, expected {} (total function)",
                values.len(),
                expected
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= range_size) {
            return Err(Error::InvalidFunction(format!(
                "value {v} outside range 0..{range_size}"
            )));
        }
        Ok(FunctionTable {
            alphabets,
            range_size,
            values,
        })
    }

    /// Build a table by evaluating `f` on every tuple.
    pub fn from_fn(
        alphabet_sizes: &[u32],
        range_size: u32,
        f: impl Fn(&[u32]) -> u32,
    ) -> Result<Self> {
        let values = tuples(alphabet_sizes).map(|t| f(&t)).collect();
        FunctionTable::new(alphabet_sizes, range_size, values)
    }

    pub fn arity(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabet_sizes(&self) -> Vec<u32> {
        self.alphabets.iter().map(|a| a.size()).collect()
    }

    pub fn alphabet(&self, arg: usize) -> Alphabet {
        self.alphabets[arg]
    }

    pub fn range_size(&self) -> u32 {
        self.range_size
    }

    pub fn eval(&self, args: &[u32]) -> u32 {
        let sizes = self.alphabet_sizes();
        self.values[tuple_index(&sizes, args)]
    }

    // Built-in families. Each takes explicit alphabet sizes so the same
    // constructors back both the JSON shorthand and the test fixtures.

    /// n-ary Boolean AND over binary alphabets.
    pub fn and_of(n: usize) -> Self {
        FunctionTable::from_fn(&vec![2; n], 2, |t| u32::from(t.iter().all(|&x| x == 1)))
            .expect("valid builtin")
    }

    /// Sum of all arguments modulo `modulus`; alphabets default to size `modulus`.
    pub fn parity(sizes: &[u32], modulus: u32) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidFunction("modulus must be >= 1".into()));
        }
        FunctionTable::from_fn(sizes, modulus, |t| {
            t.iter().fold(0u64, |a, &x| (a + x as u64) % modulus as u64) as u32
        })
    }

    pub fn max_of(sizes: &[u32]) -> Result<Self> {
        let range = sizes.iter().max().copied().unwrap_or(1);
        FunctionTable::from_fn(sizes, range, |t| t.iter().copied().max().unwrap())
    }

    pub fn min_of(sizes: &[u32]) -> Result<Self> {
        let range = sizes.iter().max().copied().unwrap_or(1);
        FunctionTable::from_fn(sizes, range, |t| t.iter().copied().min().unwrap())
    }

    /// Arithmetic sum; range is the full set of attainable sums.
    pub fn sum_of(sizes: &[u32]) -> Result<Self> {
        let range: u32 = sizes.iter().map(|&s| s - 1).sum::<u32>() + 1;
        FunctionTable::from_fn(sizes, range, |t| t.iter().sum())
    }

    /// Indicator of `sum >= theta` over alphabets `{0..l_i}` given capacities `ls`.
    pub fn sum_threshold(ls: &[u32], theta: u32) -> Result<Self> {
        let sizes: Vec<u32> = ls.iter().map(|&l| l + 1).collect();
        FunctionTable::from_fn(&sizes, 2, |t| u32::from(t.iter().sum::<u32>() >= theta))
    }

    /// Indicator of `a <= sum <= b` over alphabets `{0..l_i}` given capacities `ls`.
    pub fn sum_interval(ls: &[u32], a: u32, b: u32) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidFunction(format!(
                "interval bounds must satisfy a <= b, got [{a}, {b}]"
            )));
        }
        let sizes: Vec<u32> = ls.iter().map(|&l| l + 1).collect();
        FunctionTable::from_fn(&sizes, 2, |t| {
            let s = t.iter().sum::<u32>();
            u32::from(a <= s && s <= b)
        })
    }
}

/// A joint probability distribution over a product alphabet, with exact
/// rational probabilities summing to exactly 1.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    sizes: Vec<u32>,
    probs: Vec<BigRational>,
}

impl JointDistribution {
    pub fn new(sizes: &[u32], probs: Vec<BigRational>) -> Result<Self> {
        let expected = product_size(sizes);
        if probs.len() as u128 != expected {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities, expected {}",
                probs.len(),
                expected
            )));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution(
                "probabilities must be non-negative".into(),
            ));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected exactly 1"
            )));
        }
        Ok(JointDistribution {
            sizes: sizes.to_vec(),
            probs,
        })
    }

    /// Uniform distribution over the product alphabet.
    pub fn uniform(sizes: &[u32]) -> Self {
        let count = product_size(sizes);
        assert!(count > 0 && count <= u64::MAX as u128);
        let p = BigRational::new(1.into(), BigUint::from(count as u64).into());
        JointDistribution {
            sizes: sizes.to_vec(),
            probs: vec![p; count as usize],
        }
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn prob(&self, tuple: &[u32]) -> &BigRational {
        &self.probs[tuple_index(&self.sizes, tuple)]
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|p| p.is_positive())
    }

    /// Checks the argument shape against a function table.
    pub fn matches(&self, f: &FunctionTable) -> bool {
        self.sizes == f.alphabet_sizes()
    }
}

/// Graph flavor; determines which invariants are enforced and which
/// operations apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    DirectedTree,
    Dag,
    UndirectedTree,
    UndirectedGeneral,
}

impl GraphKind {
    pub fn is_directed(self) -> bool {
        matches!(self, GraphKind::DirectedTree | GraphKind::Dag)
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::DirectedTree => "directed-tree",
            GraphKind::Dag => "dag",
            GraphKind::UndirectedTree => "undirected-tree",
            GraphKind::UndirectedGeneral => "undirected-general",
        }
    }
}

/// A communication graph with per-node alphabet sizes.
///
/// Directed edges `(i, j)` mean `i` can transmit to `j`. Undirected edges are
/// stored with the smaller endpoint first.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    kind: GraphKind,
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    alphabet_sizes: Vec<u32>,
    collector: Option<NodeId>,
}

impl NetworkGraph {
    pub fn new(
        kind: GraphKind,
        n: usize,
        edges: &[(u32, u32)],
        alphabet_sizes: &[u32],
        collector: Option<u32>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        if alphabet_sizes.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} alphabet sizes for {} nodes",
                alphabet_sizes.len(),
                n
            )));
        }
        if alphabet_sizes.contains(&0) {
            return Err(Error::InvalidGraph("alphabet sizes must be >= 1".into()));
        }
        let mut seen = BTreeSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n as u32 || b > n as u32 {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at v{a}")));
            }
            let e = if kind.is_directed() {
                (NodeId(a), NodeId(b))
            } else {
                (NodeId(a.min(b)), NodeId(a.max(b)))
            };
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            stored.push(e);
        }
        stored.sort();
        let collector = collector.map(NodeId);
        let g = NetworkGraph {
            kind,
            n,
            edges: stored,
            alphabet_sizes: alphabet_sizes.to_vec(),
            collector,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let collector = self.collector.unwrap_or(NodeId(1));
        match self.kind {
            GraphKind::DirectedTree => {
                // exactly one sink (the collector); every other node has
                // out-degree exactly 1 and a directed path to the collector.
                for v in self.nodes() {
                    let d = self.out_edges(v).count();
                    if v == collector && d != 0 {
                        return Err(Error::InvalidGraph(format!(
                            "collector {v} must have out-degree 0"
                        )));
                    }
                    if v != collector && d != 1 {
                        return Err(Error::InvalidGraph(format!(
                            "node {v} has out-degree {d}, expected 1"
                        )));
                    }
                }
                let reach = self.reverse_reachable(collector)?;
                if reach.len() != self.n {
                    return Err(Error::InvalidGraph(
                        "not every node reaches the collector".into(),
                    ));
                }
            }
            GraphKind::Dag => {
                self.topological_order()?;
                for v in self.nodes() {
                    let d = self.out_edges(v).count();
                    if v == collector && d != 0 {
                        return Err(Error::InvalidGraph(format!(
                            "collector {v} must have only incoming edges"
                        )));
                    }
                    if v != collector && d == 0 {
                        return Err(Error::InvalidGraph(format!(
                            "{v} is a second sink; the collector must be unique"
                        )));
                    }
                }
            }
            GraphKind::UndirectedTree => {
                if self.edges.len() != self.n - 1 {
                    return Err(Error::InvalidGraph(format!(
                        "tree needs {} edges, got {}",
                        self.n - 1,
                        self.edges.len()
                    )));
                }
                if !self.is_connected() {
                    return Err(Error::InvalidGraph("tree must be connected".into()));
                }
            }
            GraphKind::UndirectedGeneral => {
                if !self.is_connected() {
                    return Err(Error::InvalidGraph("graph must be connected".into()));
                }
            }
        }
        Ok(())
    }

    /// Complete undirected graph on `n` nodes with capacities `ls`
    /// (alphabets `{0..l_i}`).
    pub fn complete_with_capacities(ls: &[u32]) -> Result<Self> {
        let n = ls.len();
        let mut edges = Vec::new();
        for i in 1..=n as u32 {
            for j in (i + 1)..=n as u32 {
                edges.push((i, j));
            }
        }
        let sizes: Vec<u32> = ls.iter().map(|&l| l + 1).collect();
        NetworkGraph::new(GraphKind::UndirectedGeneral, n, &edges, &sizes, None)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.n as u32).map(NodeId)
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v.0 == 0 || v.0 > self.n as u32 {
            return Err(Error::UnknownNode(v));
        }
        Ok(())
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn collector(&self) -> NodeId {
        self.collector.unwrap_or(NodeId(1))
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    pub fn alphabet_size(&self, v: NodeId) -> u32 {
        self.alphabet_sizes[v.index()]
    }

    /// Per-node capacities `l_i = size_i - 1`, so a node holds a value in
    /// `{0..l_i}`; "binary" measurements have capacity 1.
    pub fn capacities(&self) -> Vec<u32> {
        self.alphabet_sizes.iter().map(|&s| s - 1).collect()
    }

    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied().filter(move |&(a, _)| a == v)
    }

    pub fn in_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|&&(_, b)| b == v)
            .map(|&(a, _)| a)
            .collect()
    }

    /// Unique out-neighbor in a directed tree.
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.out_edges(v).next().map(|(_, b)| b)
    }

    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort();
        out
    }

    pub fn has_undirected_edge(&self, a: NodeId, b: NodeId) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        !self.kind.is_directed() && self.edges.len() == self.n * (self.n - 1) / 2
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![NodeId(1)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn reverse_reachable(&self, to: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check_node(to)?;
        let mut seen = BTreeSet::new();
        let mut stack = vec![to];
        seen.insert(to);
        while let Some(v) = stack.pop() {
            for w in self.in_neighbors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        Ok(seen)
    }

    /// Topological order of a directed graph (sources first). Errors on cycles.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        let mut indeg = vec![0usize; self.n];
        for &(_, b) in &self.edges {
            indeg[b.index()] += 1;
        }
        let mut queue: Vec<NodeId> = self
            .nodes()
            .filter(|v| indeg[v.index()] == 0)
            .collect();
        queue.sort();
        let mut order = Vec::with_capacity(self.n);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            order.push(v);
            for (_, w) in self.out_edges(v) {
                indeg[w.index()] -= 1;
                if indeg[w.index()] == 0 {
                    queue.push(w);
                }
            }
        }
        if order.len() != self.n {
            return Err(Error::InvalidGraph("directed graph has a cycle".into()));
        }
        Ok(order)
    }
}

/// All nodes with a directed path to `node`, including `node` itself. In a
/// directed tree this is the subtree hanging below `node`.
pub fn descendant_set(g: &NetworkGraph, node: NodeId) -> Result<BTreeSet<NodeId>> {
    if !g.kind().is_directed() {
        return Err(Error::WrongGraphKind {
            expected: "directed",
            got: g.kind().name(),
        });
    }
    g.check_node(node)?;
    let mut seen = BTreeSet::new();
    let mut stack = vec![node];
    seen.insert(node);
    while let Some(v) = stack.pop() {
        for w in g.in_neighbors(v) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    Ok(seen)
}

/// One side of a cut together with its crossing edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    /// The side S not containing the collector/anchor, ascending ids.
    pub inside: Vec<NodeId>,
    /// Directed graphs: edges from S to its complement. Undirected graphs:
    /// every edge with exactly one endpoint in S.
    pub crossing: Vec<(NodeId, NodeId)>,
}

impl Cut {
    pub fn contains(&self, v: NodeId) -> bool {
        self.inside.binary_search(&v).is_ok()
    }
}

/// Enumerates every cut `(S, V \ S)` with the collector outside S; there are
/// exactly `2^(n-1) - 1` of them.
pub fn enumerate_cuts(g: &NetworkGraph, collector: NodeId) -> Result<Vec<Cut>> {
    enumerate_cuts_capped(g, collector, Caps::default().cut_nodes)
}

pub fn enumerate_cuts_capped(g: &NetworkGraph, collector: NodeId, cap: usize) -> Result<Vec<Cut>> {
    g.check_node(collector)?;
    let n = g.node_count();
    if n > cap {
        return Err(Error::NodeCapExceeded { n, cap });
    }
    let others: Vec<NodeId> = g.nodes().filter(|&v| v != collector).collect();
    let mut cuts = Vec::with_capacity((1usize << others.len()) - 1);
    for mask in 1u64..(1u64 << others.len()) {
        let inside: Vec<NodeId> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let in_s = |v: NodeId| inside.binary_search(&v).is_ok();
        let crossing: Vec<(NodeId, NodeId)> = if g.kind().is_directed() {
            g.edges()
                .iter()
                .copied()
                .filter(|&(a, b)| in_s(a) && !in_s(b))
                .collect()
        } else {
            g.edges()
                .iter()
                .copied()
                .filter(|&(a, b)| in_s(a) != in_s(b))
                .collect()
        };
        cuts.push(Cut { inside, crossing });
    }
    Ok(cuts)
}

/// A block of `len` independent measurement instances: one sequence per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    len: usize,
    seqs: Vec<Vec<u32>>,
}

impl Block {
    pub fn new(seqs: Vec<Vec<u32>>) -> Result<Self> {
        let len = seqs.first().map(|s| s.len()).unwrap_or(0);
        if seqs.iter().any(|s| s.len() != len) {
            return Err(Error::BlockMismatch(
                "all per-node sequences must have the same length".into(),
            ));
        }
        Ok(Block { len, seqs })
    }

    /// Seeded uniform block over the given per-node alphabet sizes.
    pub fn random(sizes: &[u32], len: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let seqs = sizes
            .iter()
            .map(|&s| (0..len).map(|_| rng.below(s as u64) as u32).collect())
            .collect();
        Block { len, seqs }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_count(&self) -> usize {
        self.seqs.len()
    }

    pub fn seq(&self, node: NodeId) -> &[u32] {
        &self.seqs[node.index()]
    }

    /// The tuple of all node values at instance `t`.
    pub fn instance(&self, t: usize) -> Vec<u32> {
        self.seqs.iter().map(|s| s[t]).collect()
    }

    /// Applies `f` instance-wise across all nodes.
    pub fn eval_function(&self, f: &FunctionTable) -> Vec<u32> {
        (0..self.len).map(|t| f.eval(&self.instance(t))).collect()
    }

    pub fn validate_against(&self, sizes: &[u32]) -> Result<()> {
        if self.seqs.len() != sizes.len() {
            return Err(Error::BlockMismatch(format!(
                "{} sequences for {} nodes",
                self.seqs.len(),
                sizes.len()
            )));
        }
        for (seq, &s) in self.seqs.iter().zip(sizes) {
            if seq.iter().any(|&x| x >= s) {
                return Err(Error::BlockMismatch(format!(
                    "letter out of alphabet of size {s}"
                )));
            }
        }
        Ok(())
    }
}

/// A rate kept in exact form when one exists: `log2` of an integer, or a
/// rational number of bits (e.g. a ceiling divided by a block length).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactRate {
    Log2(u64),
    Frac(u64, u64),
}

impl fmt::Display for ExactRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactRate::Log2(k) => write!(f, "log2({k})"),
            ExactRate::Frac(a, b) => write!(f, "{a}/{b}"),
        }
    }
}

/// Bits per instance, with the exact expression retained when available.
#[derive(Clone, Debug, PartialEq)]
pub struct Rate {
    pub bits: f64,
    pub exact: Option<ExactRate>,
}

impl Rate {
    pub fn log2_int(k: u64) -> Self {
        Rate {
            bits: (k as f64).log2(),
            exact: Some(ExactRate::Log2(k)),
        }
    }

    pub fn frac(num: u64, den: u64) -> Self {
        Rate {
            bits: num as f64 / den as f64,
            exact: Some(ExactRate::Frac(num, den)),
        }
    }

    pub fn bits(bits: f64) -> Self {
        Rate { bits, exact: None }
    }
}

/// A rate vector: bits per instance per directed edge (or per undirected
/// edge, keyed with the smaller endpoint first).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateVector {
    entries: BTreeMap<(NodeId, NodeId), f64>,
}

impl RateVector {
    pub fn new() -> Self {
        RateVector::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((NodeId, NodeId), f64)>) -> Result<Self> {
        let mut rv = RateVector::new();
        for (e, r) in entries {
            rv.set(e, r)?;
        }
        Ok(rv)
    }

    pub fn set(&mut self, edge: (NodeId, NodeId), rate: f64) -> Result<()> {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::Invalid(format!(
                "rate on edge ({}, {}) must be a non-negative real, got {rate}",
                edge.0, edge.1
            )));
        }
        self.entries.insert(edge, rate);
        Ok(())
    }

    pub fn add(&mut self, edge: (NodeId, NodeId), rate: f64) {
        *self.entries.entry(edge).or_insert(0.0) += rate;
    }

    pub fn get(&self, edge: (NodeId, NodeId)) -> Option<f64> {
        self.entries.get(&edge).copied()
    }

    pub fn rate_or_zero(&self, edge: (NodeId, NodeId)) -> f64 {
        self.get(edge).unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((NodeId, NodeId), f64)> + '_ {
        self.entries.iter().map(|(&e, &r)| (e, r))
    }

    /// Sum of rates over the given edges; errors if an edge is absent.
    pub fn total_over(&self, edges: &[(NodeId, NodeId)]) -> Result<f64> {
        let mut total = 0.0;
        for &e in edges {
            total += self
                .get(e)
                .ok_or(Error::MissingRate(e.0, e.1))?;
        }
        Ok(total)
    }

    pub fn max_rate(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }
}

/// Enumeration caps shared by the exhaustive operations.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    /// Maximum node count for cut enumeration (2^(n-1) subsets).
    pub cut_nodes: usize,
    /// Maximum tuple count for any single alphabet enumeration.
    pub tuples: u64,
    /// Maximum number of candidate trees enumerated in a DAG.
    pub trees: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            cut_nodes: 16,
            tuples: 1 << 20,
            trees: 100_000,
        }
    }
}

impl Caps {
    pub fn check_tuples(&self, sizes: &[u32]) -> Result<u128> {
        let count = util::product_size(sizes);
        if count > self.tuples as u128 {
            return Err(Error::EnumerationCapExceeded {
                tuples: count,
                cap: self.tuples,
            });
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star3() -> NetworkGraph {
        // v2 -> v1, v3 -> v1
        NetworkGraph::new(
            GraphKind::DirectedTree,
            3,
            &[(2, 1), (3, 1)],
            &[2, 2, 2],
            Some(1),
        )
        .unwrap()
    }

    #[test]
    fn descendant_sets_on_star_and_chain() {
        let g = star3();
        let d1 = descendant_set(&g, NodeId(1)).unwrap();
        assert_eq!(d1.len(), 3); // whole graph
        let d2 = descendant_set(&g, NodeId(2)).unwrap();
        assert_eq!(d2.into_iter().collect::<Vec<_>>(), vec![NodeId(2)]); // leaf

        let chain = NetworkGraph::new(
            GraphKind::DirectedTree,
            3,
            &[(3, 2), (2, 1)],
            &[2, 2, 2],
            Some(1),
        )
        .unwrap();
        let d = descendant_set(&chain, NodeId(2)).unwrap();
        assert_eq!(
            d.into_iter().collect::<Vec<_>>(),
            vec![NodeId(2), NodeId(3)]
        );
    }

    #[test]
    fn descendant_set_rejects_unknown_node() {
        let g = star3();
        assert!(matches!(
            descendant_set(&g, NodeId(9)),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn cut_enumeration_counts() {
        let two = NetworkGraph::new(GraphKind::DirectedTree, 2, &[(2, 1)], &[2, 2], Some(1))
            .unwrap();
        let cuts = enumerate_cuts(&two, NodeId(1)).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].inside, vec![NodeId(2)]);

        let cuts3 = enumerate_cuts(&star3(), NodeId(1)).unwrap();
        assert_eq!(cuts3.len(), 3); // 2^2 - 1

        let square = NetworkGraph::new(
            GraphKind::UndirectedGeneral,
            4,
            &[(1, 2), (2, 3), (3, 4), (4, 1)],
            &[2, 2, 2, 2],
            None,
        )
        .unwrap();
        assert_eq!(enumerate_cuts(&square, NodeId(1)).unwrap().len(), 7);
    }

    #[test]
    fn cut_cap_is_enforced() {
        let g = star3();
        assert!(matches!(
            enumerate_cuts_capped(&g, NodeId(1), 2),
            Err(Error::NodeCapExceeded { .. })
        ));
    }

    #[test]
    fn function_table_is_total_and_pure() {
        let f = FunctionTable::and_of(2);
        assert_eq!(f.eval(&[1, 1]), 1);
        assert_eq!(f.eval(&[1, 0]), 0);
        assert_eq!(f.eval(&[1, 1]), 1); // repeated query, same value
        assert!(FunctionTable::new(&[2, 2], 2, vec![0, 1, 2, 0]).is_err());
        assert!(FunctionTable::new(&[2, 2], 2, vec![0, 1, 0]).is_err());
    }

    #[test]
    fn parity_and_sum_builtins() {
        let f = FunctionTable::parity(&[4, 4, 4], 4).unwrap();
        assert_eq!(f.eval(&[3, 3, 3]), 1);
        let s = FunctionTable::sum_of(&[1, 2, 2]).unwrap();
        assert_eq!(s.range_size(), 3);
        assert_eq!(s.eval(&[0, 1, 1]), 2);
    }

    #[test]
    fn distribution_must_sum_to_one_exactly() {
        let half = BigRational::new(1.into(), 2.into());
        let quarter = BigRational::new(1.into(), 4.into());
        assert!(JointDistribution::new(&[2], vec![half.clone(), half.clone()]).is_ok());
        assert!(JointDistribution::new(&[2], vec![half, quarter]).is_err());
    }

    #[test]
    fn directed_tree_validation() {
        // cycle among non-root nodes is rejected
        assert!(NetworkGraph::new(
            GraphKind::DirectedTree,
            3,
            &[(2, 3), (3, 2)],
            &[2, 2, 2],
            Some(1),
        )
        .is_err());
        // a DAG with two sinks is rejected
        assert!(NetworkGraph::new(
            GraphKind::Dag,
            3,
            &[(3, 1), (3, 2)],
            &[2, 2, 2],
            Some(1),
        )
        .is_err());
    }

    #[test]
    fn core_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Alphabet>();
        assert_send_sync::<FunctionTable>();
        assert_send_sync::<JointDistribution>();
        assert_send_sync::<NetworkGraph>();
        assert_send_sync::<Block>();
        assert_send_sync::<RateVector>();
        assert_send_sync::<Cut>();
    }

    #[test]
    fn induced_subtree_of_descendants_is_a_tree() {
        // For every directed tree and node v, the subgraph induced on the
        // descendant set is a valid directed tree rooted at v.
        for edges in crate::util::labeled_trees(5) {
            // orient every tree toward node 1 by BFS
            let mut parent = [0u32; 6];
            let mut seen = [false; 6];
            let mut queue = vec![1u32];
            seen[1] = true;
            while let Some(v) = queue.pop() {
                for &(a, b) in &edges {
                    let w = if a == v && !seen[b as usize] {
                        b
                    } else if b == v && !seen[a as usize] {
                        a
                    } else {
                        continue;
                    };
                    parent[w as usize] = v;
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
            let directed: Vec<(u32, u32)> =
                (2..=5).map(|v| (v, parent[v as usize])).collect();
            let g = NetworkGraph::new(
                GraphKind::DirectedTree,
                5,
                &directed,
                &[2; 5],
                Some(1),
            )
            .unwrap();
            for v in g.nodes() {
                let d = descendant_set(&g, v).unwrap();
                // relabel the induced subgraph with dense ids, v first
                let ids: Vec<NodeId> = std::iter::once(v)
                    .chain(d.iter().copied().filter(|&w| w != v))
                    .collect();
                let reindex = |w: NodeId| ids.iter().position(|&x| x == w).unwrap() as u32 + 1;
                let sub_edges: Vec<(u32, u32)> = directed
                    .iter()
                    .filter(|&&(a, b)| d.contains(&NodeId(a)) && d.contains(&NodeId(b)))
                    .map(|&(a, b)| (reindex(NodeId(a)), reindex(NodeId(b))))
                    .collect();
                assert!(NetworkGraph::new(
                    GraphKind::DirectedTree,
                    d.len(),
                    &sub_edges,
                    &vec![2; d.len()],
                    Some(1),
                )
                .is_ok());
            }
        }
    }
}
