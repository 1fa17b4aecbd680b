//! Directed-tree encoder synthesis and bottom-up computation.
//!
//! The alphabet of the edge leaving node `v` is the set of distinct partial
//! functions of the non-descendant variables realizable by fixing the
//! descendant variables; sending the id of the realized partial function and
//! re-aggregating through nominal values computes the function at the root
//! with zero error at the per-edge optimal rate `log2 |A_v|`.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::Zero;

use crate::codebook::{pack_base_k, PrefixCodebook};
use crate::error::{Error, Result};
use crate::model::{
    descendant_set, enumerate_cuts_capped, Block, Caps, Cut, FunctionTable, GraphKind,
    JointDistribution, NetworkGraph, NodeId,
};
use crate::transcript::ProtocolTranscript;
use crate::util::{ceil_log2_pow, entropy_bits, tuple_index, tuples};

/// One element of an edge alphabet: a realizable partial function of the
/// non-descendant variables, plus the smallest assignment realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeElement {
    /// Function values indexed over non-descendant assignments, row-major in
    /// ascending node-id order.
    pub values: Vec<u32>,
    /// Lexicographically smallest realizing assignment of the descendants.
    pub nominal: Vec<u32>,
}

/// The optimal alphabet for the edge leaving `node`.
#[derive(Clone, Debug)]
pub struct EdgeAlphabet {
    pub node: NodeId,
    /// Descendants of `node` (including itself), ascending.
    pub descendants: Vec<NodeId>,
    /// The remaining nodes, ascending.
    pub complement: Vec<NodeId>,
    pub elements: Vec<EdgeElement>,
    /// Element id realized by each descendant assignment (row-major).
    pub element_of_assignment: Vec<u32>,
}

impl EdgeAlphabet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Single-shot bits for this edge.
    pub fn single_shot_bits(&self) -> u64 {
        ceil_log2_pow(self.len() as u64, 1)
    }

    /// Asymptotic bits per instance.
    pub fn rate_bits(&self) -> f64 {
        (self.len() as f64).log2()
    }
}

fn node_sizes(g: &NetworkGraph, nodes: &[NodeId]) -> Vec<u32> {
    nodes.iter().map(|&v| g.alphabet_size(v)).collect()
}

fn check_function_graph(f: &FunctionTable, g: &NetworkGraph) -> Result<()> {
    if f.arity() != g.node_count() {
        return Err(Error::InvalidFunction(format!(
            "function arity {} does not match node count {}",
            f.arity(),
            g.node_count()
        )));
    }
    if f.alphabet_sizes() != g.alphabet_sizes() {
        return Err(Error::InvalidFunction(
            "function alphabets do not match per-node alphabets".into(),
        ));
    }
    Ok(())
}

/// Enumerates the edge alphabet `A_node` for a directed tree (or DAG) edge.
pub fn edge_alphabet(
    f: &FunctionTable,
    g: &NetworkGraph,
    node: NodeId,
    caps: &Caps,
) -> Result<EdgeAlphabet> {
    check_function_graph(f, g)?;
    let desc: Vec<NodeId> = descendant_set(g, node)?.into_iter().collect();
    let compl: Vec<NodeId> = g.nodes().filter(|v| !desc.contains(v)).collect();
    let desc_sizes = node_sizes(g, &desc);
    let compl_sizes = node_sizes(g, &compl);
    caps.check_tuples(&desc_sizes)?;
    caps.check_tuples(&compl_sizes)?;

    let n = g.node_count();
    let mut elements: Vec<EdgeElement> = Vec::new();
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut element_of_assignment = Vec::new();
    let mut full = vec![0u32; n];
    for d_assign in tuples(&desc_sizes) {
        for (v, &x) in desc.iter().zip(&d_assign) {
            full[v.index()] = x;
        }
        let mut values = Vec::new();
        for c_assign in tuples(&compl_sizes) {
            for (v, &x) in compl.iter().zip(&c_assign) {
                full[v.index()] = x;
            }
            values.push(f.eval(&full));
        }
        let next_id = elements.len() as u32;
        let id = *ids.entry(values.clone()).or_insert_with(|| {
            elements.push(EdgeElement {
                values,
                nominal: d_assign.clone(),
            });
            next_id
        });
        element_of_assignment.push(id);
    }
    Ok(EdgeAlphabet {
        node,
        descendants: desc,
        complement: compl,
        elements,
        element_of_assignment,
    })
}

/// A full set of per-node encoders for a directed tree. `Optimal` encoders
/// transmit normal-form element ids; `Custom` tables allow deliberately
/// non-optimal encoders (used to probe the cut condition).
#[derive(Clone, Debug)]
pub struct TreeEncoderSet {
    kind: EncoderKind,
}

#[derive(Clone, Debug)]
enum EncoderKind {
    Optimal(BTreeMap<NodeId, EdgeAlphabet>),
    Custom(BTreeMap<NodeId, CustomEncoder>),
}

/// An arbitrary per-node encoder: a dense table over (own letter, received
/// child outputs), children in ascending node-id order.
#[derive(Clone, Debug)]
pub struct CustomEncoder {
    pub out_size: u32,
    /// Input radices: own alphabet size followed by each child's out size.
    pub in_sizes: Vec<u32>,
    pub table: Vec<u32>,
}

impl TreeEncoderSet {
    /// The normal-form encoders, one edge alphabet per non-collector node.
    pub fn optimal(f: &FunctionTable, g: &NetworkGraph, caps: &Caps) -> Result<Self> {
        if g.kind() != GraphKind::DirectedTree {
            return Err(Error::WrongGraphKind {
                expected: "directed-tree",
                got: g.kind().name(),
            });
        }
        check_function_graph(f, g)?;
        let mut alphabets = BTreeMap::new();
        for v in g.nodes() {
            if v != g.collector() {
                alphabets.insert(v, edge_alphabet(f, g, v, caps)?);
            }
        }
        Ok(TreeEncoderSet {
            kind: EncoderKind::Optimal(alphabets),
        })
    }

    /// Custom encoder tables, keyed by node (every non-collector node needs one).
    pub fn custom(g: &NetworkGraph, encoders: BTreeMap<NodeId, CustomEncoder>) -> Result<Self> {
        for v in g.nodes() {
            if v != g.collector() && !encoders.contains_key(&v) {
                return Err(Error::Invalid(format!("missing encoder for {v}")));
            }
        }
        Ok(TreeEncoderSet {
            kind: EncoderKind::Custom(encoders),
        })
    }

    pub fn alphabets(&self) -> Option<&BTreeMap<NodeId, EdgeAlphabet>> {
        match &self.kind {
            EncoderKind::Optimal(a) => Some(a),
            EncoderKind::Custom(_) => None,
        }
    }

    /// Output alphabet size of the edge leaving `v`.
    pub fn out_size(&self, v: NodeId) -> u64 {
        match &self.kind {
            EncoderKind::Optimal(a) => a[&v].len() as u64,
            EncoderKind::Custom(c) => c[&v].out_size as u64,
        }
    }

    /// Evaluates every edge output for one full assignment, bottom-up.
    /// Returns the transmitted symbol per non-collector node.
    pub fn edge_outputs(
        &self,
        f: &FunctionTable,
        g: &NetworkGraph,
        assignment: &[u32],
    ) -> BTreeMap<NodeId, u32> {
        let mut out = BTreeMap::new();
        let order = upward_order(g);
        for &v in &order {
            if v == g.collector() {
                continue;
            }
            let symbol = match &self.kind {
                EncoderKind::Optimal(alphabets) => {
                    let alpha = &alphabets[&v];
                    // assemble the descendant assignment from nominal values of
                    // the children plus the node's own letter
                    let mut d_assign: BTreeMap<NodeId, u32> = BTreeMap::new();
                    d_assign.insert(v, assignment[v.index()]);
                    for c in g.in_neighbors(v) {
                        let child_alpha = &alphabets[&c];
                        let elem = &child_alpha.elements[out[&c] as usize];
                        for (w, &x) in child_alpha.descendants.iter().zip(&elem.nominal) {
                            d_assign.insert(*w, x);
                        }
                    }
                    let tuple: Vec<u32> =
                        alpha.descendants.iter().map(|w| d_assign[w]).collect();
                    let sizes = node_sizes(g, &alpha.descendants);
                    alpha.element_of_assignment[tuple_index(&sizes, &tuple)]
                }
                EncoderKind::Custom(encoders) => {
                    let enc = &encoders[&v];
                    let mut inputs = vec![assignment[v.index()]];
                    for c in g.in_neighbors(v) {
                        inputs.push(out[&c]);
                    }
                    enc.table[tuple_index(&enc.in_sizes, &inputs)]
                }
            };
            out.insert(v, symbol);
        }
        let _ = f;
        out
    }
}

/// Nodes ordered by height: leaves first, collector last.
fn upward_order(g: &NetworkGraph) -> Vec<NodeId> {
    let mut height = vec![0usize; g.node_count()];
    let mut order: Vec<NodeId> = g.nodes().collect();
    // heights via repeated relaxation; trees are tiny
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in g.edges() {
            if height[b.index()] < height[a.index()] + 1 {
                height[b.index()] = height[a.index()] + 1;
                changed = true;
            }
        }
    }
    order.sort_by_key(|v| (height[v.index()], v.0));
    order
}

/// The result of computing one block on a directed tree.
#[derive(Clone, Debug)]
pub struct TreeComputation {
    pub decoded: Vec<u32>,
    pub transcript: ProtocolTranscript,
    /// Per edge: (child, parent, element-id sequence).
    pub edge_symbols: BTreeMap<NodeId, Vec<u32>>,
}

/// Runs the bottom-up block computation with optimal encoders and decodes at
/// the collector by nominal substitution.
pub fn run_tree_computation(
    f: &FunctionTable,
    g: &NetworkGraph,
    enc: &TreeEncoderSet,
    block: &Block,
) -> Result<TreeComputation> {
    let alphabets = enc.alphabets().ok_or_else(|| {
        Error::Invalid("block computation requires optimal (normal-form) encoders".into())
    })?;
    block.validate_against(g.alphabet_sizes())?;
    let n = block.len();
    let mut transcript = ProtocolTranscript::new(n);
    let mut edge_symbols: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();

    // per-instance upward pass
    let mut outputs: Vec<BTreeMap<NodeId, u32>> = Vec::with_capacity(n);
    for t in 0..n {
        outputs.push(enc.edge_outputs(f, g, &block.instance(t)));
    }
    for v in g.nodes() {
        if v == g.collector() {
            continue;
        }
        let seq: Vec<u32> = outputs.iter().map(|o| o[&v]).collect();
        let bits = pack_base_k(&seq, alphabets[&v].len() as u64);
        transcript.push(v, g.parent(v).expect("non-collector has a parent"), bits);
        edge_symbols.insert(v, seq);
    }

    // decode at the collector: substitute nominal values for every child
    let root = g.collector();
    let mut decoded = Vec::with_capacity(n);
    for (t, out) in outputs.iter().enumerate() {
        let mut full: Vec<u32> = vec![0; g.node_count()];
        full[root.index()] = block.seq(root)[t];
        for c in g.in_neighbors(root) {
            let alpha = &alphabets[&c];
            let elem = &alpha.elements[out[&c] as usize];
            for (w, &x) in alpha.descendants.iter().zip(&elem.nominal) {
                full[w.index()] = x;
            }
        }
        decoded.push(f.eval(&full));
    }
    Ok(TreeComputation {
        decoded,
        transcript,
        edge_symbols,
    })
}

/// One violated cut: a pair of side-S assignments that some supported
/// complement assignment distinguishes, with no separating crossing edge.
#[derive(Clone, Debug)]
pub struct CutViolation {
    pub cut: Cut,
    pub assignment_a: Vec<u32>,
    pub assignment_b: Vec<u32>,
}

/// Checks, cut by cut, that some crossing edge separates every pair of
/// side-S assignments that the function distinguishes under a supported
/// complement assignment. Optimal encoders under full support never violate
/// it; degenerate supports may admit cheaper coupled encoders, which this
/// check probes but does not synthesize.
pub fn tree_cut_feasibility_check(
    f: &FunctionTable,
    g: &NetworkGraph,
    enc: &TreeEncoderSet,
    p: &JointDistribution,
    caps: &Caps,
) -> Result<Vec<CutViolation>> {
    if g.kind() != GraphKind::DirectedTree {
        return Err(Error::WrongGraphKind {
            expected: "directed-tree",
            got: g.kind().name(),
        });
    }
    check_function_graph(f, g)?;
    if !p.matches(f) {
        return Err(Error::InvalidDistribution(
            "distribution shape does not match the function".into(),
        ));
    }
    let sizes = g.alphabet_sizes().to_vec();
    caps.check_tuples(&sizes)?;
    // memoize edge outputs per full assignment
    let all: Vec<Vec<u32>> = tuples(&sizes).collect();
    let outputs: Vec<BTreeMap<NodeId, u32>> = all
        .iter()
        .map(|a| enc.edge_outputs(f, g, a))
        .collect();
    let index_of = |a: &[u32]| tuple_index(&sizes, a);

    let mut violations = Vec::new();
    for cut in enumerate_cuts_capped(g, g.collector(), caps.cut_nodes)? {
        let s_nodes = cut.inside.clone();
        let c_nodes: Vec<NodeId> = g.nodes().filter(|v| !cut.contains(*v)).collect();
        let s_sizes = node_sizes(g, &s_nodes);
        let c_sizes = node_sizes(g, &c_nodes);
        let mut violated: Option<(Vec<u32>, Vec<u32>)> = None;
        'pairs: for xa in tuples(&s_sizes) {
            for xb in tuples(&s_sizes) {
                if xa >= xb {
                    continue;
                }
                for xc in tuples(&c_sizes) {
                    let mut full_a = vec![0u32; g.node_count()];
                    let mut full_b = vec![0u32; g.node_count()];
                    for (v, &x) in s_nodes.iter().zip(&xa) {
                        full_a[v.index()] = x;
                    }
                    for (v, &x) in s_nodes.iter().zip(&xb) {
                        full_b[v.index()] = x;
                    }
                    for (v, &x) in c_nodes.iter().zip(&xc) {
                        full_a[v.index()] = x;
                        full_b[v.index()] = x;
                    }
                    if f.eval(&full_a) == f.eval(&full_b) {
                        continue;
                    }
                    if p.prob(&full_a).is_zero() || p.prob(&full_b).is_zero() {
                        continue;
                    }
                    let oa = &outputs[index_of(&full_a)];
                    let ob = &outputs[index_of(&full_b)];
                    let separated = cut
                        .crossing
                        .iter()
                        .any(|&(from, _)| oa[&from] != ob[&from]);
                    if !separated {
                        violated = Some((full_a, full_b));
                        break 'pairs;
                    }
                }
            }
        }
        if let Some((a, b)) = violated {
            violations.push(CutViolation {
                cut,
                assignment_a: a,
                assignment_b: b,
            });
        }
    }
    Ok(violations)
}

/// Average-case rates for a strictly positive distribution: per edge, the
/// induced element distribution, its entropy, and a single-shot Huffman code.
#[derive(Clone, Debug)]
pub struct EdgeAverageRate {
    pub node: NodeId,
    pub parent: NodeId,
    pub alphabet_size: u64,
    pub element_probs: Vec<BigRational>,
    pub entropy_bits: f64,
    pub huffman_expected_len: BigRational,
}

pub fn tree_average_rates(
    f: &FunctionTable,
    g: &NetworkGraph,
    p: &JointDistribution,
    caps: &Caps,
) -> Result<Vec<EdgeAverageRate>> {
    if g.kind() != GraphKind::DirectedTree {
        return Err(Error::WrongGraphKind {
            expected: "directed-tree",
            got: g.kind().name(),
        });
    }
    check_function_graph(f, g)?;
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
    let mut out = Vec::new();
    for v in g.nodes() {
        if v == g.collector() {
            continue;
        }
        let alpha = edge_alphabet(f, g, v, caps)?;
        let desc_sizes = node_sizes(g, &alpha.descendants);
        let mut probs = vec![BigRational::zero(); alpha.len()];
        for full in tuples(&sizes) {
            let d_tuple: Vec<u32> = alpha
                .descendants
                .iter()
                .map(|w| full[w.index()])
                .collect();
            let id = alpha.element_of_assignment[tuple_index(&desc_sizes, &d_tuple)];
            probs[id as usize] += p.prob(&full);
        }
        let huffman = PrefixCodebook::huffman(&probs)?;
        out.push(EdgeAverageRate {
            node: v,
            parent: g.parent(v).expect("non-collector has a parent"),
            alphabet_size: alpha.len() as u64,
            entropy_bits: entropy_bits(&probs),
            huffman_expected_len: huffman.expected_length(&probs),
            element_probs: probs,
        });
    }
    Ok(out)
}
