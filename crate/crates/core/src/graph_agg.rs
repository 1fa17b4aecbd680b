//! Sum-threshold computation on general undirected graphs: cut-set lower
//! bounds, star aggregation on complete graphs with its tight 2(1 - 1/n)
//! ratio, a time-sharing simulation, and the exact-rational tradeoff LP.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{
    enumerate_cuts_capped, Block, Caps, Cut, GraphKind, NetworkGraph, NodeId, RateVector,
};
use crate::simplex::{rational_from_f64, solve, ConstraintOp, LinearProgram, LpOutcome};
use crate::transcript::ProtocolTranscript;
use crate::tree_protocol::{edge_complexities, run_tree_protocol, threshold_cut_coding_size};

/// Lower bound on the bits crossing one cut (both directions counted).
#[derive(Clone, Debug)]
pub struct GraphCutBound {
    pub cut: Cut,
    pub side_capacity: u32,
    pub min_side_capacity: u32,
    pub coding_size: u64,
    pub bound_bits: f64,
}

fn require_undirected(g: &NetworkGraph) -> Result<()> {
    if g.kind().is_directed() {
        return Err(Error::WrongGraphKind {
            expected: "undirected",
            got: g.kind().name(),
        });
    }
    Ok(())
}

/// One bound per bipartition: bits across the crossing edges are at least
/// `log2 min(2 theta + 1, 2 m_F + 2, 2 (l_V - theta + 1) + 1)`.
pub fn graph_cut_bounds(g: &NetworkGraph, theta: u32, caps: &Caps) -> Result<Vec<GraphCutBound>> {
    require_undirected(g)?;
    let caps_vec = g.capacities();
    let total: u32 = caps_vec.iter().sum();
    if theta > total + 1 {
        return Err(Error::ThresholdOutOfRange {
            theta,
            max: total + 1,
        });
    }
    let mut out = Vec::new();
    for cut in enumerate_cuts_capped(g, NodeId(1), caps.cut_nodes)? {
        let side: u32 = cut.inside.iter().map(|v| caps_vec[v.index()]).sum();
        let m_f = side.min(total - side);
        let coding = threshold_cut_coding_size(theta, side, total - side);
        out.push(GraphCutBound {
            cut,
            side_capacity: side,
            min_side_capacity: m_f,
            coding_size: coding,
            bound_bits: (coding as f64).log2(),
        });
    }
    Ok(out)
}

/// The minimum symmetric rate satisfying every cut constraint:
/// `max over cuts of bound / |F|`.
pub fn symmetric_cut_rate(bounds: &[GraphCutBound]) -> f64 {
    bounds
        .iter()
        .filter(|b| !b.cut.crossing.is_empty())
        .map(|b| b.bound_bits / b.cut.crossing.len() as f64)
        .fold(0.0, f64::max)
}

/// Rate vectors with exact rational entries, for LP certificates. Building
/// them divides rationalized logs exactly instead of rounding in f64.
pub type ExactRates = BTreeMap<(NodeId, NodeId), BigRational>;

pub fn exact_rates_from_f64(r: &RateVector) -> ExactRates {
    r.entries()
        .map(|(e, v)| (e, rational_from_f64(v)))
        .collect()
}

/// Exact form of `symmetric_cut_rate`: the binding bound's bits are
/// rationalized once and divided by the crossing count exactly.
pub fn symmetric_cut_rate_exact(bounds: &[GraphCutBound]) -> BigRational {
    bounds
        .iter()
        .filter(|b| !b.cut.crossing.is_empty())
        .map(|b| {
            rational_from_f64(b.bound_bits)
                / BigRational::from_integer((b.cut.crossing.len() as u64).into())
        })
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// Star aggregation on a complete graph: time-share the n stars equally.
#[derive(Clone, Debug)]
pub struct StarRates {
    pub per_edge: RateVector,
    /// Same rates with the division by n done exactly.
    pub per_edge_exact: ExactRates,
    /// Maximum per-edge rate: the symmetric achievable point.
    pub r_ach: f64,
    /// Leaf-edge complexity per node (bits of the two-node reduction
    /// `({i}, V \ {i})`).
    pub leaf_bits: Vec<f64>,
    pub leaf_coding_sizes: Vec<u64>,
}

pub fn star_aggregation_rates(g: &NetworkGraph, theta: u32) -> Result<StarRates> {
    require_undirected(g)?;
    if !g.is_complete() {
        return Err(Error::WrongGraphKind {
            expected: "complete",
            got: "incomplete graph (supply explicit spanning trees instead)",
        });
    }
    let caps_vec = g.capacities();
    let total: u32 = caps_vec.iter().sum();
    if theta > total + 1 {
        return Err(Error::ThresholdOutOfRange {
            theta,
            max: total + 1,
        });
    }
    let n = g.node_count();
    let leaf_coding_sizes: Vec<u64> = g
        .nodes()
        .map(|v| {
            let l = caps_vec[v.index()];
            threshold_cut_coding_size(theta, l, total - l)
        })
        .collect();
    let leaf_bits: Vec<f64> = leaf_coding_sizes
        .iter()
        .map(|&m| (m as f64).log2())
        .collect();
    let mut per_edge = RateVector::new();
    let mut per_edge_exact = ExactRates::new();
    let big_n = BigRational::from_integer((n as u64).into());
    for &(a, b) in g.edges() {
        let rate = (leaf_bits[a.index()] + leaf_bits[b.index()]) / n as f64;
        per_edge.set((a, b), rate)?;
        let exact = (rational_from_f64(leaf_bits[a.index()])
            + rational_from_f64(leaf_bits[b.index()]))
            / &big_n;
        per_edge_exact.insert((a, b), exact);
    }
    let r_ach = per_edge.max_rate();
    Ok(StarRates {
        per_edge,
        per_edge_exact,
        r_ach,
        leaf_bits,
        leaf_coding_sizes,
    })
}

/// The ratio between the symmetric star-aggregation point and the symmetric
/// cut bound. At most `2 (1 - 1/n)`, with equality on the uniform example.
#[derive(Clone, Debug)]
pub struct RatioReport {
    pub r_ach: f64,
    pub r_cut: f64,
    pub ratio: f64,
    /// Exact ratio `2(n-1)/n` when the closed forms cancel (uniform
    /// capacities with a common leaf coding size).
    pub exact_ratio: Option<(u64, u64)>,
}

pub fn ratio_check(g: &NetworkGraph, theta: u32, caps: &Caps) -> Result<RatioReport> {
    let stars = star_aggregation_rates(g, theta)?;
    let bounds = graph_cut_bounds(g, theta, caps)?;
    let r_cut = symmetric_cut_rate(&bounds);
    let n = g.node_count() as u64;
    // uniform case: every leaf edge shares one coding size and the binding
    // cut is a single-node cut, so the log factors cancel exactly
    let uniform = stars
        .leaf_coding_sizes
        .windows(2)
        .all(|w| w[0] == w[1]);
    let single_node_rate = stars.leaf_bits[0] / (g.node_count() as f64 - 1.0);
    let exact_ratio = if uniform && (r_cut - single_node_rate).abs() <= 1e-12 {
        let (mut a, mut b) = (2 * (n - 1), n);
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        a /= x;
        b /= x;
        Some((a, b))
    } else {
        None
    };
    Ok(RatioReport {
        r_ach: stars.r_ach,
        r_cut,
        ratio: stars.r_ach / r_cut,
        exact_ratio,
    })
}

/// A spanning-subtree aggregation scheme: per-edge bits of the optimal
/// protocol on that subtree, zero elsewhere.
#[derive(Clone, Debug)]
pub struct TreeScheme {
    pub label: String,
    pub tree_edges: Vec<(u32, u32)>,
    pub per_edge_bits: BTreeMap<(NodeId, NodeId), f64>,
}

impl TreeScheme {
    /// Builds the scheme for an explicit spanning tree of `g`.
    pub fn from_tree(g: &NetworkGraph, tree_edges: &[(u32, u32)], theta: u32, label: String) -> Result<Self> {
        require_undirected(g)?;
        for &(a, b) in tree_edges {
            if !g.has_undirected_edge(NodeId(a), NodeId(b)) {
                return Err(Error::InvalidGraph(format!(
                    "scheme edge ({a}, {b}) is not an edge of the graph"
                )));
            }
        }
        let tree = NetworkGraph::new(
            GraphKind::UndirectedTree,
            g.node_count(),
            tree_edges,
            g.alphabet_sizes(),
            None,
        )?;
        let mut per_edge_bits = BTreeMap::new();
        for p in edge_complexities(&tree, theta)? {
            per_edge_bits.insert(p.edge, p.complexity_bits);
        }
        Ok(TreeScheme {
            label,
            tree_edges: tree_edges.to_vec(),
            per_edge_bits,
        })
    }

    pub fn bits_on(&self, edge: (NodeId, NodeId)) -> f64 {
        self.per_edge_bits.get(&edge).copied().unwrap_or(0.0)
    }

    fn tree(&self, g: &NetworkGraph) -> Result<NetworkGraph> {
        NetworkGraph::new(
            GraphKind::UndirectedTree,
            g.node_count(),
            &self.tree_edges,
            g.alphabet_sizes(),
            None,
        )
    }
}

/// The n star schemes of a complete graph, in center order.
pub fn star_schemes(g: &NetworkGraph, theta: u32) -> Result<Vec<TreeScheme>> {
    require_undirected(g)?;
    if !g.is_complete() {
        return Err(Error::WrongGraphKind {
            expected: "complete",
            got: "incomplete graph",
        });
    }
    g.nodes()
        .map(|center| {
            let edges: Vec<(u32, u32)> = g
                .nodes()
                .filter(|&v| v != center)
                .map(|v| (center.0.min(v.0), center.0.max(v.0)))
                .collect();
            TreeScheme::from_tree(g, &edges, theta, format!("star-{center}"))
        })
        .collect()
}

/// Exact solution of the tree-tradeoff program: minimize the factor t such
/// that some convex time-sharing of the schemes fits inside `t * r`.
#[derive(Clone, Debug)]
pub struct TradeoffSolution {
    pub t_star: BigRational,
    pub t_star_f64: f64,
    pub lambda: Vec<BigRational>,
    pub lambda_f64: Vec<f64>,
    pub lambda_l1: BigRational,
    /// Exact certificate: `A lambda <= t r` holds in rational arithmetic.
    pub certificate_ok: bool,
}

pub fn tradeoff_lp(
    g: &NetworkGraph,
    schemes: &[TreeScheme],
    r: &RateVector,
) -> Result<TradeoffSolution> {
    tradeoff_lp_exact(g, schemes, &exact_rates_from_f64(r))
}

pub fn tradeoff_lp_exact(
    g: &NetworkGraph,
    schemes: &[TreeScheme],
    r: &ExactRates,
) -> Result<TradeoffSolution> {
    require_undirected(g)?;
    if schemes.is_empty() {
        return Err(Error::Invalid("scheme set must be non-empty".into()));
    }
    let edges = g.edges();
    let s = schemes.len();
    // variables: lambda_1..lambda_s, then t
    let mut constraints = Vec::new();
    let a: Vec<Vec<BigRational>> = edges
        .iter()
        .map(|&e| {
            schemes
                .iter()
                .map(|sch| rational_from_f64(sch.bits_on(e)))
                .collect()
        })
        .collect();
    let r_exact: Vec<BigRational> = edges
        .iter()
        .map(|&e| r.get(&e).cloned().unwrap_or_else(BigRational::zero))
        .collect();
    for (row, re) in a.iter().zip(&r_exact) {
        let mut coeffs = row.clone();
        coeffs.push(-re.clone());
        constraints.push((coeffs, ConstraintOp::Le, BigRational::zero()));
    }
    let mut ones = vec![BigRational::one(); s];
    ones.push(BigRational::zero());
    constraints.push((ones, ConstraintOp::Ge, BigRational::one()));
    let mut objective = vec![BigRational::zero(); s];
    objective.push(BigRational::one());
    let lp = LinearProgram {
        num_vars: s + 1,
        objective,
        constraints,
    };
    match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            let lambda = x[..s].to_vec();
            let t_star = x[s].clone();
            let lambda_l1: BigRational = lambda.iter().sum();
            let certificate_ok = a.iter().zip(&r_exact).all(|(row, re)| {
                let lhs: BigRational =
                    row.iter().zip(&lambda).map(|(c, l)| c * l).sum();
                lhs <= &t_star * re
            }) && lambda_l1 >= BigRational::one()
                && lambda.iter().all(|l| *l >= BigRational::zero());
            Ok(TradeoffSolution {
                t_star_f64: t_star.to_f64().unwrap(),
                t_star,
                lambda_f64: lambda.iter().map(|l| l.to_f64().unwrap()).collect(),
                lambda,
                lambda_l1,
                certificate_ok,
            })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible(
            "no time-sharing fits any multiple of the target rate \
             (a needed edge has rate zero)"
                .into(),
        )),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}

/// Result of time-sharing several tree schemes over one block.
#[derive(Clone, Debug)]
pub struct MixtureRun {
    pub transcript: ProtocolTranscript,
    pub measured: RateVector,
    pub decoded: Vec<Vec<u8>>,
    /// Predicted mixture rate per edge plus per-scheme ceiling slack.
    pub predicted_with_slack: RateVector,
}

/// Splits the block across schemes proportionally to `lambda`
/// (largest-remainder), runs the optimal tree protocol on each subtree, and
/// sums per-edge bits. Every node decodes its full block.
pub fn tree_scheme_simulation(
    g: &NetworkGraph,
    theta: u32,
    schemes: &[TreeScheme],
    lambda: &[f64],
    block: &Block,
) -> Result<MixtureRun> {
    require_undirected(g)?;
    if schemes.len() != lambda.len() || schemes.is_empty() {
        return Err(Error::Invalid("one weight per scheme".into()));
    }
    if lambda.iter().any(|&l| l < 0.0) {
        return Err(Error::Invalid("weights must be non-negative".into()));
    }
    let total_weight: f64 = lambda.iter().sum();
    if (total_weight - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("weights must sum to 1".into()));
    }
    block.validate_against(g.alphabet_sizes())?;
    let n = block.len();
    // largest-remainder apportionment of instances to schemes
    let mut counts: Vec<usize> = lambda.iter().map(|&l| (l * n as f64).floor() as usize).collect();
    let mut remainder: Vec<(f64, usize)> = lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| (l * n as f64 - counts[i] as f64, i))
        .collect();
    remainder.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut assigned: usize = counts.iter().sum();
    let mut i = 0;
    while assigned < n {
        counts[remainder[i].1] += 1;
        assigned += 1;
        i = (i + 1) % remainder.len();
    }

    let n_nodes = g.node_count();
    let mut transcript = ProtocolTranscript::new(n);
    let mut decoded: Vec<Vec<u8>> = vec![vec![0; n]; n_nodes];
    let mut measured = RateVector::new();
    for &e in g.edges() {
        measured.set(e, 0.0)?;
    }
    let mut start = 0usize;
    for (scheme, &count) in schemes.iter().zip(&counts) {
        let seg = start..start + count;
        start += count;
        if count == 0 {
            continue;
        }
        let tree = scheme.tree(g)?;
        let sub = Block::new(
            (0..n_nodes)
                .map(|i| block.seq(NodeId::from_index(i))[seg.clone()].to_vec())
                .collect(),
        )?;
        let root = crate::tree_protocol::centroid(&tree)?;
        let run = run_tree_protocol(&tree, theta, root, &sub)?;
        for m in &run.transcript.messages {
            transcript.push(m.from, m.to, m.bits.clone());
        }
        for (dec, sub_dec) in decoded.iter_mut().zip(&run.decoded) {
            for (off, t) in seg.clone().enumerate() {
                dec[t] = sub_dec[off];
            }
        }
        for e in &run.edges {
            let key = (e.child.min(e.parent), e.child.max(e.parent));
            measured.add(key, (e.up_bits + e.down_bits) as f64 / n as f64);
        }
    }
    // prediction: mixture of per-edge complexities, one ceiling bit of slack
    // per scheme that actually ran
    let active = counts.iter().filter(|&&c| c > 0).count() as f64;
    let mut predicted = RateVector::new();
    for &e in g.edges() {
        let mix: f64 = schemes
            .iter()
            .zip(lambda)
            .map(|(s, &l)| l * s.bits_on(e))
            .sum();
        predicted.set(e, mix + active / n as f64)?;
    }
    Ok(MixtureRun {
        transcript,
        measured,
        decoded,
        predicted_with_slack: predicted,
    })
}
