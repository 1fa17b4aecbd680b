//! The built-in verification suite: every headline result reproduced at desk
//! scale, one pass/fail line each. A deliberate theta offset can be injected
//! to demonstrate that the checks actually bite.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use infunc_core::codebook::{entropy, PrefixCodebook};
use infunc_core::dag::{
    check_rate_point, dag_outer_bound, dag_outer_bound_avg, simulate_split_aggregation, FoldOp,
    tree_achievable_points,
};
use infunc_core::graph_agg::{
    graph_cut_bounds, ratio_check, star_schemes, symmetric_cut_rate_exact, tradeoff_lp_exact,
    ExactRates,
};
use infunc_core::interactive::{
    and_protocol, fooling_bound_threshold, interval_bounds, run_threshold_protocol,
    threshold_coding_size, IntervalSpec, Speaker, ThresholdSpec,
};
use infunc_core::model::{
    Block, Caps, FunctionTable, GraphKind, JointDistribution, NetworkGraph, NodeId,
};
use infunc_core::tree_code::{
    edge_alphabet, run_tree_computation, tree_cut_feasibility_check, CustomEncoder,
    TreeEncoderSet,
};
use infunc_core::tree_protocol::{edge_complexities, run_tree_protocol};
use infunc_core::util::tuples;
use infunc_core::RATE_TOLERANCE;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

fn check(name: &str, passed: bool, details: String) -> SuiteCheck {
    SuiteCheck {
        name: name.to_string(),
        passed,
        details,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RATE_TOLERANCE
}

/// Runs the whole suite. `inject_theta_offset` shifts the threshold used by
/// the protocol inside the sum-threshold check, so a nonzero offset makes
/// exactly that check fail.
pub fn run_suite(inject_theta_offset: i32) -> Vec<SuiteCheck> {
    let caps = Caps::default();
    vec![
        and_exact_complexity(),
        threshold_complexity_check(inject_theta_offset),
        interval_bounds_check(),
        coupled_encoders_example(&caps),
        directed_tree_mod4_star(&caps),
        arithmetic_sum_worst_case(&caps),
        arithmetic_sum_average_case(&caps),
        arithmetic_sum_tree_family(&caps),
        mod4_dag_tree_points(&caps),
        parity_split_tightness(&caps),
        maxmin_split(&caps),
        tree_threshold_edges(),
        tree_nonbinary_edges(),
        complete_graph_ratio(&caps),
        lp_tight_case(&caps),
        huffman_average_case(),
    ]
}

/// AND of two bits costs exactly log2(3) per instance: ceil(N log2 3) worst
/// case over every block, certified by a fooling set of 3 columns.
fn and_exact_complexity() -> SuiteCheck {
    let spec = ThresholdSpec::new(1, 1, 2).unwrap();
    let mut ok = threshold_coding_size(&spec) == 3;
    // N = 1 worst case: 2 bits
    let single = and_protocol(&[1], &[0]).unwrap();
    ok &= single.total_bits == 2;
    // exhaustive N = 4: every block totals exactly ceil(4 log2 3) = 7
    let mut max_total = 0;
    for x1 in tuples(&[2, 2, 2, 2]) {
        for x2 in tuples(&[2, 2, 2, 2]) {
            let out = and_protocol(&x1, &x2).unwrap();
            ok &= (0..4).all(|t| out.decoded_node1[t] == (x1[t] & x2[t]) as u8);
            max_total = max_total.max(out.total_bits);
        }
    }
    ok &= max_total == 7;
    let fooling = fooling_bound_threshold(&spec);
    ok &= fooling.verified && fooling.size() == 3;
    check(
        "and-exact-complexity",
        ok,
        format!("worst-case total {max_total}/4 instances, fooling 3^N"),
    )
}

fn threshold_complexity_check(inject_theta_offset: i32) -> SuiteCheck {
    // m1 = m2 = 1, theta = 2 recovers the AND complexity log2(3)
    let and_spec = ThresholdSpec::new(1, 1, 2).unwrap();
    let mut ok = threshold_coding_size(&and_spec) == 3;
    let mut details = String::from("min(2t+1, 2m1+2, 2(n-t+1)+1) verified");
    for &(m1, m2, theta) in &[(1u32, 1u32, 2u32), (3, 3, 2), (2, 5, 4), (4, 4, 6)] {
        let spec = ThresholdSpec::new(m1, m2, theta).unwrap();
        let formula = threshold_coding_size(&spec);
        // run the protocol at a possibly injected wrong threshold
        let run_theta = (theta as i64 + inject_theta_offset as i64).max(0) as u32;
        let run_spec = match ThresholdSpec::new(m1, m2, run_theta) {
            Ok(s) => s,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let n = 64usize;
        let block = Block::random(&[m1 + 1, m2 + 1], n, 7);
        let out = run_threshold_protocol(&run_spec, block.seq(NodeId(1)), block.seq(NodeId(2)), Speaker::Node1)
            .unwrap();
        let zero_error = (0..n).all(|t| {
            out.decoded_node1[t] == u8::from(block.seq(NodeId(1))[t] + block.seq(NodeId(2))[t] >= theta)
        });
        let within = out.total_bits
            <= infunc_core::interactive::worst_case_total(formula, n as u64);
        let fooling = fooling_bound_threshold(&spec);
        ok &= zero_error && within && fooling.verified && fooling.size() == formula;
        if !(zero_error && within) {
            details = format!("spec ({m1},{m2},{theta}) failed at run theta {run_theta}");
        }
    }
    check("sum-threshold-theorem", ok, details)
}

fn interval_bounds_check() -> SuiteCheck {
    let mut ok = true;
    let mut worst_gap: f64 = 0.0;
    for m1 in 1..=4u32 {
        for m2 in m1..=4u32 {
            for b in 0..=(m1 + m2) / 2 {
                for a in 0..=b {
                    let spec = IntervalSpec::new(m1, m2, a, b).unwrap();
                    let bounds = interval_bounds(&spec);
                    ok &= bounds.fooling.verified;
                    let gap = bounds.upper_bits - bounds.lower_bits;
                    ok &= (-RATE_TOLERANCE..=1.0 + RATE_TOLERANCE).contains(&gap);
                    worst_gap = worst_gap.max(gap);
                }
            }
        }
    }
    check(
        "sum-interval-theorem",
        ok,
        format!("bounds within one bit everywhere (worst gap {worst_gap:.4})"),
    )
}

/// Identity function, singleton root alphabet, support on two assignments:
/// with both leaves constant the cut ({v2, v3}, {v1}) is violated; letting
/// one leaf separate restores feasibility.
fn coupled_encoders_example(caps: &Caps) -> SuiteCheck {
    let f = FunctionTable::from_fn(&[1, 2, 2], 4, |t| t[1] * 2 + t[2]).unwrap();
    let g = NetworkGraph::new(
        GraphKind::DirectedTree,
        3,
        &[(2, 1), (3, 1)],
        &[1, 2, 2],
        Some(1),
    )
    .unwrap();
    let half = BigRational::new(1.into(), 2.into());
    let zero = BigRational::from_integer(0.into());
    let p = JointDistribution::new(&[1, 2, 2], vec![half.clone(), zero.clone(), zero, half])
        .unwrap();
    let constant = CustomEncoder {
        out_size: 1,
        in_sizes: vec![2],
        table: vec![0, 0],
    };
    let separating = CustomEncoder {
        out_size: 2,
        in_sizes: vec![2],
        table: vec![0, 1],
    };
    let mut both = BTreeMap::new();
    both.insert(NodeId(2), constant.clone());
    both.insert(NodeId(3), constant.clone());
    let both = TreeEncoderSet::custom(&g, both).unwrap();
    let violations = tree_cut_feasibility_check(&f, &g, &both, &p, caps).unwrap();
    let mut ok = violations.len() == 1
        && violations[0].cut.inside == vec![NodeId(2), NodeId(3)];
    let mut one_sep = BTreeMap::new();
    one_sep.insert(NodeId(2), separating);
    one_sep.insert(NodeId(3), constant);
    let one_sep = TreeEncoderSet::custom(&g, one_sep).unwrap();
    ok &= tree_cut_feasibility_check(&f, &g, &one_sep, &p, caps)
        .unwrap()
        .is_empty();
    check(
        "coupled-encoders-cut-condition",
        ok,
        "one of the two leaves must separate its letters".into(),
    )
}

fn directed_tree_mod4_star(caps: &Caps) -> SuiteCheck {
    let f = FunctionTable::parity(&[4, 4, 4], 4).unwrap();
    let g = NetworkGraph::new(
        GraphKind::DirectedTree,
        3,
        &[(2, 1), (3, 1)],
        &[4, 4, 4],
        Some(1),
    )
    .unwrap();
    let mut ok = true;
    for v in [NodeId(2), NodeId(3)] {
        let alpha = edge_alphabet(&f, &g, v, caps).unwrap();
        ok &= alpha.len() == 4 && alpha.single_shot_bits() == 2;
    }
    let enc = TreeEncoderSet::optimal(&f, &g, caps).unwrap();
    for t in tuples(&[4, 4, 4]) {
        let block = Block::new(t.iter().map(|&x| vec![x]).collect()).unwrap();
        let run = run_tree_computation(&f, &g, &enc, &block).unwrap();
        ok &= run.decoded == block.eval_function(&f);
    }
    check(
        "directed-tree-normal-forms",
        ok,
        "mod-4 star: |A_i| = 4, 2 bits per edge, exhaustive zero error".into(),
    )
}

fn arithmetic_sum() -> (FunctionTable, NetworkGraph) {
    let f = FunctionTable::sum_of(&[1, 2, 2]).unwrap();
    let g = NetworkGraph::new(
        GraphKind::Dag,
        3,
        &[(2, 1), (3, 1), (3, 2)],
        &[1, 2, 2],
        Some(1),
    )
    .unwrap();
    (f, g)
}

fn arithmetic_sum_worst_case(caps: &Caps) -> SuiteCheck {
    let (f, g) = arithmetic_sum();
    let bounds = dag_outer_bound(&f, &g, caps).unwrap();
    let get = |inside: &[u32]| {
        let want: Vec<NodeId> = inside.iter().map(|&i| NodeId(i)).collect();
        bounds.iter().find(|b| b.cut.inside == want).unwrap()
    };
    let ok = get(&[2]).class_count == 2
        && get(&[3]).class_count == 2
        && get(&[2, 3]).class_count == 3;
    check(
        "arithmetic-sum-outer-bound",
        ok,
        "R21 >= 1, R21 + R31 >= log2(3), R32 + R31 >= 1".into(),
    )
}

fn arithmetic_sum_average_case(caps: &Caps) -> SuiteCheck {
    let (f, g) = arithmetic_sum();
    let p = JointDistribution::uniform(&[1, 2, 2]);
    let bounds = dag_outer_bound_avg(&f, &g, &p, caps).unwrap();
    let get = |inside: &[u32]| {
        let want: Vec<NodeId> = inside.iter().map(|&i| NodeId(i)).collect();
        bounds.iter().find(|b| b.cut.inside == want).unwrap()
    };
    let ok = close(get(&[2]).bound_bits, 1.0)
        && close(get(&[3]).bound_bits, 1.0)
        && close(get(&[2, 3]).bound_bits, 1.5);
    check(
        "arithmetic-sum-average-bound",
        ok,
        "uniform i.i.d.: R21 >= 1, R21 + R31 >= 3/2, R32 + R31 >= 1".into(),
    )
}

fn arithmetic_sum_tree_family(caps: &Caps) -> SuiteCheck {
    let (f, g) = arithmetic_sum();
    let e21 = (NodeId(2), NodeId(1));
    let e31 = (NodeId(3), NodeId(1));
    let e32 = (NodeId(3), NodeId(2));
    let tuple = |rates: &infunc_core::RateVector| {
        (
            rates.rate_or_zero(e21),
            rates.rate_or_zero(e31),
            rates.rate_or_zero(e32),
        )
    };
    let mut points: Vec<_> = tree_achievable_points(&f, &g, None, caps)
        .unwrap()
        .iter()
        .map(|p| tuple(&p.rates))
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let log3 = 3f64.log2();
    let mut ok = points.len() == 2
        && points[0] == (1.0, 1.0, 0.0)
        && close(points[1].0, log3)
        && points[1].1 == 0.0
        && points[1].2 == 1.0;
    // lambda-mixtures trace (lambda + (1 - lambda) log2(3), lambda, 1 - lambda)
    for k in 0..=4 {
        let lambda = k as f64 / 4.0;
        let mix = (
            lambda * points[0].0 + (1.0 - lambda) * points[1].0,
            lambda * points[0].1 + (1.0 - lambda) * points[1].1,
            lambda * points[0].2 + (1.0 - lambda) * points[1].2,
        );
        ok &= close(mix.0, lambda + (1.0 - lambda) * log3)
            && close(mix.1, lambda)
            && close(mix.2, 1.0 - lambda);
    }
    // average case endpoints (1, 1, 0) and (3/2, 0, 1)
    let p = JointDistribution::uniform(&[1, 2, 2]);
    let mut avg: Vec<_> = tree_achievable_points(&f, &g, Some(&p), caps)
        .unwrap()
        .iter()
        .map(|pt| tuple(&pt.rates))
        .collect();
    avg.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ok &= close(avg[0].0, 1.0) && close(avg[1].0, 1.5);
    check(
        "arithmetic-sum-tree-family",
        ok,
        "tree mixtures trace (l + (1-l) log2 3, l, 1-l); average case 3/2".into(),
    )
}

fn mod4_dag_tree_points(caps: &Caps) -> SuiteCheck {
    let f = FunctionTable::parity(&[4, 4, 4], 4).unwrap();
    let g = NetworkGraph::new(
        GraphKind::Dag,
        3,
        &[(2, 1), (3, 1), (3, 2)],
        &[4, 4, 4],
        Some(1),
    )
    .unwrap();
    let points = tree_achievable_points(&f, &g, None, caps).unwrap();
    let mut tuples_found: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            (
                p.rates.rate_or_zero((NodeId(2), NodeId(1))),
                p.rates.rate_or_zero((NodeId(3), NodeId(1))),
                p.rates.rate_or_zero((NodeId(3), NodeId(2))),
            )
        })
        .collect();
    tuples_found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ok = tuples_found == vec![(2.0, 0.0, 2.0), (2.0, 2.0, 0.0)];
    check(
        "mod4-dag-tree-points",
        ok,
        "(2, 0, 2) and (2, 2, 0) are the two tree rate vectors".into(),
    )
}

fn parity_split_tightness(caps: &Caps) -> SuiteCheck {
    let g = NetworkGraph::new(
        GraphKind::Dag,
        3,
        &[(2, 1), (3, 1), (3, 2)],
        &[4, 4, 4],
        Some(1),
    )
    .unwrap();
    let f = FunctionTable::parity(&[4, 4, 4], 4).unwrap();
    // every cut bound for parity is log2(D)
    let bounds = dag_outer_bound(&f, &g, caps).unwrap();
    let mut ok = bounds.iter().all(|b| b.class_count == 4);
    let n = 100usize;
    let block = Block::random(&[4, 4, 4], n, 11);
    let run = simulate_split_aggregation(FoldOp::ParityMod(4), &g, &block, None, caps).unwrap();
    ok &= run.decoded == block.eval_function(&f);
    ok &= check_rate_point(&bounds, &run.rates).unwrap().satisfies_all;
    for u in &run.cut_usage {
        if u.crosses_once {
            let slack = u.cut.crossing.len() as f64 / n as f64;
            ok &= u.measured_bits_per_instance <= u.bound_bits + slack + RATE_TOLERANCE;
        }
    }
    ok &= close(run.rates.rate_or_zero((NodeId(2), NodeId(1))), 2.0)
        && close(run.rates.rate_or_zero((NodeId(3), NodeId(1))), 1.0)
        && close(run.rates.rate_or_zero((NodeId(3), NodeId(2))), 1.0);
    check(
        "parity-split-achieves-bound",
        ok,
        "(2, 1, 1) meets every binding cut within 1/N, zero error".into(),
    )
}

fn maxmin_split(caps: &Caps) -> SuiteCheck {
    let g = NetworkGraph::new(
        GraphKind::Dag,
        3,
        &[(2, 1), (3, 1), (3, 2)],
        &[4, 4, 4],
        Some(1),
    )
    .unwrap();
    let block = Block::random(&[4, 4, 4], 60, 13);
    let fmax = FunctionTable::max_of(&[4, 4, 4]).unwrap();
    let run = simulate_split_aggregation(FoldOp::Max(4), &g, &block, None, caps).unwrap();
    let mut ok = run.decoded == block.eval_function(&fmax);
    let fmin = FunctionTable::min_of(&[4, 4, 4]).unwrap();
    let run = simulate_split_aggregation(FoldOp::Min(4), &g, &block, None, caps).unwrap();
    ok &= run.decoded == block.eval_function(&fmin);
    check(
        "maxmin-split-achieves-bound",
        ok,
        "max and min split-aggregation decode with zero error at log2(D)".into(),
    )
}

fn tree_threshold_edges() -> SuiteCheck {
    // path of 5 binary nodes, theta = 2: middle edge log2(5)
    let path5 = NetworkGraph::new(
        GraphKind::UndirectedTree,
        5,
        &[(1, 2), (2, 3), (3, 4), (4, 5)],
        &[2; 5],
        None,
    )
    .unwrap();
    let profiles = edge_complexities(&path5, 2).unwrap();
    let mid = profiles
        .iter()
        .find(|p| p.edge == (NodeId(2), NodeId(3)))
        .unwrap();
    let mut ok = mid.coding_size == 5;
    // star of 4, theta = 1: every leaf edge log2(3)
    let star4 = NetworkGraph::new(
        GraphKind::UndirectedTree,
        4,
        &[(1, 2), (1, 3), (1, 4)],
        &[2; 4],
        None,
    )
    .unwrap();
    ok &= edge_complexities(&star4, 1)
        .unwrap()
        .iter()
        .all(|p| p.coding_size == 3);
    // all nodes decode, totals exactly at the ceiling
    let block = Block::random(&[2; 5], 50, 3);
    let run = run_tree_protocol(&path5, 2, NodeId(3), &block).unwrap();
    for v in path5.nodes() {
        for t in 0..50 {
            let s: u32 = block.instance(t).iter().sum();
            ok &= run.decoded[v.index()][t] == u8::from(s >= 2);
        }
    }
    for e in &run.edges {
        ok &= e.up_bits + e.down_bits == e.bound_bits;
    }
    check(
        "tree-threshold-per-edge",
        ok,
        "per-edge complexity log2 min(2t+1, 2|A_e|+2, 2(n-t+1)+1), all nodes decode".into(),
    )
}

fn tree_nonbinary_edges() -> SuiteCheck {
    // two nodes with capacities (3, 4), theta = 5: log2(7)
    let g = NetworkGraph::new(GraphKind::UndirectedTree, 2, &[(1, 2)], &[4, 5], None).unwrap();
    let profiles = edge_complexities(&g, 5).unwrap();
    let ok = profiles[0].coding_size == 7;
    check(
        "tree-nonbinary-capacities",
        ok,
        "capacities (3, 4), theta = 5: min(11, 8, 7) = 7".into(),
    )
}

fn complete_graph_ratio(caps: &Caps) -> SuiteCheck {
    // uniform capacities, theta > l: R_ach = 2(1 - 1/n) R_cut exactly
    let mut ok = true;
    for n in 3..=6usize {
        let g = NetworkGraph::complete_with_capacities(&vec![2u32; n]).unwrap();
        let report = ratio_check(&g, 3, caps).unwrap();
        let (mut a, mut b) = (2 * (n as u64 - 1), n as u64);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let g_ = a;
        ok &= report.exact_ratio == Some((2 * (n as u64 - 1) / g_, n as u64 / g_));
        ok &= close(report.ratio, 2.0 * (1.0 - 1.0 / n as f64));
        // R_cut closed form: min(log2(2 theta + 1), log2(2l + 2)) / (n - 1)
        let expect_cut = (2f64 * 3.0 + 1.0).log2().min((2f64 * 2.0 + 2.0).log2())
            / (n as f64 - 1.0);
        ok &= close(report.r_cut, expect_cut);
    }
    check(
        "complete-graph-2opt-ratio",
        ok,
        "star time-sharing is exactly 2(1 - 1/n) times the cut bound".into(),
    )
}

fn lp_tight_case(caps: &Caps) -> SuiteCheck {
    let n = 4usize;
    let g = NetworkGraph::complete_with_capacities(&vec![2u32; n]).unwrap();
    let theta = 3u32;
    let bounds = graph_cut_bounds(&g, theta, caps).unwrap();
    let r_cut = symmetric_cut_rate_exact(&bounds);
    let r: ExactRates = g.edges().iter().map(|&e| (e, r_cut.clone())).collect();
    let schemes = star_schemes(&g, theta).unwrap();
    let sol = tradeoff_lp_exact(&g, &schemes, &r).unwrap();
    let expect = BigRational::new((2 * (n as i64 - 1)).into(), (n as i64).into());
    let ok = sol.certificate_ok && sol.t_star == expect && sol.lambda_l1 == BigRational::one();
    check(
        "lp-tight-case",
        ok,
        format!("t* = {} with an exact-rational certificate", sol.t_star),
    )
}

fn huffman_average_case() -> SuiteCheck {
    let ratio = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    // dyadic: E[l] = H exactly
    let q = vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)];
    let code = PrefixCodebook::huffman(&q).unwrap();
    let e = code.expected_length(&q);
    let mut ok = e == ratio(3, 2) && close(entropy(&q), 1.5);
    // non-dyadic: H <= E[l] <= H + 1
    let q = vec![ratio(2, 5), ratio(3, 10), ratio(3, 10)];
    let code = PrefixCodebook::huffman(&q).unwrap();
    let e = code.expected_length(&q);
    let ef = 1.6f64;
    ok &= e == ratio(8, 5);
    let h = entropy(&q);
    ok &= h <= ef + RATE_TOLERANCE && ef <= h + 1.0 + RATE_TOLERANCE;
    ok &= code.is_prefix_free() && code.kraft_sum() <= BigRational::one();
    check(
        "huffman-entropy-sandwich",
        ok,
        "H(q) <= E[l] <= H(q) + 1 with exact Kraft feasibility".into(),
    )
}
