use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use infunc_bench::{binary_path, parity_star};
use infunc_core::codebook::PrefixCodebook;
use infunc_core::graph_agg::{
    graph_cut_bounds, star_schemes, symmetric_cut_rate_exact, tradeoff_lp_exact, ExactRates,
};
use infunc_core::interactive::{threshold_scheme, Speaker, ThresholdSpec};
use infunc_core::model::{Block, Caps, NetworkGraph, NodeId};
use infunc_core::tree_code::edge_alphabet;
use infunc_core::tree_protocol::run_tree_protocol;
use infunc_core::util::SplitMix64;
use num_rational::BigRational;

fn bench_edge_alphabet(c: &mut Criterion) {
    let caps = Caps::default();
    let (f, g) = parity_star(6, 4);
    c.bench_function("edge_alphabet parity star n=6 d=4", |b| {
        b.iter(|| edge_alphabet(black_box(&f), black_box(&g), NodeId(2), &caps).unwrap())
    });
}

fn bench_threshold_block_code(c: &mut Criterion) {
    let spec = ThresholdSpec::new(4, 5, 4).unwrap();
    let scheme = threshold_scheme(&spec, Speaker::Node1);
    let n = 1000usize;
    let mut rng = SplitMix64::new(1);
    let seq: Vec<u32> = (0..n)
        .map(|_| scheme.class_of(rng.below(5) as u32))
        .collect();
    c.bench_function("block_code build+encode N=1000", |b| {
        b.iter(|| {
            let code = scheme.block_code(black_box(n));
            black_box(code.encode(&seq))
        })
    });
}

fn bench_tree_protocol(c: &mut Criterion) {
    let g = binary_path(7);
    let block = Block::random(&[2; 7], 256, 3);
    c.bench_function("tree_protocol path n=7 N=256", |b| {
        b.iter(|| run_tree_protocol(black_box(&g), 3, NodeId(4), black_box(&block)).unwrap())
    });
}

fn bench_tradeoff_lp(c: &mut Criterion) {
    let caps = Caps::default();
    let g = NetworkGraph::complete_with_capacities(&[2; 6]).unwrap();
    let theta = 4u32;
    let bounds = graph_cut_bounds(&g, theta, &caps).unwrap();
    let r_cut = symmetric_cut_rate_exact(&bounds);
    let r: ExactRates = g.edges().iter().map(|&e| (e, r_cut.clone())).collect();
    let schemes = star_schemes(&g, theta).unwrap();
    c.bench_function("tradeoff_lp stars n=6", |b| {
        b.iter(|| tradeoff_lp_exact(black_box(&g), black_box(&schemes), black_box(&r)).unwrap())
    });
}

fn bench_huffman(c: &mut Criterion) {
    let mut rng = SplitMix64::new(5);
    let weights: Vec<u64> = (0..256).map(|_| 1 + rng.below(1000)).collect();
    let total: u64 = weights.iter().sum();
    let probs: Vec<BigRational> = weights
        .iter()
        .map(|&w| BigRational::new((w as i64).into(), (total as i64).into()))
        .collect();
    c.bench_function("huffman k=256 exact rationals", |b| {
        b.iter(|| PrefixCodebook::huffman(black_box(&probs)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_edge_alphabet,
    bench_threshold_block_code,
    bench_tree_protocol,
    bench_tradeoff_lp,
    bench_huffman
);
criterion_main!(benches);
