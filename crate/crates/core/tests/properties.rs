//! Randomized invariants over the coding and protocol machinery.

use proptest::prelude::*;

use infunc_core::codebook::{entropy, BlockCode, PrefixCodebook};
use infunc_core::interactive::{
    run_threshold_protocol, threshold_coding_size, worst_case_total, Speaker, ThresholdSpec,
};
use infunc_core::model::{Block, GraphKind, NetworkGraph, NodeId};
use infunc_core::partition::optimal_partition;
use infunc_core::tree_protocol::run_tree_protocol;
use infunc_core::FunctionTable;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

proptest! {
    /// Enumerative block codewords always round-trip through decode.
    #[test]
    fn block_code_round_trips(
        flags in proptest::collection::vec(any::<bool>(), 1..6),
        seq_seed in any::<u64>(),
        n in 1usize..10,
    ) {
        let code = BlockCode::new(n, flags.clone());
        let (kraft, feasible) = code.kraft_exact();
        prop_assert!(feasible, "kraft {kraft}");
        let mut rng = infunc_core::util::SplitMix64::new(seq_seed);
        let seq: Vec<u32> = (0..n).map(|_| rng.below(flags.len() as u64) as u32).collect();
        let word = code.encode(&seq);
        prop_assert_eq!(word.len() as u64 + code.marked_in(&seq), code.total_bits());
        let mut pos = 0;
        let back = code.decode(&word, &mut pos).unwrap();
        prop_assert_eq!(back, seq);
        prop_assert_eq!(pos, word.len());
    }

    /// Huffman codes on random rational distributions are prefix-free,
    /// Kraft-feasible, and sit in the entropy sandwich.
    #[test]
    fn huffman_entropy_sandwich(weights in proptest::collection::vec(1u32..100, 1..12)) {
        let total: u64 = weights.iter().map(|&w| w as u64).sum();
        let q: Vec<BigRational> = weights
            .iter()
            .map(|&w| BigRational::new((w as i64).into(), (total as i64).into()))
            .collect();
        let code = PrefixCodebook::huffman(&q).unwrap();
        prop_assert!(code.is_prefix_free());
        prop_assert!(code.kraft_sum() <= BigRational::one());
        let e = code.expected_length(&q).to_f64().unwrap();
        let h = entropy(&q);
        prop_assert!(h - 1e-9 <= e && e <= h + 1.0 + 1e-9, "H = {}, E[l] = {}", h, e);
    }

    /// Every feasible two-node encoder partition refines the optimal one,
    /// and every refinement is feasible.
    #[test]
    fn feasible_iff_refines_optimal(
        sx in 2u32..5,
        sy in 2u32..5,
        seed in any::<u64>(),
        labels_seed in any::<u64>(),
    ) {
        let mut rng = infunc_core::util::SplitMix64::new(seed);
        let values: Vec<u32> = (0..sx * sy).map(|_| rng.below(3) as u32).collect();
        let f = FunctionTable::new(&[sx, sy], 3, values).unwrap();
        let opt = optimal_partition(&f, 0).unwrap();
        // a random labelling of the letters
        let mut lrng = infunc_core::util::SplitMix64::new(labels_seed);
        let labels: Vec<u32> = (0..sx).map(|_| lrng.below(sx as u64) as u32).collect();
        let candidate = infunc_core::partition::Partition::from_labels(&labels);
        let feasible = (0..sy).all(|y| {
            let mut by_class = std::collections::BTreeMap::new();
            (0..sx).all(|x| {
                let v = f.eval(&[x, y]);
                match by_class.insert(labels[x as usize], v) {
                    Some(prev) => prev == v,
                    None => true,
                }
            })
        });
        prop_assert_eq!(feasible, candidate.refines(&opt));
    }

    /// The threshold protocol never errs and never exceeds its ceiling, for
    /// either speaker, on random specs and blocks.
    #[test]
    fn threshold_protocol_is_exact(
        m1 in 1u32..5,
        m2 in 1u32..5,
        theta_pick in 0u32..12,
        n in 1usize..24,
        seed in any::<u64>(),
        second_speaker in any::<bool>(),
    ) {
        let theta = theta_pick % (m1 + m2 + 2);
        let spec = ThresholdSpec::new(m1, m2, theta).unwrap();
        let block = Block::random(&[m1 + 1, m2 + 1], n, seed);
        let speaker = if second_speaker { Speaker::Node2 } else { Speaker::Node1 };
        let out = run_threshold_protocol(
            &spec,
            block.seq(NodeId(1)),
            block.seq(NodeId(2)),
            speaker,
        )
        .unwrap();
        let bound = worst_case_total(threshold_coding_size(&spec), n as u64);
        prop_assert_eq!(out.total_bits, bound);
        for t in 0..n {
            let expect = u8::from(block.seq(NodeId(1))[t] + block.seq(NodeId(2))[t] >= theta);
            prop_assert_eq!(out.decoded_node1[t], expect);
            prop_assert_eq!(out.decoded_node2[t], expect);
        }
    }

    /// On random trees every node's decoded block matches the truth and the
    /// per-edge totals equal the exact ceiling.
    #[test]
    fn tree_protocol_all_nodes_decode(
        prufer in proptest::collection::vec(1u32..=5, 3),
        theta in 0u32..7,
        root_pick in 1u32..=5,
        seed in any::<u64>(),
    ) {
        // decode the Prüfer sequence into a labeled tree on 5 nodes
        let n = 5usize;
        let mut degree = vec![1u32; n + 1];
        for &s in &prufer {
            degree[s as usize] += 1;
        }
        let mut edges = Vec::new();
        let mut used = vec![false; n + 1];
        for &s in &prufer {
            let leaf = (1..=n as u32)
                .find(|&v| degree[v as usize] == 1 && !used[v as usize])
                .unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            used[leaf as usize] = true;
            degree[s as usize] -= 1;
        }
        let rest: Vec<u32> = (1..=n as u32)
            .filter(|&v| !used[v as usize] && degree[v as usize] >= 1)
            .collect();
        edges.push((rest[0].min(rest[1]), rest[0].max(rest[1])));
        let g = NetworkGraph::new(GraphKind::UndirectedTree, n, &edges, &[2; 5], None).unwrap();
        let block = Block::random(&[2; 5], 12, seed);
        let run = run_tree_protocol(&g, theta, NodeId(root_pick), &block).unwrap();
        for e in &run.edges {
            prop_assert_eq!(e.up_bits + e.down_bits, e.bound_bits);
        }
        for v in g.nodes() {
            for t in 0..12 {
                let s: u32 = block.instance(t).iter().sum();
                prop_assert_eq!(run.decoded[v.index()][t], u8::from(s >= theta));
            }
        }
    }
}
