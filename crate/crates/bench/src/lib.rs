//! Shared fixtures for the benchmarks.

use infunc_core::model::{FunctionTable, GraphKind, NetworkGraph};

/// Star of `n` nodes with alphabet size `d` everywhere, collector at v1,
/// computing the sum mod `d`.
pub fn parity_star(n: usize, d: u32) -> (FunctionTable, NetworkGraph) {
    let sizes = vec![d; n];
    let f = FunctionTable::parity(&sizes, d).expect("valid parity table");
    let edges: Vec<(u32, u32)> = (2..=n as u32).map(|v| (v, 1)).collect();
    let g = NetworkGraph::new(GraphKind::DirectedTree, n, &edges, &sizes, Some(1))
        .expect("valid star");
    (f, g)
}

/// Path of `n` binary nodes as an undirected tree.
pub fn binary_path(n: usize) -> NetworkGraph {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|i| (i, i + 1)).collect();
    NetworkGraph::new(GraphKind::UndirectedTree, n, &edges, &vec![2; n], None)
        .expect("valid path")
}
