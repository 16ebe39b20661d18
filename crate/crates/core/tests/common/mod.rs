#![allow(dead_code)]

use lexmatch_core::{Root, WeightedGraph};
use proptest::prelude::*;

/// Random forest on n vertices: each vertex i > 0 attaches to a random
/// earlier vertex unless its parent slot says otherwise.
pub fn forest(n: usize, parents: &[(usize, bool)], weights: &[f64]) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 1..n {
        let (p, keep) = parents[i - 1];
        if keep {
            edges.push((p % i, i, weights[i - 1]));
        }
    }
    WeightedGraph::new(n, edges, Root::Vertex(0)).unwrap()
}

pub fn forest_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec((0usize..1000, prop::bool::weighted(0.85)), n - 1),
            proptest::collection::vec(0.0f64..1.0, n - 1),
        )
            .prop_map(|(n, p, w)| forest(n, &p, &w))
    })
}

pub fn tree_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(0usize..1000, n - 1), proptest::collection::vec(0.0f64..1.0, n - 1))
            .prop_map(|(n, p, w)| {
                let p: Vec<(usize, bool)> = p.into_iter().map(|x| (x, true)).collect();
                forest(n, &p, &w)
            })
    })
}

/// Random simple graph with at most `max_m` edges.
pub fn graph_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec((0..n, 0..n, 0.0f64..1.0), 0..=max_m)
            .prop_map(move |es| WeightedGraph::simplified(n, es, Root::Vertex(0)).unwrap())
    })
}
