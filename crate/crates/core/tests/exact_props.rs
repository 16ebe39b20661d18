mod common;

use std::cmp::Ordering;

use common::{forest_strategy, graph_strategy};
use lexmatch_core::exact::*;
use lexmatch_core::{RngSeed, Root, WeightedGraph};
use proptest::prelude::*;

fn nu(g: &WeightedGraph) -> usize {
    brute_force_opt(g).unwrap().size()
}

fn without(g: &WeightedGraph, keep: impl Fn(usize) -> bool) -> WeightedGraph {
    let es: Vec<_> = g.edges().iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, e)| (e.u, e.v, e.w)).collect();
    WeightedGraph::new(g.n(), es, Root::Vertex(0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tree_dp_matches_brute_force(g in forest_strategy(27)) {
        prop_assume!(g.m() <= BRUTE_FORCE_MAX_EDGES);
        let dp = tree_opt_dp(&g).unwrap().matching;
        let bf = brute_force_opt(&g).unwrap();
        prop_assert_eq!(dp.size(), bf.size());
        prop_assert!((dp.weight() - bf.weight()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn brute_force_is_locally_optimal(g in graph_strategy(9, 14)) {
        let m = brute_force_opt(&g).unwrap();
        let ids = m.edge_ids().to_vec();
        let flip = |d: &[usize]| {
            let mut s: Vec<usize> = ids.iter().copied().filter(|e| !d.contains(e)).collect();
            s.extend(d.iter().copied().filter(|e| !ids.contains(e)));
            Matching::from_edge_ids(&g, s).ok()
        };
        let me = g.m();
        for a in 0..me {
            for b in a..me {
                for c in b..me {
                    let mut d = vec![a, b, c];
                    d.dedup();
                    if let Some(alt) = flip(&d) {
                        prop_assert!(lex_cmp(&alt, &m) != Ordering::Greater, "flip {d:?} improves");
                    }
                }
            }
        }
    }

    #[test]
    fn leaf_removal_exact_is_maximum(g in graph_strategy(12, 18), seed in 0u64..100) {
        let lr = leaf_removal(&g, RngSeed::from(seed));
        if lr.exact {
            prop_assert_eq!(lr.matching.size(), nu(&g));
        } else {
            prop_assert!(lr.matching.size() <= nu(&g));
        }
    }

    #[test]
    fn leaf_removal_is_exact_on_forests(g in forest_strategy(26)) {
        let lr = leaf_removal(&g, RngSeed::from(1));
        prop_assert!(lr.exact);
        prop_assert_eq!(lr.matching.size(), nu(&g));
    }

    #[test]
    fn mandatory_blocking_against_deletion_oracle(g in graph_strategy(9, 12)) {
        let cls = mandatory_blocking(&g).unwrap();
        let full = nu(&g);
        for (e, c) in cls.iter().enumerate() {
            let edge = g.edge(e);
            let drop_edge = nu(&without(&g, |i| i != e));
            let drop_ends = nu(&without(&g, |i| {
                let x = g.edge(i);
                x.u != edge.u && x.v != edge.u && x.u != edge.v && x.v != edge.v
            })) + 1;
            let expected = if drop_edge < full {
                EdgeClass::Mandatory
            } else if drop_ends < full {
                EdgeClass::Blocking
            } else {
                EdgeClass::Free
            };
            prop_assert_eq!(*c, expected, "edge {}", e);
        }
    }

    #[test]
    fn uniform_max_matching_respects_classes(g in graph_strategy(9, 12), seed in 0u64..50) {
        let cls = mandatory_blocking(&g).unwrap();
        let m = uniform_max_matching(&g, RngSeed::from(seed)).unwrap();
        prop_assert_eq!(m.size(), nu(&g));
        for (e, c) in cls.iter().enumerate() {
            match c {
                EdgeClass::Mandatory => prop_assert!(m.contains_edge(e)),
                EdgeClass::Blocking => prop_assert!(!m.contains_edge(e)),
                EdgeClass::Free => {}
            }
        }
    }

    #[test]
    fn perf_vertex_edge_proportional(g in graph_strategy(14, 20)) {
        prop_assume!(g.m() > 0);
        let m = brute_force_opt(&g).unwrap();
        let p = perf_of(&g, &m).unwrap();
        let r = 2.0 * g.m() as f64 / g.n() as f64;
        prop_assert!((p.vertex.match_prob - r * p.edge.match_prob).abs() < 1e-12);
        prop_assert!((p.vertex.expected_weight - r * p.edge.expected_weight).abs() < 1e-12);
    }

    #[test]
    fn matching_text_round_trip(g in graph_strategy(10, 15)) {
        let m = brute_force_opt(&g).unwrap();
        let back = Matching::from_text(&g, &m.to_text()).unwrap();
        prop_assert_eq!(back.edge_ids(), m.edge_ids());
    }

    #[test]
    fn marginal_gains_match_brute_force(g in forest_strategy(14)) {
        let gains = marginal_gains(&g).unwrap();
        for d in 0..2 * g.m() {
            let (u, v) = g.dir_ends(d);
            let e = d / 2;
            let side = side_of(&g, e, v);
            let with_v = brute_force_opt(&without(&g, |i| i != e && in_side(&g, i, &side))).unwrap();
            let without_v = brute_force_opt(&without(&g, |i| {
                let x = g.edge(i);
                i != e && in_side(&g, i, &side) && x.u != v && x.v != v
            }))
            .unwrap();
            prop_assert_eq!(gains[d].size, with_v.size() as i64 - without_v.size() as i64, "{} -> {}", u, v);
            prop_assert!((gains[d].weight - (with_v.weight() - without_v.weight())).abs() < 1e-9);
        }
    }
}

/// Vertices reachable from v without crossing edge e.
fn side_of(g: &WeightedGraph, e: usize, v: usize) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![v];
    seen[v] = true;
    while let Some(x) = stack.pop() {
        for &(y, f) in g.neighbors(x) {
            if f != e && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

fn in_side(g: &WeightedGraph, i: usize, side: &[bool]) -> bool {
    side[g.edge(i).u] && side[g.edge(i).v]
}

#[test]
fn eps_threshold_is_sharp() {
    // path with weights 0.1, 0.9, 0.1: size-2 optimum weighs 0.2, size-1 weighs 0.9
    let g = WeightedGraph::new(4, vec![(0, 1, 0.1), (1, 2, 0.9), (2, 3, 0.1)], Root::Vertex(0)).unwrap();
    let eps0 = eps_gap_threshold(&g).unwrap();
    assert!((eps0 - 1.0 / 0.7).abs() < 1e-12);
    let below = lexmatch_core::bp::scalar_sweep_eps(&g, eps0 * 0.99).unwrap().1;
    assert_eq!(below.size(), 2);
    let above = lexmatch_core::bp::scalar_sweep_eps(&g, eps0 * 1.01).unwrap().1;
    assert_eq!(above.size(), 1);
}
