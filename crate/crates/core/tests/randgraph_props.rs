use lexmatch_core::genfn::OffspringLaw;
use lexmatch_core::randgraph::*;
use lexmatch_core::rde::tv_distance;
use lexmatch_core::{RngSeed, Root};
use proptest::prelude::*;

#[test]
fn generators_replay_byte_for_byte() {
    let law = OffspringLaw::poisson(2.0).unwrap();
    let w = WeightLaw::uniform(0.0, 1.0).unwrap();
    let a = assign_weights(&erdos_renyi(500, 2.0, RngSeed::from(9)).unwrap(), w, RngSeed::from(10));
    let b = assign_weights(&erdos_renyi(500, 2.0, RngSeed::from(9)).unwrap(), w, RngSeed::from(10));
    assert_eq!(a.to_text(), b.to_text());
    let c = erdos_renyi(500, 2.0, RngSeed::from(8)).unwrap();
    assert_ne!(a.to_text(), assign_weights(&c, w, RngSeed::from(10)).to_text());
    let t1 = ubgw_tree(&law, Rooting::Edge, 4, RngSeed::new(1, 2)).unwrap();
    let t2 = ubgw_tree(&law, Rooting::Edge, 4, RngSeed::new(1, 2)).unwrap();
    assert_eq!(t1.to_text(), t2.to_text());
    let d = [3, 3, 2, 2, 1, 1, 1, 1];
    let c1 = configuration_model(&d, RngSeed::from(4)).unwrap();
    let c2 = configuration_model(&d, RngSeed::from(4)).unwrap();
    assert_eq!(c1.to_text(), c2.to_text());
}

#[test]
fn erdos_renyi_mean_degree() {
    for c in [1.0, 3.0] {
        let g = erdos_renyi(100_000, c, RngSeed::from(21)).unwrap();
        let ratio = 2.0 * g.m() as f64 / g.n() as f64;
        assert!((ratio - c).abs() < 0.02, "c={c}: {ratio}");
    }
}

#[test]
fn ubgw_degree_histograms() {
    let law = OffspringLaw::poisson(1.5).unwrap();
    let cap = 16;
    let mut root = vec![0.0; cap];
    let mut inner = vec![0.0; cap];
    let mut inner_n = 0.0;
    let samples = 100_000;
    for s in 0..samples {
        let t = ubgw_tree(&law, Rooting::Vertex, 2, RngSeed::new(77, s)).unwrap();
        root[t.degree(0).min(cap - 1)] += 1.0;
        for &(v, _) in t.neighbors(0) {
            inner[(t.degree(v) - 1).min(cap - 1)] += 1.0;
            inner_n += 1.0;
        }
    }
    let root: Vec<f64> = root.iter().map(|x| x / samples as f64).collect();
    let inner: Vec<f64> = inner.iter().map(|x| x / inner_n).collect();
    let pi: Vec<f64> = (0..cap).map(|j| law.pmf(j)).collect();
    let pi_hat: Vec<f64> = (0..cap).map(|j| law.size_biased_pmf(j)).collect();
    assert!(tv_distance(&root, &pi) < 0.02);
    assert!(tv_distance(&inner, &pi_hat) < 0.02);
}

#[test]
fn configuration_model_is_simple() {
    let d = vec![3; 1000];
    let g = configuration_model(&d, RngSeed::from(5)).unwrap();
    assert!(g.m() <= 1500 && g.m() > 1450);
    assert!((0..g.n()).all(|v| g.degree(v) <= 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_is_idempotent(seed in 0u64..1000, c in 0.5f64..3.0, h in 1usize..5, center in 0usize..200) {
        let g = assign_weights(&erdos_renyi(200, c, RngSeed::from(seed)).unwrap(), WeightLaw::uniform(0.0, 1.0).unwrap(), RngSeed::from(seed + 1));
        let b = ball(&g, center, h).unwrap();
        let bb = ball(&b, 0, h).unwrap();
        prop_assert_eq!(&b, &bb);
        prop_assert_eq!(b.root(), Root::Vertex(0));
        let dist = b.distances(&[0]);
        for v in 0..b.n() {
            prop_assert!(dist[v] <= h);
            prop_assert_eq!(b.is_boundary(v), dist[v] == h);
        }
    }

    #[test]
    fn ubgw_boundary_is_last_level(seed in 0u64..500, depth in 1usize..5) {
        let law = OffspringLaw::poisson(2.0).unwrap();
        let t = ubgw_tree(&law, Rooting::Vertex, depth, RngSeed::from(seed)).unwrap();
        prop_assert!(t.is_forest());
        let dist = t.distances(&[0]);
        for v in 0..t.n() {
            prop_assert!(dist[v] <= depth);
            prop_assert_eq!(t.is_boundary(v), dist[v] == depth);
        }
    }
}
