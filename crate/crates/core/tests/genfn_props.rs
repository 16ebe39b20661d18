use lexmatch_core::genfn::*;
use proptest::prelude::*;

fn law_strategy() -> impl Strategy<Value = OffspringLaw> {
    prop_oneof![
        (0.05f64..6.0).prop_map(|c| OffspringLaw::poisson(c).unwrap()),
        (0.05f64..0.95).prop_map(|p| OffspringLaw::geometric(p).unwrap()),
        (1u32..12, 0.05f64..0.95).prop_map(|(n, q)| OffspringLaw::binomial(n, q).unwrap()),
        proptest::collection::vec(0.0f64..1.0, 1..8).prop_filter_map("non-zero mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-3).then(|| OffspringLaw::finite(w.iter().map(|x| x / s).collect()).unwrap())
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generating_functions_are_normalised(law in law_strategy()) {
        prop_assert!((pgf_eval(&law, 1.0, 0).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((size_biased_pgf(&law, 1.0, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_solve_and_mirror(law in law_strategy()) {
        let fp = double_fixed_points(&law, 1e-12).unwrap();
        prop_assume!(!fp.degenerate);
        let pts = &fp.points;
        prop_assert!(!pts.is_empty());
        for &t in pts {
            prop_assert!((t - law.hat(1.0 - law.hat(1.0 - t))).abs() < 1e-9);
        }
        for (i, &t) in pts.iter().enumerate() {
            let mirror = law.hat(1.0 - t);
            prop_assert!((mirror - pts[pts.len() - 1 - i]).abs() < 1e-9, "{t} -> {mirror}, {pts:?}");
        }
    }

    #[test]
    fn f_pi_equal_on_argmax(law in law_strategy()) {
        let rep = macroscopic_law(&law).unwrap();
        prop_assume!(rep.k == 2);
        let pl = rep.plateaus();
        let a = f_pi(&law, pl[0]).unwrap();
        let b = f_pi(&law, pl[1]).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn rho_dominates_constants(law in law_strategy(), xs in proptest::collection::vec(0.0f64..=1.0, 100)) {
        let rho = rho_subcritical(&law, 200).unwrap();
        for x in xs {
            let v = law.hat_prime(1.0 - x) * law.hat_prime(1.0 - law.hat(1.0 - x));
            prop_assert!(rho >= v - 1e-12, "rho {rho} < {v} at {x}");
        }
    }
}

#[test]
fn rho_poisson_closed_form() {
    for c in [0.3, 0.7, 1.0, 1.5, 2.0, 2.7, 3.0, 4.5] {
        let law = OffspringLaw::poisson(c).unwrap();
        let rho = rho_subcritical(&law, 200).unwrap();
        // c^2 y e^{-c y} over y in [e^{-c}, 1], maximised at y = 1/c when inside
        let f = |y: f64| c * c * y * (-c * y).exp();
        let lo = (-c).exp();
        let y = (1.0 / c).clamp(lo, 1.0);
        let closed = f(y).max(f(lo)).max(f(1.0));
        assert!((rho - closed).abs() < 1e-6, "c={c}: {rho} vs {closed}");
    }
}

#[test]
fn poisson_one_regime() {
    let rep = macroscopic_law(&OffspringLaw::poisson(1.0).unwrap()).unwrap();
    assert_eq!(rep.k, 1);
    assert!((rep.gamma - 0.567143290409784).abs() < 1e-9);
    assert!((rep.rho - (-1.0f64).exp()).abs() < 1e-6);
    assert!(rep.subcritical && rep.unique_double_fp);
}

#[test]
fn karp_sipser_values() {
    let ks = karp_sipser_poisson(1.0).unwrap();
    assert!((ks.vertex_density - 0.544062).abs() < 1e-6);
    assert!((ks.edge_density - 0.544062).abs() < 1e-6);
    let law = OffspringLaw::poisson(1.0).unwrap();
    assert!((matching_vertex_density(&law) - ks.vertex_density).abs() < 1e-9);
}

#[test]
fn degenerate_two_regular() {
    let law = OffspringLaw::finite(vec![0.0, 0.0, 1.0]).unwrap();
    let rep = macroscopic_law(&law).unwrap();
    assert!(rep.degenerate_family);
    assert_eq!(matching_vertex_density(&law), 1.0);
}

#[test]
fn poisson_three_has_two_argmax_plateaus() {
    let law = OffspringLaw::poisson(3.0).unwrap();
    let rep = macroscopic_law(&law).unwrap();
    assert_eq!(rep.k, 2);
    assert_eq!(rep.fixed_points.len(), 3);
    let pl = rep.plateaus();
    assert!((pl[0] - rep.fixed_points[0]).abs() < 1e-12 && (pl[1] - rep.fixed_points[2]).abs() < 1e-12);
    assert!((f_pi(&law, pl[0]).unwrap() - f_pi(&law, pl[1]).unwrap()).abs() < 1e-8);
    assert!(!rep.subcritical);
}
