use xharness::experiments::{root_certified, run_decay, run_mandatory, run_solve, star_of_stars};
use xharness::{Experiment, ExperimentConfig, HarnessError};

fn cfg(exp: Experiment, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(exp);
    for (k, v) in pairs {
        c.set(k, v).unwrap();
    }
    c
}

#[test]
fn mandatory_refuses_two_level_laws_unless_probing() {
    let c = cfg(Experiment::Mandatory, &[("law", "poisson:3"), ("depth", "4"), ("samples", "50"), ("trees", "5")]);
    assert!(matches!(run_mandatory(&c), Err(HarnessError::Core(lexmatch_core::Error::Regime(_)))));
    let mut p = c.clone();
    p.probe = true;
    let rec = run_mandatory(&p).unwrap();
    assert_eq!(rec.metric("mandatory_density").unwrap().pass, None);
}

#[test]
fn decay_refuses_two_level_laws() {
    let c = cfg(Experiment::Decay, &[("law", "poisson:3"), ("samples", "10")]);
    assert!(run_decay(&c).is_err());
}

#[test]
fn root_of_radius_zero_ball_is_uncertified() {
    let g = lexmatch_core::WeightedGraph::new(1, Vec::new(), lexmatch_core::Root::Vertex(0))
        .unwrap()
        .with_boundary(vec![0])
        .unwrap();
    assert_eq!(root_certified(&g).unwrap(), (false, false));
}

#[test]
fn star_of_stars_shape() {
    let g = star_of_stars(2);
    // root, three children, two grandchildren each
    assert_eq!(g.n(), 1 + 3 + 6);
    assert_eq!(g.m(), 9);
    assert!(g.is_forest());
}

#[test]
fn solve_two_levels_without_sampling() {
    let c = cfg(Experiment::Solve, &[("law", "poisson:3"), ("grid_points", "1024"), ("samples", "0")]);
    let (rec, sys) = run_solve(&c).unwrap();
    assert_eq!(sys.k, 2);
    assert_eq!(rec.passed(), Some(true), "{}", rec.to_csv());
}
