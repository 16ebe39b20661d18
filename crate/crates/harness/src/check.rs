//! Structural property suite over randomized instances.

use std::cmp::Ordering;

use lexmatch_core::bp::{
    extract_matching, flexibility, squeeze, sweep_bounded, sweep_tree, BoundaryValue, LexMsg, MessageField,
};
use lexmatch_core::exact::{brute_force_opt, BRUTE_FORCE_MAX_EDGES};
use lexmatch_core::genfn::OffspringLaw;
use lexmatch_core::randgraph::{assign_weights, ubgw_tree, Rooting};
use lexmatch_core::WeightedGraph;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::experiments::assert_perf_identity;
use crate::record::{Metric, ResultRecord};

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    instances: usize,
    recursion: usize,
    disjoint: usize,
    rules: usize,
    squeeze_bounds: usize,
    anti_monotone: usize,
    perf: usize,
    oracle: usize,
}

impl Tally {
    fn add(mut self, o: Tally) -> Tally {
        self.instances += o.instances;
        self.recursion += o.recursion;
        self.disjoint += o.disjoint;
        self.rules += o.rules;
        self.squeeze_bounds += o.squeeze_bounds;
        self.anti_monotone += o.anti_monotone;
        self.perf += o.perf;
        self.oracle += o.oracle;
        self
    }
}

fn le(a: LexMsg, b: LexMsg) -> bool {
    a.cmp_lex(&b) != Ordering::Greater
}

fn random_boundary<R: Rng>(rng: &mut R) -> BoundaryValue {
    match rng.random_range(0..4) {
        0 => BoundaryValue::Zero,
        1 => BoundaryValue::Top,
        _ => BoundaryValue::Sampled(LexMsg::new(rng.random_range(0..=1), rng.random_range(0.0..2.0))),
    }
}

fn disjoint(g: &WeightedGraph, f: &MessageField) -> (bool, bool) {
    match extract_matching(g, f) {
        Ok(m) => {
            let mut used = vec![false; g.n()];
            let ok = m.pairs().iter().all(|&(a, b)| {
                let fresh = !used[a] && !used[b];
                used[a] = true;
                used[b] = true;
                fresh
            });
            (ok, true)
        }
        // extraction fails when the two rules disagree
        Err(_) => (true, false),
    }
}

/// Unmatched set of the vertex rule equals that of the edge rule.
fn unmatched_sets_agree(g: &WeightedGraph, f: &MessageField) -> bool {
    let Ok(m) = extract_matching(g, f) else { return false };
    let mates = m.mates(g.n());
    flexibility(g, f)
        .iter()
        .enumerate()
        .filter(|(u, _)| !g.is_boundary(*u))
        .all(|(u, (flex, _))| (flex.cmp_lex(&LexMsg::ZERO) == Ordering::Greater) == mates[u].is_some())
}

fn one_instance(cfg: &ExperimentConfig, law: &OffspringLaw, i: u64) -> Result<Tally> {
    let seed = crate::experiments::replica_seed(cfg, 0, i);
    let mut rng = seed.derive(9).rng();
    let mut t = Tally { instances: 1, ..Tally::default() };
    let depth = 1 + (i as usize % 5);
    let rooting = if i.is_multiple_of(2) { Rooting::Vertex } else { Rooting::Edge };
    let ball = assign_weights(&ubgw_tree(law, rooting, depth, seed.derive(1))?, cfg.weights, seed.derive(2));

    // full tree without boundary conditions
    let plain = ball.clone().with_boundary(Vec::new())?;
    let f = sweep_tree(&plain, 1)?;
    t.recursion += usize::from(f.recursion_defect(&plain) != 0);
    let (dj, rules) = disjoint(&plain, &f);
    t.disjoint += usize::from(!dj);
    t.rules += usize::from(!rules || !unmatched_sets_agree(&plain, &f));
    if let Ok(m) = extract_matching(&plain, &f) {
        t.perf += usize::from(assert_perf_identity(&plain, &m).is_err());
        if plain.m() <= BRUTE_FORCE_MAX_EDGES {
            let bf = brute_force_opt(&plain)?;
            t.oracle += usize::from(bf.edge_ids() != m.edge_ids() || (bf.weight() - m.weight()).abs() >= 1e-9);
        }
    }

    // bounded sweeps against the squeeze
    let sq = squeeze(&ball, 1)?;
    let vals: Vec<BoundaryValue> = (0..ball.boundary().len()).map(|_| random_boundary(&mut rng)).collect();
    let fb = sweep_bounded(&ball, 1, &vals)?;
    t.recursion += usize::from(fb.recursion_defect(&ball) != 0);
    let (dj, rules) = disjoint(&ball, &fb);
    t.disjoint += usize::from(!dj);
    t.rules += usize::from(!rules || !unmatched_sets_agree(&ball, &fb));
    let inside = (0..fb.msgs.len()).all(|d| le(sq.lower[d], fb.msgs[d]) && le(fb.msgs[d], sq.upper[d]));
    t.squeeze_bounds += usize::from(!inside);

    // order reversal per step on vertex-rooted balls
    if rooting == Rooting::Vertex {
        let other: Vec<BoundaryValue> = (0..ball.boundary().len()).map(|_| random_boundary(&mut rng)).collect();
        let (lo, hi): (Vec<BoundaryValue>, Vec<BoundaryValue>) =
            vals.iter().zip(&other).map(|(&a, &b)| if le(a.value(1), b.value(1)) { (a, b) } else { (b, a) }).unzip();
        let fl = sweep_bounded(&ball, 1, &lo)?;
        let fh = sweep_bounded(&ball, 1, &hi)?;
        let dist = ball.distances(ball.boundary());
        let ok = (0..fl.msgs.len()).all(|d| {
            let (_, v) = ball.dir_ends(d);
            if dist[v].is_multiple_of(2) {
                le(fl.msgs[d], fh.msgs[d])
            } else {
                le(fh.msgs[d], fl.msgs[d])
            }
        });
        t.anti_monotone += usize::from(!ok);
    }
    Ok(t)
}

/// Runs the suite; every property must hold on every instance.
pub fn run_check(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let law = OffspringLaw::poisson(2.0)?;
    let tallies: Vec<Result<Tally>> =
        (0..cfg.samples as u64).into_par_iter().map(|i| one_instance(cfg, &law, i)).collect();
    let mut t = Tally::default();
    for x in tallies {
        t = t.add(x?);
    }
    let mut rec = ResultRecord::new(Experiment::Check, cfg.describe());
    let props = [
        ("recursion_self_consistency", t.recursion),
        ("matching_disjointness", t.disjoint),
        ("edge_rule_equals_vertex_rule", t.rules),
        ("squeeze_bounds_sampled_fields", t.squeeze_bounds),
        ("anti_monotone_ordering", t.anti_monotone),
        ("perf_vertex_edge_identity", t.perf),
        ("oracle_equivalence", t.oracle),
    ];
    for (name, failures) in props {
        rec.push(
            Metric::holds(name, failures == 0).with_note(format!("{failures} failures in {} instances", t.instances)),
        );
    }
    Ok(rec)
}
