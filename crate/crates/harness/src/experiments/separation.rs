use lexmatch_core::bp::{extract_matching, sweep_tree};
use lexmatch_core::exact::uniform_max_matching;
use lexmatch_core::randgraph::{assign_weights, WeightLaw};
use lexmatch_core::{Error, Root, WeightedGraph};
use rayon::prelude::*;

use super::{assert_perf_identity, replica_seed};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::record::{Metric, ResultRecord};
use crate::stats::proportion;

/// Root 0 with p+1 neighbours, each carrying p leaves.
pub fn star_of_stars(p: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut next = p + 2;
    for a in 1..=p + 1 {
        edges.push((0, a, 0.0));
        for _ in 0..p {
            edges.push((a, next, 0.0));
            next += 1;
        }
    }
    WeightedGraph::new(next, edges, Root::Vertex(0)).expect("valid star of stars")
}

fn root_matched_weighted(cfg: &ExperimentConfig, g: &WeightedGraph, w: WeightLaw, stage: u64) -> Result<usize> {
    let hits: Vec<Result<bool>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let gw = assign_weights(g, w, replica_seed(cfg, stage, i as u64));
            let m = extract_matching(&gw, &sweep_tree(&gw, 1)?)?;
            assert_perf_identity(&gw, &m)?;
            Ok(m.mates(gw.n())[0].is_some())
        })
        .collect();
    hits.into_iter().try_fold(0, |acc, h| Ok(acc + usize::from(h?)))
}

/// Root match probability on the conditioned star-of-stars configuration,
/// under the weighted optimum and under a uniform maximum matching.
pub fn run_separation(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let p = cfg.p;
    let law = &cfg.law;
    if p == 0 || law.size_biased_pmf(p) <= 0.0 || law.size_biased_pmf(0) <= 0.0 {
        return Err(Error::Domain(format!(
            "separation needs p >= 1 with pi_hat(p) > 0 and pi_hat(0) > 0, got p = {p}"
        ))
        .into());
    }
    let mut rec = ResultRecord::new(Experiment::Separation, cfg.describe());
    let g = star_of_stars(p);
    let n = cfg.samples;
    let tol = cfg.tolerance.unwrap_or(0.02);
    let pf = p as f64;

    let (pw, sw) = proportion(root_matched_weighted(cfg, &g, cfg.weights, 0)?, n);
    let (pa, sa) = proportion(root_matched_weighted(cfg, &g, cfg.weights_alt, 1)?, n);
    let uni: Vec<Result<bool>> = (0..n)
        .into_par_iter()
        .map(|i| Ok(uniform_max_matching(&g, replica_seed(cfg, 2, i as u64))?.mates(g.n())[0].is_some()))
        .collect();
    let (pu, su) = proportion(
        uni.into_iter()
            .try_fold(0, |acc, h: Result<bool>| Ok::<_, crate::error::HarnessError>(acc + usize::from(h?)))?,
        n,
    );

    let weighted_ref = 1.0 - (1.0 - 1.0 / (pf + 1.0)).powf(pf + 1.0);
    let uniform_ref = 1.0 / (1.0 + pf / (pf + 1.0));
    rec.push(Metric::within("weighted_root_matched", pw, Some(sw), weighted_ref, "1 - (1 - 1/(p+1))^(p+1)", tol));
    rec.push(Metric::within("uniform_root_matched", pu, Some(su), uniform_ref, "1/(1 + p/(p+1))", tol));
    rec.push(Metric::within(
        "weight_law_invariance",
        pw - pa,
        Some((sw * sw + sa * sa).sqrt()),
        0.0,
        "weighted estimate does not depend on the weight law",
        tol,
    ));
    rec.push(Metric::report("weighted_root_matched_alt", pa, Some(sa)));
    let p_event =
        law.pmf(p + 1) * law.size_biased_pmf(p).powi(p as i32 + 1) * law.size_biased_pmf(0).powi((p * (p + 1)) as i32);
    rec.push(Metric::report("event_probability", p_event, None).with_note("conditioned configuration built directly"));
    Ok(rec)
}
