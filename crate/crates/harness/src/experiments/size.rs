use lexmatch_core::exact::leaf_removal;
use lexmatch_core::genfn::{matching_vertex_density, LawFamily};
use lexmatch_core::randgraph::{configuration_model, erdos_renyi};
use lexmatch_core::WeightedGraph;
use rayon::prelude::*;

use super::{assert_perf_identity, replica_seed};
use crate::config::{Experiment, ExperimentConfig, GraphKind};
use crate::error::{HarnessError, Result};
use crate::record::{Metric, ResultRecord};
use crate::stats::mean_se;

/// Attempts allowed per requested certified replica.
const ATTEMPT_FACTOR: usize = 5;

pub fn sample_graph(cfg: &ExperimentConfig, i: u64) -> Result<WeightedGraph> {
    let seed = replica_seed(cfg, 0, i);
    match cfg.graph {
        GraphKind::ErdosRenyi => match cfg.law.family() {
            LawFamily::Poisson { c } => Ok(erdos_renyi(cfg.n, *c, seed)?),
            _ => Err(HarnessError::Value { key: "graph".into(), msg: "er needs a Poisson law".into() }),
        },
        GraphKind::Configuration => {
            let sampler = cfg.law.sampler();
            let mut rng = seed.derive(1).rng();
            let degrees: Vec<usize> = (0..cfg.n).map(|_| sampler.sample(&mut rng)).collect();
            Ok(configuration_model(&degrees, seed)?)
        }
        GraphKind::Ubgw => Err(HarnessError::Value { key: "graph".into(), msg: "size runs on er or config".into() }),
    }
}

/// Matched-vertex fraction from certified leaf-removal runs.
pub fn run_size(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let mut rec = ResultRecord::new(Experiment::Size, cfg.describe());
    let want = cfg.replicas;
    let mut fractions = Vec::new();
    let mut cores = Vec::new();
    let mut attempts = 0;
    let mut certified = 0;
    let cap = ATTEMPT_FACTOR * want;
    while fractions.len() < want && attempts < cap {
        let batch = (want - fractions.len()).min(cap - attempts);
        let runs: Vec<Result<(bool, f64, usize)>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(|i| {
                let g = sample_graph(cfg, i as u64)?;
                let lr = leaf_removal(&g, replica_seed(cfg, 1, i as u64));
                assert_perf_identity(&g, &lr.matching)?;
                let frac = if g.n() == 0 { 0.0 } else { 2.0 * lr.matching.size() as f64 / g.n() as f64 };
                Ok((lr.exact, frac, lr.removed_core_size))
            })
            .collect();
        attempts += batch;
        for r in runs {
            let (exact, frac, core) = r?;
            cores.push(core as f64);
            certified += usize::from(exact);
            if exact && fractions.len() < want {
                fractions.push(frac);
            }
        }
    }
    if fractions.len() < want {
        return Err(HarnessError::Refused(format!(
            "only {} of {} leaf-removal runs were certified exact after {} attempts (mean core size {:.1})",
            fractions.len(),
            want,
            attempts,
            cores.iter().sum::<f64>() / cores.len().max(1) as f64
        )));
    }
    let (m, se) = mean_se(&fractions);
    let reference = matching_vertex_density(&cfg.law);
    let tol = cfg.tolerance.unwrap_or(0.01);
    rec.push(
        Metric::within(
            "matched_vertex_fraction",
            m,
            Some(se),
            reference,
            "genfn::matching_vertex_density, 2 - max F_pi",
            tol,
        )
        .with_note(format!("estimate +- 2SE = [{:.4}, {:.4}]", m - 2.0 * se, m + 2.0 * se)),
    );
    rec.push(Metric::report("certified_rate", certified as f64 / attempts as f64, None));
    Ok(rec)
}
