//! Monte Carlo experiment drivers. Each returns a [`ResultRecord`].

mod decay;
mod eps;
mod mandatory;
mod separation;
mod size;
mod solve;

pub use decay::{root_certified, run_decay};
pub use eps::run_eps_sweep;
pub use mandatory::run_mandatory;
pub use separation::{run_separation, star_of_stars};
pub use size::run_size;
pub use size::sample_graph;
pub use solve::run_solve;

use lexmatch_core::exact::{perf_of, Matching};
use lexmatch_core::{Error, RngSeed, WeightedGraph};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Seed of replica `i` for a given experiment stage.
pub fn replica_seed(cfg: &ExperimentConfig, stage: u64, i: u64) -> RngSeed {
    RngSeed::new(cfg.seed, stage).derive(i)
}

/// Vertex and edge performances must be proportional with ratio 2|E|/n.
pub(crate) fn assert_perf_identity(g: &WeightedGraph, m: &Matching) -> Result<()> {
    if g.m() == 0 || g.n() == 0 {
        return Ok(());
    }
    let p = perf_of(g, m)?;
    let r = 2.0 * g.m() as f64 / g.n() as f64;
    let ok = (p.vertex.match_prob - r * p.edge.match_prob).abs() < 1e-12
        && (p.vertex.expected_weight - r * p.edge.expected_weight).abs() < 1e-9;
    if ok {
        Ok(())
    } else {
        Err(Error::Inconsistent(format!("perf pair not proportional: {p:?}")).into())
    }
}
