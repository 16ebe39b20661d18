use std::cmp::Ordering;

use lexmatch_core::bp::{macroscopic_sweep, squeeze, LevelBoundary, LexMsg};
use lexmatch_core::genfn::macroscopic_law;
use lexmatch_core::randgraph::{assign_weights, ubgw_tree, Rooting};
use lexmatch_core::{Error, WeightedGraph};
use rayon::prelude::*;

use super::replica_seed;
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::record::{Metric, ResultRecord, Series};
use crate::stats::{ls_slope, proportion};

/// Whether the root's own value (its side of a virtual parent edge) is the
/// same for every boundary condition, for the full lexicographic message and
/// for the level alone. Vertex-rooted tree balls only.
pub fn root_certified(ball: &WeightedGraph) -> Result<(bool, bool)> {
    if ball.is_boundary(0) {
        return Ok((false, false));
    }
    let sq = squeeze(ball, 1)?;
    let (mut lo, mut hi) = (LexMsg::ZERO, LexMsg::ZERO);
    for &(c, e) in ball.neighbors(0) {
        let d = ball.dir(0, c).expect("edge");
        let w = ball.edge(e).w;
        // the offer is order-reversing
        lo = lo.max_lex(sq.upper[d].offer(1, w));
        hi = hi.max_lex(sq.lower[d].offer(1, w));
    }
    let full = lo.cmp_lex(&hi) == Ordering::Equal;
    let level = |b| -> Result<u8> {
        let lv = macroscopic_sweep(ball, 1, b)?;
        Ok(ball.neighbors(0).iter().map(|&(c, _)| 1 - lv[ball.dir(0, c).expect("edge")]).max().unwrap_or(0))
    };
    let levels = level(LevelBoundary::Zero)? == level(LevelBoundary::One)?;
    Ok((full, levels))
}

/// Uncertified root fraction against ball radius.
pub fn run_decay(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let rep = macroscopic_law(&cfg.law)?;
    if rep.k != 1 {
        return Err(Error::Regime(format!("decay needs k = 1, law has k = {}", rep.k)).into());
    }
    let mut rec = ResultRecord::new(Experiment::Decay, cfg.describe());
    let mut rows = Vec::new();
    for h in cfg.h_min..=cfg.h_max {
        let flags: Vec<Result<(bool, bool)>> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let seed = replica_seed(cfg, h as u64, i as u64);
                let t = ubgw_tree(&cfg.law, Rooting::Vertex, h, seed.derive(0))?;
                let ball = assign_weights(&t, cfg.weights, seed.derive(1));
                root_certified(&ball)
            })
            .collect();
        let (mut full, mut levels) = (0, 0);
        for f in flags {
            let (a, b) = f?;
            full += usize::from(!a);
            levels += usize::from(!b);
        }
        let (pf, sf) = proportion(full, cfg.samples);
        let (pl, _) = proportion(levels, cfg.samples);
        rows.push(vec![h as f64, pf, sf, pl]);
    }
    let fit = |col: usize| {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r[col] > 0.0).map(|r| (r[0], r[col].ln())).collect();
        if pts.len() < 2 {
            return f64::NEG_INFINITY;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        ls_slope(&x, &y)
    };
    let slope = fit(1);
    let slope_levels = fit(3);
    let monotone = rows.windows(2).all(|w| w[1][1] <= w[0][1]);
    let bound = rep.rho.ln() + 0.1;
    let prov = "ln(rho) + 0.1, rho from genfn::rho_subcritical";
    if rows.len() >= 2 {
        rec.push(Metric::at_most("log_slope", slope, bound, prov));
        rec.push(Metric::holds("monotone_non_increasing", monotone));
    }
    rec.push(Metric::report("log_slope_levels", slope_levels, None));
    rec.push(
        Metric::report("log_slope_per_two_levels", 2.0 * slope, None)
            .with_note("contraction of the two-step operator is compared per pair of levels"),
    );
    for r in &rows {
        rec.push(Metric::report(&format!("uncertified_h{}", r[0] as usize), r[1], Some(r[2])));
    }
    rec.series.push(Series {
        name: "uncertified".into(),
        columns: vec!["h".into(), "uncertified".into(), "se".into(), "uncertified_levels".into()],
        rows,
    });
    Ok(rec)
}
