use std::fs;

use lexmatch_core::bp::LexMsg;
use lexmatch_core::genfn::{macroscopic_law, matching_vertex_density};
use lexmatch_core::rde::{
    conservation_check, kolmogorov_distance, population_dynamics, recursion_step, size_from_system, solve_system,
    tv_distance, zeta_prime, CdfSystem, GridSpec, SolverOptions, ZetaSampler,
};

use super::replica_seed;
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::record::{Metric, ResultRecord};

fn level_law(msgs: &[LexMsg], k: u32) -> Vec<f64> {
    let mut m = vec![0.0; k as usize + 1];
    for x in msgs {
        if let Some(l) = x.level() {
            m[l as usize] += 1.0 / msgs.len() as f64;
        }
    }
    m
}

fn draws(z: &ZetaSampler, n: usize, cfg: &ExperimentConfig, stage: u64) -> Vec<LexMsg> {
    let mut rng = replica_seed(cfg, stage, 0).rng();
    (0..n).map(|_| z.sample(&mut rng)).collect()
}

/// Solve the CDF system and check its identities, stationarity of the
/// boundary law and agreement with population dynamics.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<(ResultRecord, CdfSystem)> {
    let rep = macroscopic_law(&cfg.law)?;
    let k = cfg.k.unwrap_or(rep.k as u32) as usize;
    let grid = match cfg.t_max {
        Some(t) => GridSpec::new(t, cfg.grid_points)?,
        None => GridSpec::new(GridSpec::for_mean_weight(cfg.weights.mean()).t_max, cfg.grid_points)?,
    };
    let sys = solve_system(&cfg.law, cfg.weights, k, grid, SolverOptions::default())?;
    let mut rec = ResultRecord::new(Experiment::Solve, cfg.describe());
    if let Some(w) = &sys.regime_warning {
        rec.notes.push(w.clone());
    }
    rec.push(Metric::report("iterations", sys.residuals.len() as f64, None));
    rec.push(Metric::report("beta", sys.beta(), None));
    let l = sys.plateaus();
    let pl = rep.plateaus();
    for j in 1..=k {
        let name = format!("plateau_l{j}");
        match pl.get(j - 1) {
            Some(&r) if k == rep.k => {
                rec.push(Metric::within(&name, l[j], None, r, "genfn::macroscopic_law plateaus", 1e-4))
            }
            _ => rec.push(Metric::report(&name, l[j], None)),
        }
    }
    rec.push(Metric::at_most("boundary_defect", sys.boundary_defect(), 1e-5, "limit and stitching conditions"));
    let cons = conservation_check(&sys, &cfg.law);
    rec.push(Metric::at_most("conservation_residual", cons.max_abs(), 2e-3, "atom-zero and balance identities"));
    let size = size_from_system(&sys, &cfg.law)?;
    let size_ref = matching_vertex_density(&cfg.law) / cfg.law.mean();
    rec.push(Metric::within("size_atom_form", size.atom_form, None, size_ref, "genfn (2 - max F_pi) / phi'(1)", 2e-3));
    rec.push(Metric::within("size_f_pi_form", size.f_pi_form, None, size.atom_form, "atom form of the size", 2e-3));

    if cfg.samples > 0 {
        let zs = zeta_prime(&sys);
        let kk = k as u32;
        let input = draws(&zs, cfg.samples, cfg, 10);
        let kids = cfg.law.size_biased_sampler();
        let mut rng = replica_seed(cfg, 11, 0).rng();
        let output: Vec<LexMsg> = (0..cfg.samples)
            .map(|_| {
                let c = kids.sample(&mut rng);
                recursion_step(kk, c, cfg.weights, &mut rng, |r| zs.sample(r))
            })
            .collect();
        let tv = tv_distance(&level_law(&input, kk), &level_law(&output, kk));
        rec.push(Metric::at_most("stationarity_tv", tv, 0.02, "one recursion step preserves the boundary law"));

        let pd = population_dynamics(&cfg.law, cfg.weights, kk, cfg.pool, cfg.pool_iters, replica_seed(cfg, 12, 0))?;
        let tv_pd = tv_distance(&pd.level_masses(), &zs.level_masses());
        rec.push(Metric::at_most("population_level_tv", tv_pd, 0.02, "grid solver level masses"));
        let a = draws(&pd, cfg.samples.min(50_000), cfg, 13);
        let b = draws(&zs, cfg.samples.min(50_000), cfg, 14);
        let ks = (0..=kk)
            .map(|lvl| {
                let za: Vec<f64> = a.iter().filter(|m| m.level() == Some(lvl)).filter_map(|m| m.z()).collect();
                let zb: Vec<f64> = b.iter().filter(|m| m.level() == Some(lvl)).filter_map(|m| m.z()).collect();
                kolmogorov_distance(&za, &zb)
            })
            .fold(0.0, f64::max);
        rec.push(Metric::at_most("population_z_kolmogorov", ks, 0.03, "grid solver z-marginals"));
    }
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("cdf_system.csv"), sys.to_csv())?;
    }
    Ok((rec, sys))
}
