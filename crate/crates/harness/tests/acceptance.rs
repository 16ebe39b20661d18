//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use lexmatch_core::bp::{extract_matching, sweep_tree};
use lexmatch_core::exact::{brute_force_opt, BRUTE_FORCE_MAX_EDGES};
use lexmatch_core::genfn::{rho_subcritical, OffspringLaw};
use lexmatch_core::randgraph::{assign_weights, ubgw_tree, Rooting, WeightLaw};
use lexmatch_core::{RngSeed, Root, WeightedGraph};
use xharness::experiments::{run_decay, run_eps_sweep, run_mandatory, run_separation, run_size, run_solve};
use xharness::{Experiment, ExperimentConfig, ResultRecord};

type Verdict = (bool, String);
type Outcome = Result<Verdict, String>;

fn cfg(exp: Experiment, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(exp);
    for (k, v) in pairs {
        c.set(k, v).expect("valid key");
    }
    c
}

/// Verdict over the named metrics, with their estimates.
fn verdict(rec: &ResultRecord, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        match rec.metric(n) {
            Some(m) => {
                ok &= m.pass == Some(true);
                let tag = match m.pass {
                    Some(true) => "ok",
                    Some(false) => "FAIL",
                    None => "-",
                };
                parts.push(format!("{n}={:.6} [{tag}]", m.estimate));
            }
            None => {
                ok = false;
                parts.push(format!("{n}=missing"));
            }
        }
    }
    (ok, parts.join(" "))
}

fn forest(seed: u64) -> WeightedGraph {
    let law = OffspringLaw::poisson(2.0).expect("law");
    let w = WeightLaw::uniform(0.0, 1.0).expect("law");
    let mut j = 0;
    loop {
        let s = RngSeed::new(seed, 0).derive(j);
        j += 1;
        let trees = 1 + (s.derive(7).seed as usize % 3);
        let mut edges = Vec::new();
        let mut n = 0;
        for t in 0..trees {
            let depth = 1 + (s.derive(8 + t as u64).seed as usize % 4);
            let tree = ubgw_tree(&law, Rooting::Vertex, depth, s.derive(t as u64)).expect("tree");
            edges.extend(tree.edges().iter().map(|e| (e.u + n, e.v + n, 0.0)));
            n += tree.n();
        }
        if edges.len() > BRUTE_FORCE_MAX_EDGES {
            continue;
        }
        let g = WeightedGraph::new(n, edges, Root::Vertex(0)).expect("forest");
        return assign_weights(&g, w, s.derive(99));
    }
}

fn c1() -> Outcome {
    let mut bad = 0;
    let count = 1000;
    for i in 0..count {
        let g = forest(i);
        let bp = extract_matching(&g, &sweep_tree(&g, 1).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let bf = brute_force_opt(&g).map_err(|e| e.to_string())?;
        if bp.edge_ids() != bf.edge_ids() || (bp.weight() - bf.weight()).abs() >= 1e-9 {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} mismatches in {count} forests")))
}

fn c2() -> Outcome {
    let rec = run_size(&cfg(Experiment::Size, &[("n", "20000"), ("replicas", "20")])).map_err(|e| e.to_string())?;
    Ok(verdict(&rec, &["matched_vertex_fraction"]))
}

fn c3() -> Outcome {
    let rho = |c: f64| rho_subcritical(&OffspringLaw::poisson(c).expect("law"), 200).expect("rho");
    let cases = [(1.0, (-1.0f64).exp(), 1e-6), (2.0, 2.0 / 1.0f64.exp(), 1e-6), (std::f64::consts::E, 1.0, 1e-3)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, want, tol) in cases {
        let got = rho(c);
        ok &= (got - want).abs() < tol;
        parts.push(format!("c={c:.4}: {got:.9} vs {want:.9}"));
    }
    Ok((ok, parts.join("; ")))
}

fn c4() -> Outcome {
    let c = cfg(Experiment::Decay, &[("h_min", "2"), ("h_max", "12"), ("samples", "10000")]);
    let rec = run_decay(&c).map_err(|e| e.to_string())?;
    let (ok, mut line) = verdict(&rec, &["log_slope", "monotone_non_increasing"]);
    if let Some(m) = rec.metric("log_slope_per_two_levels") {
        line.push_str(&format!(" per-two-levels={:.4}", m.estimate));
    }
    Ok((ok, line))
}

fn c5() -> Outcome {
    let c = cfg(Experiment::Mandatory, &[("depth", "12"), ("trees", "1000")]);
    let rec = run_mandatory(&c).map_err(|e| e.to_string())?;
    Ok(verdict(&rec, &["mandatory_density", "blocking_density", "enumeration_agreement"]))
}

fn c6_c7() -> Result<(Verdict, Verdict), String> {
    let c = cfg(Experiment::Solve, &[("grid_points", "4096"), ("samples", "100000")]);
    let (rec, _) = run_solve(&c).map_err(|e| e.to_string())?;
    Ok((
        verdict(&rec, &["plateau_l1", "conservation_residual", "size_atom_form", "size_f_pi_form"]),
        verdict(&rec, &["stationarity_tv", "population_level_tv"]),
    ))
}

fn c8() -> Outcome {
    let c = cfg(Experiment::EpsSweep, &[("trees", "500"), ("eps_max_exp", "12"), ("max_edges", "26")]);
    let rec = run_eps_sweep(&c).map_err(|e| e.to_string())?;
    Ok(verdict(&rec, &["agrees_below_gap", "final_disagreement"]))
}

fn c9() -> Outcome {
    let rec = run_separation(&cfg(Experiment::Separation, &[("p", "1")])).map_err(|e| e.to_string())?;
    Ok(verdict(&rec, &["weighted_root_matched", "uniform_root_matched", "weight_law_invariance"]))
}

fn c10() -> Outcome {
    let args: Vec<String> = ["lexmatch", "check"].iter().map(|s| s.to_string()).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = xharness::cli::run(&args, &mut out, &mut err);
    Ok((code == 0, format!("check exit code {code}")))
}

fn report(n: usize, budget: Option<Duration>, elapsed: Duration, outcome: Outcome) -> bool {
    let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = ok && in_time;
    let limit = budget.map(|b| format!(" (budget {}s)", b.as_secs())).unwrap_or_default();
    println!(
        "criterion {n}: {} {detail} runtime={:.1}s{limit}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    let (r, d) = timed(c1);
    all &= report(1, Some(secs(60)), d, r);
    let (r, d) = timed(c2);
    all &= report(2, Some(secs(120)), d, r);
    let (r, d) = timed(c3);
    all &= report(3, Some(secs(10)), d, r);
    let (r, d) = timed(c4);
    all &= report(4, Some(secs(300)), d, r);
    let (r, d) = timed(c5);
    all &= report(5, Some(secs(300)), d, r);
    let (r, d) = timed(c6_c7);
    match r {
        Ok((a, b)) => {
            all &= report(6, Some(secs(120)), d, Ok(a));
            all &= report(7, None, d, Ok(b));
        }
        Err(e) => {
            all &= report(6, Some(secs(120)), d, Err(e.clone()));
            all &= report(7, None, d, Err(e));
        }
    }
    let (r, d) = timed(c8);
    all &= report(8, None, d, r);
    let (r, d) = timed(c9);
    all &= report(9, None, d, r);
    let (r, d) = timed(c10);
    all &= report(10, None, d, r);
    if !all {
        std::process::exit(1);
    }
}
