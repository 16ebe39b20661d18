//! Command-line front end.
//!
//! Exit codes: 0 when every metric passes or none carries a verdict, 2 when a
//! tolerance check fails, 1 on usage or runtime errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lexmatch_core::bp::{extract_matching, sweep_tree};
use lexmatch_core::exact::perf_of;
use lexmatch_core::randgraph::{assign_weights, ubgw_tree, Rooting};
use lexmatch_core::WeightedGraph;

use crate::check::run_check;
use crate::config::{Experiment, ExperimentConfig, GraphKind};
use crate::error::{HarnessError, Result};
use crate::experiments::{
    replica_seed, run_decay, run_eps_sweep, run_mandatory, run_separation, run_size, run_solve, sample_graph,
};
use crate::record::{Metric, ResultRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lexmatch", version, about = "Lexicographic matchings on sparse random graphs")]
pub struct Cli {
    /// Config file of `key = value` lines, applied before flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for result files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a weighted graph and write it as text.
    Gen(Params),
    /// Lexicographic matching of a forest read from --graph.
    Match(Params),
    /// Solve the CDF system.
    Solve(Params),
    /// Matched-vertex fraction on large random graphs.
    Size(Params),
    /// Decay of boundary influence with ball radius.
    Decay(Params),
    /// Mandatory and blocking edge frequencies.
    Mandatory(Params),
    /// Weighted versus uniform maximum matching on star-of-stars.
    Separation(Params),
    /// Scalar relaxation against the lexicographic optimum.
    EpsSweep(Params),
    /// Structural property suite.
    Check(Params),
}

/// Flags mapping one-to-one onto config keys.
#[derive(Debug, Args, Default)]
pub struct Params {
    /// Offspring law, e.g. poisson:1.
    #[arg(long)]
    pub law: Option<String>,
    /// Weight law, e.g. uniform:0:1.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub weights_alt: Option<String>,
    /// er, config or ubgw.
    #[arg(long = "graph-kind")]
    pub graph: Option<String>,
    /// Input graph file.
    #[arg(long = "graph")]
    pub graph_file: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub h_min: Option<String>,
    #[arg(long)]
    pub h_max: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub trees: Option<String>,
    #[arg(long)]
    pub max_edges: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub eps_min_exp: Option<String>,
    #[arg(long)]
    pub eps_max_exp: Option<String>,
    #[arg(long)]
    pub grid_points: Option<String>,
    #[arg(long)]
    pub t_max: Option<String>,
    #[arg(long)]
    pub pool: Option<String>,
    #[arg(long)]
    pub pool_iters: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub probe: bool,
}

impl Params {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let opts = [
            ("law", &self.law),
            ("weights", &self.weights),
            ("weights_alt", &self.weights_alt),
            ("graph", &self.graph),
            ("graph_file", &self.graph_file),
            ("n", &self.n),
            ("depth", &self.depth),
            ("h_min", &self.h_min),
            ("h_max", &self.h_max),
            ("replicas", &self.replicas),
            ("samples", &self.samples),
            ("trees", &self.trees),
            ("max_edges", &self.max_edges),
            ("p", &self.p),
            ("k", &self.k),
            ("eps_min_exp", &self.eps_min_exp),
            ("eps_max_exp", &self.eps_max_exp),
            ("grid_points", &self.grid_points),
            ("t_max", &self.t_max),
            ("pool", &self.pool),
            ("pool_iters", &self.pool_iters),
            ("tolerance", &self.tolerance),
        ];
        let mut v: Vec<(&'static str, &str)> =
            opts.into_iter().filter_map(|(k, v)| v.as_deref().map(|x| (k, x))).collect();
        if self.probe {
            v.push(("probe", "true"));
        }
        v
    }
}

impl Command {
    fn split(&self) -> (Experiment, &Params) {
        match self {
            Command::Gen(p) => (Experiment::Gen, p),
            Command::Match(p) => (Experiment::Match, p),
            Command::Solve(p) => (Experiment::Solve, p),
            Command::Size(p) => (Experiment::Size, p),
            Command::Decay(p) => (Experiment::Decay, p),
            Command::Mandatory(p) => (Experiment::Mandatory, p),
            Command::Separation(p) => (Experiment::Separation, p),
            Command::EpsSweep(p) => (Experiment::EpsSweep, p),
            Command::Check(p) => (Experiment::Check, p),
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let (exp, params) = cli.command.split();
    let mut cfg = ExperimentConfig::defaults(exp);
    if let Some(path) = &cli.config {
        cfg.apply_text(&fs::read_to_string(path)?)?;
        if cfg.experiment != exp {
            return Err(HarnessError::Value {
                key: "experiment".into(),
                msg: format!("config file is for `{}`, command is `{exp}`", cfg.experiment),
            });
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = &cli.format {
        cfg.set("format", f)?;
    }
    for (k, v) in params.pairs() {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn generate(cfg: &ExperimentConfig) -> Result<WeightedGraph> {
    let g = match cfg.graph {
        GraphKind::Ubgw => ubgw_tree(&cfg.law, Rooting::Vertex, cfg.depth, replica_seed(cfg, 0, 0))?,
        _ => sample_graph(cfg, 0)?,
    };
    Ok(assign_weights(&g, cfg.weights, replica_seed(cfg, 1, 0)))
}

fn run_gen(cfg: &ExperimentConfig) -> Result<(ResultRecord, String)> {
    let g = generate(cfg)?;
    let text = g.to_text();
    let mut rec = ResultRecord::new(Experiment::Gen, cfg.describe());
    rec.push(Metric::report("vertices", g.n() as f64, None));
    rec.push(Metric::report("edges", g.m() as f64, None));
    Ok((rec, text))
}

fn run_match(cfg: &ExperimentConfig) -> Result<(ResultRecord, String)> {
    let path = cfg
        .graph_file
        .as_ref()
        .ok_or_else(|| HarnessError::Value { key: "graph_file".into(), msg: "match needs --graph".into() })?;
    let g = WeightedGraph::from_text(&fs::read_to_string(path)?)?;
    let k = cfg.k.unwrap_or(1);
    let m = extract_matching(&g, &sweep_tree(&g, k)?)?;
    let mut rec = ResultRecord::new(Experiment::Match, cfg.describe());
    rec.parameters.insert("graph_file".into(), path.display().to_string());
    rec.parameters.insert("k".into(), k.to_string());
    rec.push(Metric::report("size", m.size() as f64, None));
    rec.push(Metric::report("weight", m.weight(), None));
    if g.n() > 0 {
        let p = perf_of(&g, &m)?;
        rec.push(Metric::report("perf_vertex_match_prob", p.vertex.match_prob, None));
        rec.push(Metric::report("perf_vertex_expected_weight", p.vertex.expected_weight, None));
        if g.m() > 0 {
            rec.push(Metric::report("perf_edge_match_prob", p.edge.match_prob, None));
            rec.push(Metric::report("perf_edge_expected_weight", p.edge.expected_weight, None));
        }
    }
    Ok((rec, m.to_text()))
}

/// Run one parsed command; returns the record and an optional artifact
/// (file name, contents).
pub fn execute(cfg: &ExperimentConfig) -> Result<(ResultRecord, Option<(&'static str, String)>)> {
    Ok(match cfg.experiment {
        Experiment::Gen => {
            let (r, t) = run_gen(cfg)?;
            (r, Some(("graph.txt", t)))
        }
        Experiment::Match => {
            let (r, t) = run_match(cfg)?;
            (r, Some(("matching.txt", t)))
        }
        Experiment::Solve => (run_solve(cfg)?.0, None),
        Experiment::Size => (run_size(cfg)?, None),
        Experiment::Decay => (run_decay(cfg)?, None),
        Experiment::Mandatory => (run_mandatory(cfg)?, None),
        Experiment::Separation => (run_separation(cfg)?, None),
        Experiment::EpsSweep => (run_eps_sweep(cfg)?, None),
        Experiment::Check => (run_check(cfg)?, None),
    })
}

fn run_inner(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = build_config(cli)?;
    let (rec, artifact) = execute(&cfg)?;
    if let Some(dir) = &cfg.out {
        rec.write_to(dir)?;
        if let Some((name, text)) = &artifact {
            fs::write(dir.join(name), text)?;
        }
    }
    match (&artifact, &cfg.out) {
        // without an output directory the artifact itself goes to stdout
        (Some((_, text)), None) => write!(out, "{text}")?,
        _ => writeln!(out, "{}", rec.render(cfg.format)?)?,
    }
    Ok(if rec.passed() == Some(false) { EXIT_FAIL } else { EXIT_OK })
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match run_inner(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
