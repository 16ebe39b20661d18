//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Later assignments override earlier
//! ones, and command-line flags are applied after the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lexmatch_core::genfn::OffspringLaw;
use lexmatch_core::randgraph::WeightLaw;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Size,
    Decay,
    Mandatory,
    Separation,
    EpsSweep,
    Solve,
    Gen,
    Match,
    Check,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Size,
        Experiment::Decay,
        Experiment::Mandatory,
        Experiment::Separation,
        Experiment::EpsSweep,
        Experiment::Solve,
        Experiment::Gen,
        Experiment::Match,
        Experiment::Check,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Size => "size",
            Experiment::Decay => "decay",
            Experiment::Mandatory => "mandatory",
            Experiment::Separation => "separation",
            Experiment::EpsSweep => "eps-sweep",
            Experiment::Solve => "solve",
            Experiment::Gen => "gen",
            Experiment::Match => "match",
            Experiment::Check => "check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    ErdosRenyi,
    Configuration,
    Ubgw,
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "er" => Ok(GraphKind::ErdosRenyi),
            "config" => Ok(GraphKind::Configuration),
            "ubgw" => Ok(GraphKind::Ubgw),
            _ => Err(format!("unknown graph kind `{s}` (er, config, ubgw)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (csv, json)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub law: OffspringLaw,
    pub weights: WeightLaw,
    /// Second weight law (separation invariance check).
    pub weights_alt: WeightLaw,
    pub graph: GraphKind,
    pub n: usize,
    pub depth: usize,
    pub h_min: usize,
    pub h_max: usize,
    pub replicas: usize,
    pub samples: usize,
    pub trees: usize,
    pub max_edges: usize,
    pub seed: u64,
    pub p: usize,
    pub k: Option<u32>,
    pub eps_min_exp: u32,
    pub eps_max_exp: u32,
    pub grid_points: usize,
    pub t_max: Option<f64>,
    pub pool: usize,
    pub pool_iters: usize,
    pub tolerance: Option<f64>,
    pub probe: bool,
    pub graph_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let poisson1 = OffspringLaw::poisson(1.0).expect("valid law");
        let mut c = Self {
            experiment,
            law: poisson1,
            weights: WeightLaw::uniform(0.0, 1.0).expect("valid law"),
            weights_alt: WeightLaw::exponential(1.0).expect("valid law"),
            graph: GraphKind::ErdosRenyi,
            n: 20_000,
            depth: 12,
            h_min: 2,
            h_max: 12,
            replicas: 20,
            samples: 10_000,
            trees: 500,
            max_edges: 20,
            seed: 1,
            p: 1,
            k: None,
            eps_min_exp: 1,
            eps_max_exp: 12,
            grid_points: 4096,
            t_max: None,
            pool: 20_000,
            pool_iters: 60,
            tolerance: None,
            probe: false,
            graph_file: None,
            out: None,
            format: Format::Json,
        };
        match experiment {
            Experiment::Separation => c.samples = 20_000,
            Experiment::Solve => c.samples = 100_000,
            Experiment::Check => c.samples = 300,
            Experiment::Gen => c.graph = GraphKind::Ubgw,
            _ => {}
        }
        c
    }

    /// Apply one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |msg: String| HarnessError::Value { key: key.to_string(), msg };
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        match key {
            "experiment" => self.experiment = value.parse().map_err(bad)?,
            "law" => self.law = value.parse().map_err(|e: lexmatch_core::Error| bad(e.to_string()))?,
            "weights" => self.weights = value.parse().map_err(|e: lexmatch_core::Error| bad(e.to_string()))?,
            "weights_alt" => self.weights_alt = value.parse().map_err(|e: lexmatch_core::Error| bad(e.to_string()))?,
            "graph" => self.graph = value.parse().map_err(bad)?,
            "n" => self.n = num(value).map_err(bad)?,
            "depth" => self.depth = num(value).map_err(bad)?,
            "h_min" => self.h_min = num(value).map_err(bad)?,
            "h_max" => self.h_max = num(value).map_err(bad)?,
            "replicas" => self.replicas = num(value).map_err(bad)?,
            "samples" => self.samples = num(value).map_err(bad)?,
            "trees" => self.trees = num(value).map_err(bad)?,
            "max_edges" => self.max_edges = num(value).map_err(bad)?,
            "seed" => self.seed = num(value).map_err(bad)?,
            "p" => self.p = num(value).map_err(bad)?,
            "k" => self.k = Some(num(value).map_err(bad)?),
            "eps_min_exp" => self.eps_min_exp = num(value).map_err(bad)?,
            "eps_max_exp" => self.eps_max_exp = num(value).map_err(bad)?,
            "grid_points" => self.grid_points = num(value).map_err(bad)?,
            "t_max" => self.t_max = Some(num(value).map_err(bad)?),
            "pool" => self.pool = num(value).map_err(bad)?,
            "pool_iters" => self.pool_iters = num(value).map_err(bad)?,
            "tolerance" => self.tolerance = Some(num(value).map_err(bad)?),
            "probe" => self.probe = num(value).map_err(bad)?,
            "graph_file" => self.graph_file = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse().map_err(bad)?,
            _ => return Err(bad("unknown key".into())),
        }
        Ok(())
    }

    /// Parse `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Config {
                line: i + 1,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| HarnessError::Config { line: i + 1, msg: e.to_string() })?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(HarnessError::Value { key: key.into(), msg: msg.into() });
        if self.replicas == 0 {
            return bad("replicas", "must be at least 1");
        }
        if self.h_min > self.h_max {
            return bad("h_min", "must not exceed h_max");
        }
        if self.eps_min_exp > self.eps_max_exp {
            return bad("eps_min_exp", "must not exceed eps_max_exp");
        }
        Ok(())
    }

    /// Parameters echoed into result records.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("law", self.law.to_string());
        put("weights", self.weights.to_string());
        put("seed", self.seed.to_string());
        match self.experiment {
            Experiment::Size => {
                put("graph", format!("{:?}", self.graph));
                put("n", self.n.to_string());
                put("replicas", self.replicas.to_string());
            }
            Experiment::Decay => {
                put("h_min", self.h_min.to_string());
                put("h_max", self.h_max.to_string());
                put("samples", self.samples.to_string());
            }
            Experiment::Mandatory => {
                put("depth", self.depth.to_string());
                put("samples", self.samples.to_string());
                put("trees", self.trees.to_string());
            }
            Experiment::Separation => {
                put("p", self.p.to_string());
                put("weights_alt", self.weights_alt.to_string());
                put("samples", self.samples.to_string());
            }
            Experiment::EpsSweep => {
                put("trees", self.trees.to_string());
                put("eps", format!("2^-{}..2^-{}", self.eps_min_exp, self.eps_max_exp));
            }
            Experiment::Solve => {
                put("grid_points", self.grid_points.to_string());
                put("samples", self.samples.to_string());
                put("pool", self.pool.to_string());
            }
            Experiment::Gen => {
                put("graph", format!("{:?}", self.graph));
                put("n", self.n.to_string());
                put("depth", self.depth.to_string());
            }
            Experiment::Match | Experiment::Check => {
                put("samples", self.samples.to_string());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut c = ExperimentConfig::defaults(Experiment::Size);
        c.apply_text("# comment\nlaw = poisson:2\nn=500\n\nreplicas = 3\nn = 600\n").unwrap();
        assert_eq!(c.n, 600);
        assert_eq!(c.replicas, 3);
        assert_eq!(c.law.to_string(), "poisson:2");
    }

    #[test]
    fn rejects_bad_lines() {
        let mut c = ExperimentConfig::defaults(Experiment::Size);
        assert!(matches!(c.apply_text("n 5"), Err(HarnessError::Config { line: 1, .. })));
        assert!(matches!(c.apply_text("\nbogus = 1"), Err(HarnessError::Config { line: 2, .. })));
        assert!(c.apply_text("replicas = 0").is_err());
        assert!(c.apply_text("law = poisson:-1").is_err());
    }
}
