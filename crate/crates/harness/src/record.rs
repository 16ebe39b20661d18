//! Versioned result records and their CSV / JSON forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{Experiment, Format};
use crate::error::Result;

pub const SCHEMA: &str = "v1";

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Reference {
    pub value: f64,
    /// Formula and module the value comes from.
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// |estimate - reference| < max(tolerance, 3 SE).
    Within,
    /// estimate <= bound.
    AtMost,
    /// estimate >= bound.
    AtLeast,
    /// Boolean property, estimate is 1 or 0.
    Holds,
    /// Reported only.
    Report,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Metric {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub reference: Option<Reference>,
    pub tolerance: Option<f64>,
    pub rule: Rule,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Metric {
    pub fn within(name: &str, estimate: f64, se: Option<f64>, reference: f64, provenance: &str, tol: f64) -> Self {
        let slack = tol.max(3.0 * se.filter(|s| s.is_finite()).unwrap_or(0.0));
        Self {
            name: name.into(),
            estimate,
            se,
            reference: Some(Reference { value: reference, provenance: provenance.into() }),
            tolerance: Some(tol),
            rule: Rule::Within,
            pass: Some((estimate - reference).abs() < slack),
            note: None,
        }
    }

    pub fn at_most(name: &str, estimate: f64, bound: f64, provenance: &str) -> Self {
        Self::bound(name, estimate, bound, provenance, Rule::AtMost, estimate <= bound)
    }

    pub fn at_least(name: &str, estimate: f64, bound: f64, provenance: &str) -> Self {
        Self::bound(name, estimate, bound, provenance, Rule::AtLeast, estimate >= bound)
    }

    fn bound(name: &str, estimate: f64, bound: f64, provenance: &str, rule: Rule, pass: bool) -> Self {
        Self {
            name: name.into(),
            estimate,
            se: None,
            reference: Some(Reference { value: bound, provenance: provenance.into() }),
            tolerance: None,
            rule,
            pass: Some(pass),
            note: None,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            estimate: if ok { 1.0 } else { 0.0 },
            se: None,
            reference: None,
            tolerance: None,
            rule: Rule::Holds,
            pass: Some(ok),
            note: None,
        }
    }

    pub fn report(name: &str, estimate: f64, se: Option<f64>) -> Self {
        Self {
            name: name.into(),
            estimate,
            se,
            reference: None,
            tolerance: None,
            rule: Rule::Report,
            pass: None,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A plot-ready table attached to a record.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResultRecord {
    pub schema: &'static str,
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub metrics: Vec<Metric>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

impl ResultRecord {
    pub fn new(experiment: Experiment, parameters: BTreeMap<String, String>) -> Self {
        Self {
            schema: SCHEMA,
            experiment: experiment.name().into(),
            parameters,
            metrics: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// None when no metric carries a verdict.
    pub fn passed(&self) -> Option<bool> {
        let verdicts: Vec<bool> = self.metrics.iter().filter_map(|m| m.pass).collect();
        (!verdicts.is_empty()).then(|| verdicts.iter().all(|&p| p))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# lexmatch-result {SCHEMA} experiment={}\n", self.experiment);
        s.push_str("metric,estimate,se,reference,tolerance,rule,pass,provenance\n");
        let opt = |x: Option<f64>| x.map(fmt_f).unwrap_or_default();
        for m in &self.metrics {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                m.name,
                fmt_f(m.estimate),
                opt(m.se),
                opt(m.reference.as_ref().map(|r| r.value)),
                opt(m.tolerance),
                serde_json::to_value(m.rule).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                m.pass.map(|p| p.to_string()).unwrap_or_default(),
                m.reference.as_ref().map(|r| r.provenance.replace(',', ";")).unwrap_or_default(),
            );
        }
        s
    }

    pub fn series_csv(series: &Series) -> String {
        let mut s = format!("# lexmatch-series {SCHEMA} {}\n{}\n", series.name, series.columns.join(","));
        for row in &series.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => Ok(self.to_csv()),
        }
    }

    /// `<experiment>.json`, `<experiment>.csv` and one CSV per series.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", self.experiment)), self.to_json()?)?;
        fs::write(dir.join(format!("{}.csv", self.experiment)), self.to_csv())?;
        for s in &self.series {
            fs::write(dir.join(format!("{}_{}.csv", self.experiment, s.name)), Self::series_csv(s))?;
        }
        Ok(())
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.10}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn within_uses_three_se() {
        assert!(Metric::within("a", 1.05, Some(0.02), 1.0, "x", 0.01).pass.unwrap());
        assert!(!Metric::within("a", 1.05, Some(0.01), 1.0, "x", 0.01).pass.unwrap());
        assert!(Metric::within("a", 1.005, None, 1.0, "x", 0.01).pass.unwrap());
    }

    #[test]
    fn verdicts() {
        let mut r = ResultRecord::new(Experiment::Size, BTreeMap::new());
        assert_eq!(r.passed(), None);
        r.push(Metric::report("r", 1.0, None));
        assert_eq!(r.passed(), None);
        r.push(Metric::holds("h", true));
        assert_eq!(r.passed(), Some(true));
        r.push(Metric::at_most("b", 2.0, 1.0, "x"));
        assert_eq!(r.passed(), Some(false));
        let csv = r.to_csv();
        assert!(csv.starts_with("# lexmatch-result v1"));
        assert_eq!(csv.lines().count(), 2 + 3);
    }
}
