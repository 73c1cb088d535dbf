//! Run reports: sweep-point summaries, verdicts and the files written for them.

use super::config::{ExperimentConfig, Scenario};
use crate::error::Result;
use crate::eulerian::ScalarField;
use crate::io::{to_json_bytes, write_atomic, write_grid, xy_csv};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

/// A measured number against a configured threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
    /// The limiting statement the threshold stands in for.
    pub asymptotic_claim: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64, claim: &str) -> Self {
        let passed = match relation {
            Relation::AtLeast => measured >= threshold,
            Relation::AtMost => measured <= threshold,
        };
        Verdict { name: name.into(), measured, relation, threshold, passed, asymptotic_claim: claim.into() }
    }
}

/// One κ (or σ) of a sweep with its named measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub label: String,
    pub q: Option<usize>,
    pub kappa: Option<f64>,
    pub sigma: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
}

impl SweepPoint {
    pub fn new(label: impl Into<String>, q: Option<usize>, kappa: Option<f64>, sigma: Option<f64>) -> Self {
        SweepPoint { label: label.into(), q, kappa, sigma, metrics: BTreeMap::new() }
    }

    pub fn set(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    pub fn get(&self, key: &str) -> f64 {
        self.metrics.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// An `x,y` series written as its own CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub config: serde_json::Value,
    pub sweep: Vec<SweepPoint>,
    pub verdicts: Vec<Verdict>,
    pub plots: Vec<PlotData>,
    pub notes: Vec<String>,
    pub passed: bool,
    /// Per sweep point: `(label, csv)` of the time ledger.
    #[serde(skip)]
    pub ledgers: Vec<(String, String)>,
    /// Per sweep point: `(label, field, κ)` of the final scalar.
    #[serde(skip)]
    pub snapshots: Vec<(String, ScalarField, f64)>,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        RunReport {
            scenario: cfg.scenario,
            config: cfg.to_json(),
            sweep: Vec::new(),
            verdicts: Vec::new(),
            plots: Vec::new(),
            notes: Vec::new(),
            passed: false,
            ledgers: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn point(&self, label: &str) -> Option<&SweepPoint> {
        self.sweep.iter().find(|p| p.label == label)
    }

    pub fn finish(mut self) -> Self {
        self.passed = !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed);
        self
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let rel = match v.relation {
                Relation::AtLeast => ">=",
                Relation::AtMost => "<=",
            };
            out.push_str(&format!(
                "[{}] {}: {:.6e} {rel} {:.6e}\n",
                if v.passed { "pass" } else { "FAIL" },
                v.name,
                v.measured,
                v.threshold
            ));
        }
        out
    }

    /// `report.json`, one `ledger_<label>.csv` per sweep point, the plot
    /// CSVs and (when kept) the final grids. Every file is written atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("report.json"), &to_json_bytes(self)?)?;
        for (label, csv) in &self.ledgers {
            write_atomic(&dir.join(format!("ledger_{label}.csv")), csv.as_bytes())?;
        }
        for p in &self.plots {
            write_atomic(&dir.join(format!("{}.csv", p.name)), xy_csv(&p.x_label, &p.y_label, &p.points).as_bytes())?;
        }
        for (label, field, kappa) in &self.snapshots {
            write_grid(&dir.join(format!("snapshot_{label}")), field, *kappa)?;
        }
        Ok(())
    }
}
