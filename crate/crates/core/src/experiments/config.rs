//! Experiment configuration: per-scenario defaults, TOML files on top of them
//! and dotted-key overrides on top of that.

use crate::error::{LabError, Result};
use crate::params::{derive_schedule, presets, CascadeSchedule, ParameterSet};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "theorem_A")]
    TheoremA,
    #[serde(rename = "theorem_B")]
    TheoremB,
    #[serde(rename = "theorem_C")]
    TheoremC,
    #[serde(rename = "regularity")]
    Regularity,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::TheoremA, Scenario::TheoremB, Scenario::TheoremC, Scenario::Regularity];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TheoremA => "theorem_A",
            Scenario::TheoremB => "theorem_B",
            Scenario::TheoremC => "theorem_C",
            Scenario::Regularity => "regularity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|c| c.name()).collect();
            LabError::Config(format!("unknown scenario `{s}` (expected one of: {})", names.join(", ")))
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub q_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    /// Nodes required per mollifier length of the finest active profile.
    pub collar_points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Particles per Monte Carlo estimate.
    pub n_mc: usize,
    /// Brownian paths per Lipschitz probe set.
    pub n_omega: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Levels q the sweep visits.
    pub levels: Vec<usize>,
    /// Target of κλ_q²t̄_q for the dissipative diffusivity.
    pub dissipate_group: f64,
    /// Target of κλ_q²T_q for the conservative diffusivity.
    pub survive_group: f64,
    /// Convolution width σ_q as a multiple of a_q.
    pub sigma_fraction: f64,
    /// Repeat the convolution sweep with doubled particles and halved RK4 steps.
    pub sensitivity: bool,
}

/// Desk thresholds; each stands in for an asymptotic statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Idle-window dissipation as a fraction of the initial energy.
    pub dissipated_fraction: f64,
    /// Energy lost before the idle window, as a fraction.
    pub pre_window_loss: f64,
    /// Idle-window loss allowed for the conservative diffusivity.
    pub conservative_window_loss: f64,
    pub close_flows_max: f64,
    pub dissipate_min: f64,
    /// Final norm of the conservative branch, relative to the initial norm.
    pub survive_norm: f64,
    /// Final norm of the dissipative branch, relative to the initial norm.
    pub dissipate_norm: f64,
    /// Relative pairing drift allowed on the conservative branch.
    pub pairing_tolerance: f64,
    /// Sup-norm distance allowed for the exact reversal at κ = 0.
    pub reversal_tolerance: f64,
    pub min_pairing: f64,
    /// Norm ratio to the κ = 0 run.
    pub uniform_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            dissipated_fraction: 0.5,
            pre_window_loss: 0.1,
            conservative_window_loss: 0.1,
            close_flows_max: 1e-2,
            dissipate_min: 5.0,
            survive_norm: 0.9,
            dissipate_norm: 0.5,
            pairing_tolerance: 0.1,
            reversal_tolerance: 1e-8,
            min_pairing: 0.2,
            uniform_ratio: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Also write grid snapshots of the final fields.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub preset: String,
    pub seed: u64,
    pub schedule: ScheduleSection,
    pub grid: GridSection,
    pub ensemble: EnsembleSection,
    pub sweep: SweepSection,
    pub thresholds: Thresholds,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Defaults that make each scenario run as shipped.
    pub fn defaults(scenario: Scenario) -> Self {
        let (preset, q_max, levels, survive) = match scenario {
            Scenario::TheoremA => ("desk_dissipation", 2, vec![0, 2], 1e-8),
            Scenario::TheoremB => ("desk_dissipation", 2, vec![0, 2], 1e-8),
            Scenario::TheoremC => ("desk_selection", 4, vec![0, 1, 2, 3], 1e-5),
            Scenario::Regularity => ("desk_regularity", 2, vec![1], 1e-5),
        };
        ExperimentConfig {
            scenario,
            preset: preset.into(),
            seed: 20240601,
            schedule: ScheduleSection { q_max },
            grid: GridSection { n: 512, collar_points: 1.0 },
            ensemble: EnsembleSection { n_mc: 4000, n_omega: 1000, probes: 16 },
            sweep: SweepSection {
                levels,
                dissipate_group: 5.0,
                survive_group: survive,
                sigma_fraction: 1.0 / 16.0,
                sensitivity: true,
            },
            thresholds: Thresholds::default(),
            output: OutputSection { dir: format!("out/{}", scenario.name()), snapshots: false },
        }
    }

    /// Every dotted key a configuration may set.
    pub fn valid_keys() -> Vec<String> {
        let table = to_table(&ExperimentConfig::defaults(Scenario::TheoremA)).expect("defaults serialise");
        let mut keys = Vec::new();
        flatten_keys(&table, "", &mut keys);
        keys
    }

    /// Parses a TOML document over the scenario defaults, then applies
    /// `key=value` overrides. The scenario comes from `scenario` when given,
    /// otherwise from the document (theorem_A when it names none). Only key
    /// names and types are checked here; [`ExperimentConfig::check`] does the rest.
    pub fn from_toml(text: &str, scenario: Option<Scenario>, overrides: &[(String, String)]) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e| LabError::Config(format!("config is not valid TOML: {e}")))?;
        let valid = Self::valid_keys();
        let mut user_keys = Vec::new();
        flatten_keys(&user, "", &mut user_keys);
        for k in user_keys.iter().chain(overrides.iter().map(|(k, _)| k)) {
            if !valid.contains(k) {
                return Err(unknown_key(k, &valid));
            }
        }
        let mut scenario = match scenario {
            Some(s) => s,
            None => match user.get("scenario") {
                Some(toml::Value::String(s)) => Scenario::parse(s)?,
                Some(_) => return Err(LabError::Config("`scenario` must be a string".into())),
                None => Scenario::TheoremA,
            },
        };
        if let Some((_, v)) = overrides.iter().find(|(k, _)| k == "scenario") {
            scenario = Scenario::parse(v.trim_matches('"'))?;
        }
        let mut merged = to_table(&ExperimentConfig::defaults(scenario))?;
        merge(&mut merged, &user);
        merged.insert("scenario".into(), toml::Value::String(scenario.name().into()));
        for (k, v) in overrides {
            if k != "scenario" {
                set_dotted(&mut merged, k, parse_value(v));
            }
        }
        let cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e| LabError::Config(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.output.dir)
    }

    pub fn params(&self) -> Result<ParameterSet> {
        presets::by_name(&self.preset).ok_or_else(|| {
            LabError::Config(format!(
                "unknown preset `{}` (expected one of: {})",
                self.preset,
                presets::NAMES.join(", ")
            ))
        })
    }

    pub fn schedule(&self) -> Result<CascadeSchedule> {
        let p = self.params()?;
        Ok(derive_schedule(&p, self.schedule.q_max)?.desk()?.clone())
    }

    /// Field-independent consistency checks, including grid admission for
    /// the deepest active level of the grid-based scenarios.
    pub fn check(&self) -> Result<()> {
        let sched = self.schedule()?;
        if sched.q_max == 0 {
            return Err(LabError::DegenerateField(
                "schedule.q_max = 0 leaves no active level, so the field vanishes identically".into(),
            ));
        }
        if self.sweep.levels.is_empty() {
            return Err(LabError::Config("sweep.levels is empty".into()));
        }
        let deepest_active = sched.q_max - 1;
        for &q in &self.sweep.levels {
            let limit = match self.scenario {
                Scenario::TheoremA | Scenario::TheoremB => sched.q_max,
                _ => deepest_active,
            };
            if q > limit {
                return Err(LabError::Config(format!("sweep level {q} is beyond {limit} for q_max = {}", sched.q_max)));
            }
            if matches!(self.scenario, Scenario::TheoremA) && q % sched.m as usize != 0 {
                return Err(LabError::Config(format!(
                    "sweep level {q} has no idle window (idle levels are multiples of m = {})",
                    sched.m
                )));
            }
        }
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LabError::Config(format!("{name} must be positive")))
            }
        };
        positive("sweep.dissipate_group", self.sweep.dissipate_group)?;
        positive("sweep.survive_group", self.sweep.survive_group)?;
        positive("sweep.sigma_fraction", self.sweep.sigma_fraction)?;
        positive("grid.collar_points", self.grid.collar_points)?;
        match self.scenario {
            Scenario::TheoremC => {
                if self.ensemble.n_mc < 100 {
                    return Err(LabError::Config("ensemble.n_mc must be at least 100".into()));
                }
            }
            _ => {
                if !self.grid.n.is_power_of_two() || self.grid.n < 8 {
                    return Err(LabError::Config("grid.n must be a power of two, at least 8".into()));
                }
                let ell = sched.levels[deepest_active + 1].ell;
                let need = self.grid.collar_points / ell;
                if (self.grid.n as f64) < need {
                    return Err(LabError::Resolution(format!(
                        "grid.n = {} gives fewer than {} nodes per collar at level {deepest_active} (needs N >= {need:.0})",
                        self.grid.n, self.grid.collar_points
                    )));
                }
            }
        }
        Ok(())
    }
}

fn unknown_key(k: &str, valid: &[String]) -> LabError {
    LabError::Config(format!("unknown key `{k}`; valid keys are:\n  {}", valid.join("\n  ")))
}

fn to_table<T: Serialize>(v: &T) -> Result<toml::Table> {
    match toml::Value::try_from(v).map_err(|e| LabError::Config(e.to_string()))? {
        toml::Value::Table(t) => Ok(t),
        _ => Err(LabError::Config("expected a table".into())),
    }
}

fn flatten_keys(t: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in t {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(inner) => flatten_keys(inner, &key, out),
            _ => out.push(key),
        }
    }
}

fn merge(base: &mut toml::Table, top: &toml::Table) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(t: &mut toml::Table, key: &str, value: toml::Value) {
    match key.split_once('.') {
        None => {
            t.insert(key.to_string(), value);
        }
        Some((head, rest)) => {
            let entry = t.entry(head.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if let toml::Value::Table(inner) = entry {
                set_dotted(inner, rest, value);
            }
        }
    }
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("override `{s}` is not of the form key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
