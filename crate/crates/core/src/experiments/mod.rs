//! Scenario drivers: each assembles a schedule, a field and a solver into a
//! sweep and judges the measurements against configured thresholds.

pub mod config;
pub mod report;
mod regularity;
mod scaling;
mod selection;
mod vanishing;

pub use config::{parse_override, ExperimentConfig, Scenario, Thresholds};
pub use regularity::run_regularity;
pub use report::{PlotData, Relation, RunReport, SweepPoint, Verdict};
pub use scaling::{convolution_scaling, ScalingPoint, ScalingReport};
pub use selection::run_theorem_c;
pub use vanishing::{run_theorem_a, run_theorem_b};

use crate::error::Result;
use crate::eulerian::{ScalarField, StepPolicy};
use crate::geometry::{sample_initial_datum, InitialDatumSpec};
use crate::params::CascadeSchedule;
use rayon::prelude::*;

/// Runs the configured scenario.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.check()?;
    match cfg.scenario {
        Scenario::TheoremA => run_theorem_a(cfg),
        Scenario::TheoremB => run_theorem_b(cfg),
        Scenario::TheoremC => run_theorem_c(cfg),
        Scenario::Regularity => run_regularity(cfg),
    }
}

/// Mollified chessboard of the coarsest side.
pub(crate) fn datum_spec(sched: &CascadeSchedule) -> InitialDatumSpec {
    InitialDatumSpec { side: sched.levels[0].a_f64(), ell: sched.levels[0].ell }
}

pub(crate) fn initial_grid(cfg: &ExperimentConfig, sched: &CascadeSchedule) -> Result<ScalarField> {
    sample_initial_datum(&datum_spec(sched), cfg.grid.n)
}

pub(crate) fn grid_policy(cfg: &ExperimentConfig, extra: Vec<f64>, keep: bool) -> StepPolicy {
    let mut p = StepPolicy { extra_checkpoints: extra, keep_snapshots: keep, ..StepPolicy::default() };
    p.admission.collar_points = cfg.grid.collar_points;
    p
}

/// Maps the sweep in parallel; results keep the sweep order.
pub(crate) fn sweep_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    items.par_iter().map(f).collect()
}

/// Snapshot recorded at time `t`.
pub(crate) fn snapshot_at(snaps: &[ScalarField], t: f64) -> Option<&ScalarField> {
    snaps.iter().find(|s| (s.time - t).abs() <= 1e-13)
}
