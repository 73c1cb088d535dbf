//! Shared fixtures for the criterion benchmarks.

use cascade_lab::eulerian::ScalarField;
use cascade_lab::field::{build_field, Extension, VelocityField};
use cascade_lab::geometry::{sample_initial_datum, InitialDatumSpec};
use cascade_lab::params::presets::desk_small;
use cascade_lab::params::{derive_schedule, CascadeSchedule};

/// Small desk cascade with `q_max` levels.
pub fn small_schedule(q_max: usize) -> CascadeSchedule {
    derive_schedule(&desk_small(), q_max)
        .and_then(|s| s.desk().cloned())
        .expect("the small desk cascade derives")
}

pub fn small_field(q_max: usize, extension: Extension) -> VelocityField {
    build_field(&small_schedule(q_max), extension).expect("the small desk field builds")
}

/// Mollified coarsest chessboard on an `n × n` grid.
pub fn datum(sched: &CascadeSchedule, n: usize) -> ScalarField {
    let lv = &sched.levels[0];
    sample_initial_datum(&InitialDatumSpec { side: lv.a_f64(), ell: lv.ell }, n).expect("grid resolves the datum")
}
