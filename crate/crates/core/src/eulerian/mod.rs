pub mod diagnostics;
pub mod grid;
pub mod solver;

pub use diagnostics::{holder_seminorm, lp_time_norm, structure_function, weak_pairing, LpTimeNorm};
pub use grid::{freq, node, Plans, ScalarField, SpectralField};
pub use solver::{
    check_admission, evolve, step_heat_exact, step_shear_exact, AdmissionRule, EnergyLedger, Evolution,
    SpectralSolver, StepPolicy,
};
