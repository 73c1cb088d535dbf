//! Named parameter sets: the strict reference point and the desk sets used by
//! the experiment drivers.

use super::rational::{from_f64_exact, q, qi, Q};
use super::search::complete_strict;
use super::{DeskSettings, Exponent, Mode, ParameterSet, ScaleBase};
use num_traits::Zero;

/// α = β = 0, p = ∞, p° = 2, δ = 1/4, ε = δ³/50; γ, m and a0 completed from
/// their defining relations.
pub fn strict_reference() -> ParameterSet {
    let delta = q(1, 4);
    let epsilon = &delta * &delta * &delta / qi(50);
    complete_strict(Q::zero(), Q::zero(), Exponent::Infinite, qi(2), epsilon, delta)
}

/// Desk set with the regularity pair of the strict reference and the given
/// scales and timing.
pub fn desk(a0: Q, ratios: Vec<u32>, gamma: Q, m: u32) -> ParameterSet {
    let delta = q(1, 8);
    let epsilon = &delta * &delta * &delta / qi(50);
    ParameterSet {
        p: Exponent::Infinite,
        p_circ: qi(2),
        alpha: Q::zero(),
        beta: Q::zero(),
        epsilon,
        delta,
        gamma,
        m,
        a0: ScaleBase::from_value(a0),
        mode: Mode::Desk,
        desk: DeskSettings { ratios, ..DeskSettings::default() },
    }
}

/// Small cascade used by unit tests and quick CLI runs.
pub fn desk_small() -> ParameterSet {
    desk(q(1, 4), vec![4], q(3, 2), 2)
}

/// Steep time scaling (γ = 7) with idle windows growing towards the fine
/// scales, sized so the cascade starts 1e-9 after t = 0. Two idle levels
/// (q = 0, 2) fit on a 512² grid; the coarse collar keeps the finest active
/// profile at one node per mollifier length.
pub fn desk_dissipation() -> ParameterSet {
    let mut p = desk(q(1, 4), vec![4], qi(7), 2);
    p.desk.collar = 0.125;
    p.desk.idle_exponent = Some(qi(-2));
    let slots: f64 = 3.0 * (0..8).map(|j| 0.25f64.powi(7 * (j + 1))).sum::<f64>();
    let idle_weights = 16.0 + 4096.0;
    p.desk.idle_scale = from_f64_exact((1.0 - 1e-9 - slots) / idle_weights);
    p
}

/// Wide scale separation (r = 256) and a sharp collar: convolution at a_q/16
/// wipes out level q and below while the coarser levels survive intact.
pub fn desk_selection() -> ParameterSet {
    let mut p = desk(q(1, 4), vec![256], q(5, 4), 2);
    p.desk.collar = 1.0 / 32.0;
    p
}

/// One active level with r = 1024, for the σ⁻¹ law of the convolved field.
pub fn desk_scaling() -> ParameterSet {
    desk(q(1, 4), vec![1024], q(3, 2), 2)
}

/// The small cascade with a Hölder exponent for the scalar norm, sized for a
/// 512² grid.
pub fn desk_regularity() -> ParameterSet {
    let mut p = desk_small();
    p.alpha = q(1, 3);
    p.beta = q(1, 5);
    p.desk.collar = 0.125;
    p
}

/// Names accepted by configuration files.
pub fn by_name(name: &str) -> Option<ParameterSet> {
    match name {
        "strict_reference" => Some(strict_reference()),
        "desk_small" => Some(desk_small()),
        "desk_dissipation" => Some(desk_dissipation()),
        "desk_selection" => Some(desk_selection()),
        "desk_scaling" => Some(desk_scaling()),
        "desk_regularity" => Some(desk_regularity()),
        _ => None,
    }
}

pub const NAMES: &[&str] = &[
    "strict_reference",
    "desk_small",
    "desk_dissipation",
    "desk_selection",
    "desk_scaling",
    "desk_regularity",
];
