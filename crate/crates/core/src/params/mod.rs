//! Parameter sets, exact constraint checks, the cascade schedule and the
//! diffusivity sequences.

pub mod constraints;
pub mod diffusivity;
pub mod groups;
pub mod presets;
pub mod rational;
pub mod schedule;
pub mod search;

use crate::error::{LabError, Result};
use num_traits::{One, Signed, Zero};
use rational::{fmt_q, parse_q, q, qi, Q};
use serde::Serialize;

pub use constraints::{validate_constraints, ConstraintEntry, ConstraintReport};
pub use diffusivity::{diffusivity_sequences, DiffusivitySequences};
pub use groups::{goal_inequalities, DimensionlessGroups};
pub use schedule::{derive_schedule, CascadeSchedule, Level, Schedule, StrictSchedule};

/// Restriction used for the good sets in strict mode, in units of `a_q^(1+εδ)`.
pub const STRICT_RESTRICTION_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PaperStrict,
    Desk,
}

/// Time-integrability exponent, possibly infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum Exponent {
    Finite(Q),
    Infinite,
}

impl Exponent {
    pub fn recip(&self) -> Q {
        match self {
            Exponent::Finite(p) => Q::one() / p,
            Exponent::Infinite => Q::zero(),
        }
    }

    pub fn to_string_exact(&self) -> String {
        match self {
            Exponent::Finite(p) => fmt_q(p),
            Exponent::Infinite => "inf".into(),
        }
    }
}

/// The coarsest scale written as `a0 = base^(-power)`; keeps astronomically
/// small values exact without ever expanding them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleBase {
    pub base: Q,
    pub power: Q,
}

impl ScaleBase {
    pub fn from_value(a0: Q) -> Self {
        ScaleBase { base: Q::one() / a0, power: Q::one() }
    }

    /// Exact value when the power is an integer.
    pub fn exact(&self) -> Option<Q> {
        if !self.power.is_integer() {
            return None;
        }
        let k: i64 = num_traits::ToPrimitive::to_i64(&self.power.to_integer())?;
        if k.unsigned_abs() > 4096 {
            return None;
        }
        let b = num_traits::pow(self.base.clone(), k.unsigned_abs() as usize);
        Some(if k >= 0 { Q::one() / b } else { b })
    }

    /// ln(a0), finite even when a0 underflows.
    pub fn ln(&self) -> f64 {
        -rational::to_f64(&self.power) * rational::ln_abs(&self.base)
    }

    pub fn to_string_exact(&self) -> String {
        if self.power.is_one() {
            format!("1/{}", fmt_q(&self.base))
        } else {
            format!("{}^-{}", fmt_q(&self.base), fmt_q(&self.power))
        }
    }

    pub fn parse(field: &str, s: &str) -> Result<Self> {
        if let Some((b, e)) = s.split_once('^') {
            let base = parse_q(field, b)?;
            let e = e.trim();
            let power = match e.strip_prefix('-') {
                Some(rest) => parse_q(field, rest)?,
                None => -parse_q(field, e)?,
            };
            Ok(ScaleBase { base, power })
        } else {
            Ok(ScaleBase::from_value(parse_q(field, s)?))
        }
    }
}

/// Settings that only matter for grid-resolvable runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskSettings {
    /// Scale ratios a_q / a_{q+1}; the last entry repeats.
    pub ratios: Vec<u32>,
    /// Mollifier length as a fraction of the scale it smooths.
    pub collar: f64,
    /// Good-set restriction in units of the mollifier length.
    pub restriction_factor: f64,
    /// Idle-window lengths are `idle_scale * a_q^idle_exponent`.
    pub idle_scale: Q,
    /// `None` means the strict exponent γ(1 − δ).
    pub idle_exponent: Option<Q>,
}

impl Default for DeskSettings {
    fn default() -> Self {
        DeskSettings {
            ratios: vec![4],
            collar: 1.0 / 16.0,
            restriction_factor: 2.5,
            idle_scale: Q::one(),
            idle_exponent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub p: Exponent,
    pub p_circ: Q,
    pub alpha: Q,
    pub beta: Q,
    pub epsilon: Q,
    pub delta: Q,
    pub gamma: Q,
    pub m: u32,
    pub a0: ScaleBase,
    pub mode: Mode,
    pub desk: DeskSettings,
}

impl ParameterSet {
    /// The time-scaling exponent forced by the other parameters.
    pub fn gamma_formula(&self) -> Q {
        let one = Q::one();
        let e = &self.epsilon;
        let d = &self.delta;
        let growth = (&one + qi(3) * e * (&one + d)) * (&one + d) / (&one - d);
        &self.p_circ * &self.beta * growth + d / qi(8)
    }

    pub fn idle_exponent(&self) -> Q {
        match (&self.mode, &self.desk.idle_exponent) {
            (Mode::Desk, Some(e)) => e.clone(),
            _ => &self.gamma - &self.gamma * &self.delta,
        }
    }

    /// Range checks that turn into hard validation errors.
    pub fn check_ranges(&self) -> Result<()> {
        let zero = Q::zero();
        let one = Q::one();
        let in_closed = |name: &str, v: &Q, lo: &Q, hi: &Q| -> Result<()> {
            if v < lo || v > hi {
                Err(LabError::validation(
                    name,
                    format!("{} outside [{}, {}]", fmt_q(v), fmt_q(lo), fmt_q(hi)),
                ))
            } else {
                Ok(())
            }
        };
        let in_open = |name: &str, v: &Q, lo: &Q, hi: &Q| -> Result<()> {
            if v <= lo || v >= hi {
                Err(LabError::validation(
                    name,
                    format!("{} outside ({}, {})", fmt_q(v), fmt_q(lo), fmt_q(hi)),
                ))
            } else {
                Ok(())
            }
        };
        if let Exponent::Finite(p) = &self.p {
            if p < &qi(2) {
                return Err(LabError::validation("p", format!("{} is below 2", fmt_q(p))));
            }
        }
        in_closed("p_circ", &self.p_circ, &qi(2), &qi(4))?;
        in_closed("alpha", &self.alpha, &zero, &one)?;
        in_closed("beta", &self.beta, &zero, &q(1, 2))?;
        in_open("epsilon", &self.epsilon, &zero, &q(1, 4))?;
        // Closed at 1/4: the reference point sits on that endpoint.
        if !self.delta.is_positive() || self.delta > q(1, 4) {
            return Err(LabError::validation(
                "delta",
                format!("{} outside (0, 1/4]", fmt_q(&self.delta)),
            ));
        }
        if !self.gamma.is_positive() {
            return Err(LabError::validation("gamma", "must be positive"));
        }
        if self.m < 2 {
            return Err(LabError::validation("m", "must be at least 2"));
        }
        if !self.a0.base.is_positive() || self.a0.base <= one || !self.a0.power.is_positive() {
            return Err(LabError::validation("a0", "must lie in (0, 1)"));
        }
        if self.mode == Mode::Desk {
            if self.a0.exact().is_none() {
                return Err(LabError::validation("a0", "desk mode needs an exactly representable a0"));
            }
            if self.desk.ratios.is_empty() || self.desk.ratios.iter().any(|r| *r == 0 || r % 4 != 0) {
                return Err(LabError::validation("desk.ratios", "every ratio must be a positive multiple of 4"));
            }
            if !(self.desk.collar > 0.0 && self.desk.collar <= 0.125) {
                return Err(LabError::validation("desk.collar", "must lie in (0, 1/8]"));
            }
            if !(self.desk.restriction_factor >= 2.0 && self.desk.restriction_factor.is_finite()) {
                return Err(LabError::validation("desk.restriction_factor", "must be at least 2 (the mollifier radius)"));
            }
            if !self.desk.idle_scale.is_positive() {
                return Err(LabError::validation("desk.idle_scale", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p.to_string_exact(),
            "p_circ": fmt_q(&self.p_circ),
            "alpha": fmt_q(&self.alpha),
            "beta": fmt_q(&self.beta),
            "epsilon": fmt_q(&self.epsilon),
            "delta": fmt_q(&self.delta),
            "gamma": fmt_q(&self.gamma),
            "m": self.m,
            "a0": self.a0.to_string_exact(),
            "mode": match self.mode { Mode::PaperStrict => "paper_strict", Mode::Desk => "desk" },
            "desk": {
                "ratios": self.desk.ratios,
                "collar": self.desk.collar,
                "restriction_factor": self.desk.restriction_factor,
                "idle_scale": fmt_q(&self.desk.idle_scale),
                "idle_exponent": self.desk.idle_exponent.as_ref().map(fmt_q),
            }
        })
    }
}
