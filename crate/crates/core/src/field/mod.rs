//! The cascade velocity field: per-level shear profiles switched on by time
//! cutoffs, with optional reflection and swap stages for t ∈ (1, 2).

pub mod convolution;
pub mod cutoff;
pub mod mollifier;
pub mod norms;
pub mod profile;

pub use convolution::{convolve_spacetime, KernelSpec};
pub use cutoff::{Cutoff, PlateauCutoff, TabulatedCutoff};
pub use mollifier::{bump, Mollifier};
pub use norms::{field_norm_report, FieldNormReport, SegmentNorms};
pub use profile::{Direction, Profile1D, ProfileKind, Shape, StepProfile};

use crate::error::{LabError, Result};
use crate::params::rational::to_f64;
use crate::params::schedule::CascadeSchedule;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    ForwardOnly,
    Reflect,
    ReflectWithSwap,
}

impl Extension {
    pub fn end_time(self) -> f64 {
        match self {
            Extension::ForwardOnly => 1.0,
            _ => 2.0,
        }
    }
}

/// Which stage of a level a segment realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Horizontal mixing on slot 2.
    Mix2,
    /// Vertical mixing on slot 3.
    Mix3,
    /// Parity swap on the mirrored slot 1.
    Swap,
}

impl Stage {
    pub fn slot(self) -> usize {
        match self {
            Stage::Mix2 => 2,
            Stage::Mix3 => 3,
            Stage::Swap => 1,
        }
    }
}

/// One shear stage: `sign · η(τ(t)) · profile(x_⊥)` along the profile's
/// direction, where `τ(t) = 2 − t` for mirrored stages and `t` otherwise.
#[derive(Debug, Clone)]
pub struct ShearSegment {
    pub label: String,
    pub q: usize,
    pub stage: Stage,
    /// Slot in physical time.
    pub slot: (f64, f64),
    pub cutoff: Cutoff,
    pub reflected: bool,
    pub sign: f64,
    pub profile: Arc<Profile1D>,
}

impl ShearSegment {
    fn tau(&self, t: f64) -> f64 {
        if self.reflected {
            2.0 - t
        } else {
            t
        }
    }

    /// Support of the time factor in physical time.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.cutoff.support();
        if self.reflected {
            (2.0 - hi, 2.0 - lo)
        } else {
            (lo, hi)
        }
    }

    /// Signed time factor at physical time `t`.
    pub fn eta(&self, t: f64) -> f64 {
        self.sign * self.cutoff.value(self.tau(t))
    }

    /// `∫_{ta}^{tb}` of the signed time factor.
    pub fn mass_between(&self, ta: f64, tb: f64) -> f64 {
        let m = if self.reflected {
            self.cutoff.cumulative(2.0 - ta) - self.cutoff.cumulative(2.0 - tb)
        } else {
            self.cutoff.cumulative(tb) - self.cutoff.cumulative(ta)
        };
        self.sign * m
    }

    /// Signed total mass.
    pub fn mass(&self) -> f64 {
        self.sign * self.cutoff.mass()
    }

    pub fn direction(&self) -> Direction {
        self.profile.direction
    }

    pub fn velocity(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let e = self.eta(t);
        let mut u = [0.0; 2];
        if e != 0.0 {
            let d = self.profile.direction;
            u[d.parallel()] = e * self.profile.value(x[d.transverse()]);
        }
        u
    }

    /// Displacement of the whole stage at transverse coordinate `x_perp`.
    pub fn displacement(&self, x_perp: f64) -> f64 {
        self.mass() * self.profile.value(x_perp)
    }
}

/// The assembled field. Segments are ordered by the start of their support.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub schedule: CascadeSchedule,
    pub extension: Extension,
    pub segments: Vec<ShearSegment>,
    /// Width of the space-time kernel, when the field has been convolved.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotDisplacement {
    pub value: f64,
    /// The transverse coordinate lies in a mollification collar, so the
    /// value is a blend of the two branch values.
    pub in_collar: bool,
}

/// Integer scale ratio `a_q / a_{q+1}`.
pub fn scale_ratio(sched: &CascadeSchedule, q: usize) -> Result<usize> {
    let r = &sched.levels[q].a / &sched.levels[q + 1].a;
    if !r.is_integer() {
        return Err(LabError::Schedule(format!("a_{q}/a_{} is not an integer", q + 1)));
    }
    r.to_integer()
        .to_usize()
        .ok_or_else(|| LabError::Schedule(format!("scale ratio at level {q} is too large")))
}

pub fn build_field(sched: &CascadeSchedule, extension: Extension) -> Result<VelocityField> {
    if sched.q_max == 0 {
        return Err(LabError::DegenerateField(
            "q_max = 0 leaves no active level, so the field vanishes identically".into(),
        ));
    }
    let gamma = to_f64(&sched.gamma);
    let mut fwd = Vec::new();
    let mut back = Vec::new();
    for q in 0..sched.q_max {
        let lv = &sched.levels[q];
        let r = scale_ratio(sched, q)?;
        let ell = sched.levels[q + 1].ell;
        let a = lv.a_f64();
        let t_len = lv.t_f64();
        for stage in [Stage::Mix2, Stage::Mix3] {
            let kind = if stage == Stage::Mix2 { ProfileKind::MixH } else { ProfileKind::MixV };
            let profile = Arc::new(Profile1D::new(kind, q, a, r, gamma, ell)?);
            let slot = &lv.slots[stage.slot()];
            let cutoff = Cutoff::Plateau(PlateauCutoff::for_slot(slot.lo_f64(), t_len));
            fwd.push(ShearSegment {
                label: format!("I_{q},{}", stage.slot()),
                q,
                stage,
                slot: (slot.lo_f64(), slot.hi_f64()),
                cutoff: cutoff.clone(),
                reflected: false,
                sign: 1.0,
                profile: profile.clone(),
            });
            if extension != Extension::ForwardOnly {
                let m = lv.mirror(stage.slot());
                back.push(ShearSegment {
                    label: format!("J_{q},{}", stage.slot()),
                    q,
                    stage,
                    slot: (m.lo_f64(), m.hi_f64()),
                    cutoff,
                    reflected: true,
                    sign: -1.0,
                    profile,
                });
            }
        }
        if extension == Extension::ReflectWithSwap {
            let m = lv.mirror(1);
            let profile = Arc::new(Profile1D::new(ProfileKind::Swap, q, a, r, gamma, ell)?);
            back.push(ShearSegment {
                label: format!("J_{q},1"),
                q,
                stage: Stage::Swap,
                slot: (m.lo_f64(), m.hi_f64()),
                cutoff: Cutoff::Plateau(PlateauCutoff::for_slot(m.lo_f64(), t_len)),
                reflected: false,
                sign: 1.0,
                profile,
            });
        }
    }
    let mut segments = fwd;
    segments.extend(back);
    segments.sort_by(|a, b| a.support().0.total_cmp(&b.support().0));
    Ok(VelocityField { schedule: sched.clone(), extension, segments, sigma: None })
}

impl VelocityField {
    fn check_time(&self, t: f64) -> Result<()> {
        if t == 1.0 {
            return Err(LabError::SingularTime);
        }
        if !(t > 0.0 && t < 2.0) {
            return Err(LabError::Contract(format!("time {t} outside (0, 2)")));
        }
        Ok(())
    }

    /// Indices of segments whose support contains `t`.
    pub fn active_at(&self, t: f64) -> impl Iterator<Item = usize> + '_ {
        let start = self.segments.partition_point(|s| s.support().1 <= t);
        (start..self.segments.len())
            .take_while(move |&i| self.segments[i].support().0 < t)
            .filter(move |&i| {
                let (lo, hi) = self.segments[i].support();
                lo < t && t < hi
            })
    }

    pub fn eval(&self, t: f64, x: [f64; 2]) -> Result<[f64; 2]> {
        self.check_time(t)?;
        Ok(self.eval_unchecked(t, x))
    }

    /// Evaluation without the time-domain check (zero at t = 1).
    pub fn eval_unchecked(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        let mut u = [0.0; 2];
        for i in self.active_at(t) {
            let v = self.segments[i].velocity(t, x);
            u[0] += v[0];
            u[1] += v[1];
        }
        u
    }

    pub fn segment(&self, q: usize, stage: Stage, reflected: bool) -> Option<&ShearSegment> {
        self.segments.iter().find(|s| s.q == q && s.stage == stage && s.reflected == reflected)
    }

    /// Net displacement of forward stage `stage` at level `q`.
    pub fn slot_displacement(&self, q: usize, stage: Stage, x_perp: f64) -> Result<SlotDisplacement> {
        let seg = self
            .segments
            .iter()
            .find(|s| s.q == q && s.stage == stage && (stage == Stage::Swap || !s.reflected))
            .ok_or_else(|| LabError::Contract(format!("no {stage:?} stage at level {q}")))?;
        let in_collar = match seg.profile.shape.as_step() {
            Some(sp) => sp.in_collar(x_perp),
            None => false,
        };
        Ok(SlotDisplacement { value: seg.displacement(x_perp), in_collar })
    }

    /// Segments whose supports overlap in time (only after convolution).
    pub fn has_overlaps(&self) -> bool {
        self.segments.windows(2).any(|w| w[1].support().0 < w[0].support().1)
    }
}
