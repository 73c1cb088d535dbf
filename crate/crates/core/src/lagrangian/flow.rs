//! Deterministic characteristics. Between consecutive support endpoints the
//! set of active segments is fixed; with one active shear the map is exact
//! (the transverse coordinate does not move), and only where convolved
//! supports overlap is the flow integrated numerically (RK4).

use crate::error::{LabError, Result};
use crate::field::{ShearSegment, VelocityField};

/// Largest number of RK4 steps allowed on one overlap stretch.
const MAX_RK_STEPS: usize = 4_000_000;
/// Fraction of the smallest profile feature a point may travel per RK4 step.
const SPATIAL_CFL: f64 = 0.05;

/// A time stretch with a constant set of active segments (`a < b`).
#[derive(Debug, Clone, PartialEq)]
pub struct Stretch {
    pub a: f64,
    pub b: f64,
    pub active: Vec<usize>,
}

/// Stretches tiling `[lo, hi]`, in increasing time.
pub fn stretches(f: &VelocityField, lo: f64, hi: f64) -> Vec<Stretch> {
    let mut cuts = vec![lo, hi];
    for s in &f.segments {
        let (a, b) = s.support();
        for t in [a, b] {
            if t > lo && t < hi {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Stretch { a: w[0], b: w[1], active: f.active_at(mid).collect() }
        })
        .collect()
}

pub(crate) fn check_span(t0: f64, t1: f64, end: f64) -> Result<()> {
    for t in [t0, t1] {
        if !(0.0..=end).contains(&t) {
            return Err(LabError::Contract(format!("time {t} outside [0, {end}]")));
        }
    }
    Ok(())
}

/// Exact shear move from `s0` to `s1` (either order).
pub(crate) fn shear_move(seg: &ShearSegment, x: &mut [f64; 2], s0: f64, s1: f64) -> f64 {
    let d = seg.direction();
    let disp = seg.mass_between(s0, s1) * seg.profile.value(x[d.transverse()]);
    x[d.parallel()] += disp;
    disp
}

pub(crate) fn wrap(x: &mut [f64; 2]) {
    x[0] = x[0].rem_euclid(1.0);
    x[1] = x[1].rem_euclid(1.0);
}

fn velocity(f: &VelocityField, active: &[usize], t: f64, x: [f64; 2]) -> [f64; 2] {
    let mut u = [0.0; 2];
    for &i in active {
        let v = f.segments[i].velocity(t, x);
        u[0] += v[0];
        u[1] += v[1];
    }
    u
}

/// RK4 step count for an overlap stretch of length `len`.
pub(crate) fn rk_steps(f: &VelocityField, active: &[usize], len: f64) -> Result<usize> {
    let mut h = f64::INFINITY;
    let mut speed = 0.0;
    let mut feature = f64::INFINITY;
    for &i in active {
        let s = &f.segments[i];
        h = h.min(s.cutoff.resolution());
        speed += s.cutoff.peak() * s.profile.sup();
        let lip = s.profile.lip();
        if lip > 0.0 {
            feature = feature.min(s.profile.sup() / lip);
        }
    }
    if speed > 0.0 && feature.is_finite() {
        h = h.min(SPATIAL_CFL * feature / speed);
    }
    let k = (len / h).ceil().max(1.0) as usize;
    if k > MAX_RK_STEPS {
        return Err(LabError::Resolution(format!(
            "overlap stretch of length {len:.3e} needs {k} RK4 steps (cap {MAX_RK_STEPS})"
        )));
    }
    Ok(k)
}

pub(crate) fn rk4(f: &VelocityField, active: &[usize], x: &mut [f64; 2], s0: f64, s1: f64, k: usize) {
    let h = (s1 - s0) / k as f64;
    for j in 0..k {
        let t = s0 + j as f64 * h;
        let add = |x: [f64; 2], v: [f64; 2], c: f64| [x[0] + c * v[0], x[1] + c * v[1]];
        let k1 = velocity(f, active, t, *x);
        let k2 = velocity(f, active, t + 0.5 * h, add(*x, k1, 0.5 * h));
        let k3 = velocity(f, active, t + 0.5 * h, add(*x, k2, 0.5 * h));
        let k4 = velocity(f, active, t + h, add(*x, k3, h));
        for c in 0..2 {
            x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
}

/// Flow map `X_{t0,t1}` for a batch of points; `t1 < t0` integrates backward.
/// Crossing t = 1 is allowed (the field vanishes near it).
pub fn flow_points(f: &VelocityField, points: &mut [[f64; 2]], t0: f64, t1: f64) -> Result<()> {
    flow_points_refined(f, points, t0, t1, 1)
}

/// [`flow_points`] with `refine` times as many RK4 steps on overlaps.
pub fn flow_points_refined(f: &VelocityField, points: &mut [[f64; 2]], t0: f64, t1: f64, refine: usize) -> Result<()> {
    check_span(t0, t1, f.extension.end_time())?;
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    let mut plan = stretches(f, lo, hi);
    if t1 < t0 {
        plan.reverse();
    }
    for st in &plan {
        let (s0, s1) = if t1 >= t0 { (st.a, st.b) } else { (st.b, st.a) };
        match st.active.len() {
            0 => {}
            1 => {
                let seg = &f.segments[st.active[0]];
                for x in points.iter_mut() {
                    shear_move(seg, x, s0, s1);
                    wrap(x);
                }
            }
            _ => {
                let k = rk_steps(f, &st.active, st.b - st.a)? * refine.max(1);
                for x in points.iter_mut() {
                    rk4(f, &st.active, x, s0, s1, k);
                    wrap(x);
                }
            }
        }
    }
    Ok(())
}

/// Flow map of a single point.
pub fn flow_deterministic(f: &VelocityField, x0: [f64; 2], t0: f64, t1: f64) -> Result<[f64; 2]> {
    let mut p = [x0];
    flow_points(f, &mut p, t0, t1)?;
    Ok(p[0])
}
