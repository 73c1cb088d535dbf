//! Decay of the convolved field with the convolution width: over the window
//! of level q, `sup |u ⋆ φ_σ| ≈ C·a_{q+1}·a_q^(1−γ)/σ` once σ exceeds the
//! finest scale of the level.

use crate::error::{LabError, Result};
use crate::field::convolution::sup_on_window;
use crate::field::{build_field, convolve_spacetime, Extension, KernelSpec};
use crate::params::rational::to_f64;
use crate::params::CascadeSchedule;
use serde::Serialize;

/// Time samples per window.
const TIME_SAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub sigma: f64,
    pub sup: f64,
    /// `sup·σ / (a_{q+1}·a_q^(1−γ))`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub q: usize,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of ln sup against ln σ.
    pub slope: f64,
    /// Median of the per-point constants.
    pub constant: f64,
}

/// Sup of `u ⋆ φ_σ` on `(1 − T_q, 1 + T_q)` for `n` log-spaced σ in
/// `[lo, hi]`.
pub fn convolution_scaling(sched: &CascadeSchedule, q: usize, lo: f64, hi: f64, n: usize) -> Result<ScalingReport> {
    if q >= sched.q_max {
        return Err(LabError::Contract(format!("level {q} is not active (q_max = {})", sched.q_max)));
    }
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(LabError::Contract("need 0 < lo < hi and at least two widths".into()));
    }
    let f = build_field(sched, Extension::Reflect)?;
    let kernel = KernelSpec::separable_bump();
    let gamma = to_f64(&sched.gamma);
    let (a, a_next) = (sched.levels[q].a_f64(), sched.levels[q + 1].a_f64());
    let scale = a_next * a.powf(1.0 - gamma);
    let big_t = sched.levels[q].big_t_f64();
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let sigma = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        let g = convolve_spacetime(&f, &kernel, sigma)?;
        let nx = ((16.0 / sigma).ceil() as usize).next_power_of_two().max(4096);
        let sup = sup_on_window(&g, 1.0 - big_t, 1.0 + big_t, TIME_SAMPLES, nx);
        points.push(ScalingPoint { sigma, sup, constant: sup * sigma / scale });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.sigma.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sup.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mut cs: Vec<f64> = points.iter().map(|p| p.constant).collect();
    cs.sort_by(f64::total_cmp);
    Ok(ScalingReport { q, slope: sxy / sxx, constant: cs[cs.len() / 2], points })
}
