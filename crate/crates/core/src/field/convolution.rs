//! Space-time convolution of the cascade field with a separable kernel
//! φ(t, x) = χ(t)·χ₂(x₁)·χ₂(x₂), χ(s) = 2ψ̃(2s), χ₂(x) = √2·χ(√2·x).
//!
//! Every segment is a product `η(t)·w(x_⊥)`, so its convolution is the
//! product of `η ⋆ χ_σ` and `w ⋆ χ₂,σ`; the parallel factor integrates to 1.
//! Profiles are convolved in Fourier space from the exact coefficients of the
//! step function, times the mollifier and kernel transforms.

use super::cutoff::{Cutoff, TabulatedCutoff};
use super::mollifier::bump;
use super::profile::{PeriodicTable, Profile1D, Shape};
use super::VelocityField;
use crate::error::{LabError, Result};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

/// Largest time table accepted before declaring σ unresolvable.
const MAX_TIME_SAMPLES: usize = 400_000;
/// Largest spatial table (points per profile period).
const MAX_SPACE_SAMPLES: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    /// Bound on ‖φ‖_{C¹} (max of sup|φ| and sup|∇φ|), measured at build time.
    pub c1_bound: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::separable_bump()
    }
}

impl KernelSpec {
    pub fn separable_bump() -> Self {
        let mut sup: f64 = 0.0;
        let mut grad: f64 = 0.0;
        let n = 400;
        for i in 0..=n {
            let s = -1.0 + 2.0 * i as f64 / n as f64;
            for j in 0..=n {
                let y = (-1.0 + 2.0 * j as f64 / n as f64) / SQRT_2;
                let (c, dc) = (chi(s), chi_slope(s));
                let (c2, dc2) = (chi2(y), chi2_slope(y));
                let c20 = chi2(0.0);
                sup = sup.max(c * c2 * c20);
                let g = (dc * c2 * c20).powi(2) + (c * dc2 * c20).powi(2);
                grad = grad.max(g.sqrt());
            }
        }
        KernelSpec { c1_bound: sup.max(grad) }
    }

    /// φ(t, x).
    pub fn value(&self, t: f64, x: [f64; 2]) -> f64 {
        chi(t) * chi2(x[0]) * chi2(x[1])
    }
}

pub fn chi(s: f64) -> f64 {
    2.0 * bump().density(2.0 * s)
}

fn chi_slope(s: f64) -> f64 {
    4.0 * bump().derivative(2.0 * s)
}

pub fn chi2(x: f64) -> f64 {
    SQRT_2 * chi(SQRT_2 * x)
}

fn chi2_slope(x: f64) -> f64 {
    2.0 * chi_slope(SQRT_2 * x)
}

/// Fourier transform of χ₂ at ξ.
fn chi2_transform(xi: f64) -> f64 {
    bump().transform(xi / (2.0 * SQRT_2))
}

/// `η ⋆ χ_σ` tabulated on its support.
fn convolve_cutoff(c: &Cutoff, sigma: f64, gl: &GaussLegendre) -> Result<TabulatedCutoff> {
    let Cutoff::Plateau(p) = c else {
        return Err(LabError::Contract("cutoff already convolved".into()));
    };
    let (lo, hi) = (p.lo - sigma, p.hi + sigma);
    let ramp = 0.25 * (p.hi - p.lo);
    // The result is smooth on the larger of the two scales.
    let h = ramp.max(sigma) / 32.0;
    let n = ((hi - lo) / h).ceil() as usize + 1;
    if n > MAX_TIME_SAMPLES {
        return Err(LabError::Resolution(format!(
            "time table of {n} samples needed for sigma = {sigma:.3e} against ramp {ramp:.3e}"
        )));
    }
    // Integrate over the overlap of the cutoff support with the kernel window,
    // in panels fine enough for both the ramp and the kernel.
    let scale = ramp.min(sigma);
    let mut values = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for j in 0..n {
        let t = lo + (hi - lo) * j as f64 / (n - 1) as f64;
        let (a, b) = ((t - sigma).max(p.lo), (t + sigma).min(p.hi));
        let (mut v, mut d) = (0.0, 0.0);
        if b > a {
            let panels = ((b - a) / scale * 4.0).ceil().max(4.0) as usize;
            let pw = (b - a) / panels as f64;
            for k in 0..panels {
                let s0 = a + k as f64 * pw;
                v += gl.integrate(s0, s0 + pw, |tau| p.derivatives(tau).0 * chi((t - tau) / sigma) / sigma);
                d += gl.integrate(s0, s0 + pw, |tau| p.derivatives(tau).1 * chi((t - tau) / sigma) / sigma);
            }
        }
        values.push(v);
        slopes.push(d);
    }
    values[0] = 0.0;
    values[n - 1] = 0.0;
    slopes[0] = 0.0;
    slopes[n - 1] = 0.0;
    Ok(TabulatedCutoff::new(lo, hi, values, slopes))
}

/// `w ⋆ χ₂,σ` for a mollified step profile, tabulated over one period.
pub fn convolve_profile(p: &Profile1D, sigma: f64) -> Result<Profile1D> {
    let Shape::Step(sp) = &p.shape else {
        return Err(LabError::Contract("profile already convolved".into()));
    };
    let period = sp.period();
    let ell = sp.mollifier().ell;
    let cells = sp.values().len();
    // Resolve whichever of the two smoothing factors decays first.
    let width = ell.max(sigma / (2.0 * SQRT_2));
    let want = (48.0 * period / width).ceil() as usize;
    let m = want.next_power_of_two().max(64);
    if m > MAX_SPACE_SAMPLES {
        return Err(LabError::Resolution(format!("profile table of {m} samples exceeds the cap")));
    }
    // DFT of the jump sequence: jump j sits at j·cell.
    let jumps: Vec<Complex64> = (0..cells)
        .map(|j| Complex64::new(sp.values()[j] - sp.values()[(j + cells - 1) % cells], 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let mut jd = jumps.clone();
    planner.plan_fft_forward(cells).process(&mut jd);
    let mean = sp.mean();
    let mut spec = vec![Complex64::new(0.0, 0.0); m];
    let mut dspec = vec![Complex64::new(0.0, 0.0); m];
    spec[0] = Complex64::new(mean, 0.0);
    let half = m / 2;
    for idx in 1..m {
        let k = if idx < half { idx as i64 } else { idx as i64 - m as i64 };
        if idx == half {
            continue;
        }
        let kf = k as f64 / period;
        let omega = 2.0 * PI * kf;
        let d = jd[(k.rem_euclid(cells as i64)) as usize];
        let damp = bump().transform(kf * ell) * chi2_transform(kf * sigma);
        // Coefficient of the step function: (jump DFT)/(P·iω) times P/P.
        let c = d / (Complex64::new(0.0, omega) * period) * damp;
        spec[idx] = c;
        dspec[idx] = c * Complex64::new(0.0, omega);
    }
    let inv = planner.plan_fft_inverse(m);
    inv.process(&mut spec);
    inv.process(&mut dspec);
    // Coefficients were per unit period length; the inverse sum is unnormalised.
    let values: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let slopes: Vec<f64> = dspec.iter().map(|c| c.re).collect();
    Ok(Profile1D {
        kind: p.kind,
        q: p.q,
        direction: p.direction,
        amplitude: p.amplitude,
        shape: Shape::Table(PeriodicTable::new(period, values, slopes)),
    })
}

/// `u ⋆ φ_σ` as a field with tabulated segments.
pub fn convolve_spacetime(f: &VelocityField, _kernel: &KernelSpec, sigma: f64) -> Result<VelocityField> {
    if !(sigma > 0.0) {
        return Err(LabError::Contract("sigma must be positive".into()));
    }
    if f.sigma.is_some() {
        return Err(LabError::Contract("field is already convolved".into()));
    }
    let gl = GaussLegendre::new(12.try_into().expect("nonzero order"));
    let mut cache: HashMap<*const Profile1D, Arc<Profile1D>> = HashMap::new();
    let mut segments = Vec::with_capacity(f.segments.len());
    for s in &f.segments {
        let key = Arc::as_ptr(&s.profile);
        let prof = match cache.get(&key) {
            Some(p) => p.clone(),
            None => {
                let p = Arc::new(convolve_profile(&s.profile, sigma)?);
                cache.insert(key, p.clone());
                p
            }
        };
        let mut ns = s.clone();
        ns.cutoff = Cutoff::Table(convolve_cutoff(&s.cutoff, sigma, &gl)?);
        ns.profile = prof;
        segments.push(ns);
    }
    segments.sort_by(|a, b| a.support().0.total_cmp(&b.support().0));
    Ok(VelocityField {
        schedule: f.schedule.clone(),
        extension: f.extension,
        segments,
        sigma: Some(sigma),
    })
}

/// `sup_{t ∈ [t0, t1], x}` |u(t, x)|, using that horizontal and vertical parts
/// depend on different coordinates: `sup_x |u|² = sup u₁² + sup u₂²`.
pub fn sup_on_window(f: &VelocityField, t0: f64, t1: f64, nt: usize, nx: usize) -> f64 {
    let xs: Vec<f64> = (0..nx).map(|j| (j as f64 + 0.5) / nx as f64).collect();
    let mut best: f64 = 0.0;
    for i in 0..=nt {
        let t = t0 + (t1 - t0) * i as f64 / nt as f64;
        let mut comp = [vec![0.0; nx], vec![0.0; nx]];
        for k in f.active_at(t) {
            let s = &f.segments[k];
            let e = s.eta(t);
            let c = s.direction().parallel();
            for (j, x) in xs.iter().enumerate() {
                comp[c][j] += e * s.profile.value(*x);
            }
        }
        let m0 = comp[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let m1 = comp[1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        best = best.max((m0 * m0 + m1 * m1).sqrt());
    }
    best
}
