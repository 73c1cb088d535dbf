//! Stochastic characteristics `dX = u(t, X) dt + √(2κ) dW` for shear fields.
//!
//! Inside a single shear the transverse coordinate is pure Brownian motion, so
//! its increment is drawn exactly; the parallel coordinate receives the
//! midpoint quadrature of `∫η(s)·w(X_⊥(s)) ds` plus its own increment.

use super::flow::{check_span, rk4, rk_steps, shear_move, stretches, wrap};
use super::rng::{purpose, stream_id, RandomStream};
use super::stats::pairwise_sum;
use crate::error::{LabError, Result};
use crate::eulerian::solver::substeps;
use crate::eulerian::StepPolicy;
use crate::field::{Profile1D, Shape, ShearSegment, VelocityField};
use crate::geometry::SetDescriptor;
use serde::Serialize;

/// Cap on rejection-sampling attempts per requested point.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    /// Points of the torus, reduced to [0, 1)².
    pub positions: Vec<[f64; 2]>,
    pub kappa: f64,
    pub time: f64,
    streams: Vec<RandomStream>,
    /// `√(2κ)·(W_t − W_{t_reset})`, unreduced.
    pub noise: Vec<[f64; 2]>,
    /// Running sup of `|noise|` over substep endpoints, when tracked.
    pub noise_sup: Option<Vec<f64>>,
    /// `∫ u(s, X_s) ds` since the last reset, unreduced.
    pub drift: Vec<[f64; 2]>,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(LabError::Contract(format!("diffusivity {kappa} must be finite and nonnegative")));
    }
    Ok(())
}

impl ParticleEnsemble {
    fn build(positions: Vec<[f64; 2]>, kappa: f64, time: f64, streams: Vec<RandomStream>) -> Result<Self> {
        check_kappa(kappa)?;
        let n = positions.len();
        let mut e = ParticleEnsemble {
            positions,
            kappa,
            time,
            streams,
            noise: vec![[0.0; 2]; n],
            noise_sup: None,
            drift: vec![[0.0; 2]; n],
        };
        e.positions.iter_mut().for_each(wrap);
        Ok(e)
    }

    /// Particles at the given points, each with its own stream tagged `tag`.
    pub fn from_points(points: Vec<[f64; 2]>, kappa: f64, time: f64, seed: u64, tag: u64) -> Result<Self> {
        let streams = (0..points.len()).map(|i| RandomStream::new(seed, stream_id(tag, i as u64))).collect();
        Self::build(points, kappa, time, streams)
    }

    /// Particles driven by one common Brownian path: the stochastic flow of
    /// a single ω applied to many starting points.
    pub fn common_noise(points: Vec<[f64; 2]>, kappa: f64, time: f64, seed: u64, stream: u64) -> Result<Self> {
        let streams = vec![RandomStream::new(seed, stream); points.len()];
        Self::build(points, kappa, time, streams)
    }

    /// `n` independent uniform points.
    pub fn uniform(n: usize, kappa: f64, time: f64, seed: u64) -> Result<Self> {
        let mut init = RandomStream::new(seed, stream_id(purpose::INIT, 0));
        let pts = (0..n).map(|_| [init.uniform(), init.uniform()]).collect();
        Self::from_points(pts, kappa, time, seed, purpose::FORWARD)
    }

    /// `n` uniform points of `set`, by rejection.
    pub fn in_set(set: &SetDescriptor, n: usize, kappa: f64, time: f64, seed: u64) -> Result<Self> {
        if !(set.measure() > 0.0) {
            return Err(LabError::Contract("cannot sample from a null set".into()));
        }
        let mut init = RandomStream::new(seed, stream_id(purpose::INIT, 0));
        let mut pts = Vec::with_capacity(n);
        let mut tries = 0usize;
        while pts.len() < n {
            let x = [init.uniform(), init.uniform()];
            if set.contains(x) {
                pts.push(x);
            }
            tries += 1;
            if tries > MAX_REJECTIONS * n.max(1) {
                return Err(LabError::Contract("rejection sampling did not terminate".into()));
            }
        }
        Self::from_points(pts, kappa, time, seed, purpose::FORWARD)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn track_noise_sup(mut self) -> Self {
        self.noise_sup = Some(vec![0.0; self.len()]);
        self
    }

    /// Zeroes drift, noise and the running sup.
    pub fn reset_path_stats(&mut self) {
        self.drift.iter_mut().for_each(|d| *d = [0.0; 2]);
        self.noise.iter_mut().for_each(|d| *d = [0.0; 2]);
        if let Some(s) = self.noise_sup.as_mut() {
            s.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn stream(&self, i: usize) -> &RandomStream {
        &self.streams[i]
    }

    /// Advances every particle to `t1` (backward when `t1 < time`). With
    /// `dt = None` the substep rule decides; a `dt` coarser than the rule
    /// allows is refused.
    pub fn advance(&mut self, f: &VelocityField, t1: f64, dt: Option<f64>, policy: &StepPolicy) -> Result<()> {
        let t0 = self.time;
        check_span(t0, t1, f.extension.end_time())?;
        if let Some(dt) = dt {
            if !(dt > 0.0) {
                return Err(LabError::Contract(format!("time step {dt} must be positive")));
            }
        }
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let mut plan = Vec::new();
        for st in stretches(f, lo, hi) {
            let len = st.b - st.a;
            let k = match st.active.len() {
                0 => 1,
                1 => {
                    let need = required_substeps(&f.segments[st.active[0]], len, self.kappa, policy)?;
                    match dt {
                        None => need,
                        Some(dt) => {
                            if dt > len / need as f64 * (1.0 + 1e-12) {
                                return Err(LabError::Contract(format!(
                                    "time step {dt:.3e} exceeds the admissible {:.3e} on [{:.6}, {:.6}]",
                                    len / need as f64,
                                    st.a,
                                    st.b
                                )));
                            }
                            (len / dt).ceil().max(1.0) as usize
                        }
                    }
                }
                _ if self.kappa > 0.0 => {
                    return Err(LabError::Contract(
                        "segments overlap in time; the stochastic scheme needs one shear at a time".into(),
                    ))
                }
                // κ = 0 across an overlap: deterministic RK4.
                _ => rk_steps(f, &st.active, len)?,
            };
            plan.push((st, k));
        }
        if t1 < t0 {
            plan.reverse();
        }
        let backward = t1 < t0;
        for i in 0..self.len() {
            for (st, k) in &plan {
                let (s0, s1) = if backward { (st.b, st.a) } else { (st.a, st.b) };
                if st.active.len() > 1 {
                    let before = self.positions[i];
                    rk4(f, &st.active, &mut self.positions[i], s0, s1, *k);
                    for (d, (now, was)) in self.drift[i].iter_mut().zip(self.positions[i].iter().zip(before)) {
                        *d += now - was;
                    }
                    wrap(&mut self.positions[i]);
                    continue;
                }
                self.particle_stretch(f, i, st.active.first().copied(), s0, s1, *k);
            }
        }
        self.time = t1;
        Ok(())
    }

    fn particle_stretch(&mut self, f: &VelocityField, i: usize, seg: Option<usize>, s0: f64, s1: f64, k: usize) {
        let kappa = self.kappa;
        let h = (s1 - s0) / k as f64;
        let sd = (2.0 * kappa * h.abs()).sqrt();
        let x = &mut self.positions[i];
        let stream = &mut self.streams[i];
        let noise = &mut self.noise[i];
        let drift = &mut self.drift[i];
        for j in 0..k {
            let a = s0 + j as f64 * h;
            let b = if j + 1 == k { s1 } else { a + h };
            let g = if kappa > 0.0 { [sd * stream.gaussian(), sd * stream.gaussian()] } else { [0.0; 2] };
            match seg {
                None => {
                    x[0] += g[0];
                    x[1] += g[1];
                }
                Some(si) => {
                    let s = &f.segments[si];
                    let d = s.direction();
                    let (tr, par) = (d.transverse(), d.parallel());
                    // Midpoint of the transverse path on this substep.
                    let mut probe = *x;
                    probe[tr] += 0.5 * g[tr];
                    let disp = shear_move(s, &mut probe, a, b);
                    x[tr] += g[tr];
                    x[par] += disp + g[par];
                    drift[par] += disp;
                }
            }
            noise[0] += g[0];
            noise[1] += g[1];
            if let Some(sup) = self.noise_sup.as_mut() {
                sup[i] = sup[i].max(noise[0].hypot(noise[1]));
            }
        }
        wrap(x);
    }
}

/// Difference of two torus coordinates mapped to [−1/2, 1/2).
pub fn signed_gap(d: f64) -> f64 {
    (d + 0.5).rem_euclid(1.0) - 0.5
}

/// Shortest feature the profile resolves: the mollifier length for step
/// profiles, sup/lip for tabulated ones.
pub fn profile_length(p: &Profile1D) -> f64 {
    match &p.shape {
        Shape::Step(s) => s.mollifier().ell,
        Shape::Table(_) => p.sup() / p.lip().max(f64::MIN_POSITIVE),
    }
}

/// Substeps on one shear stretch: the cutoff rule shared with the spectral
/// solver, tightened so that `Δt ≤ ℓ²/(8κ)` for the profile length ℓ.
pub fn required_substeps(seg: &ShearSegment, len: f64, kappa: f64, policy: &StepPolicy) -> Result<usize> {
    if kappa == 0.0 {
        return Ok(1);
    }
    let k_cut = substeps(seg, len, kappa, policy)?;
    let ell = profile_length(&seg.profile);
    let k_diff = (8.0 * kappa * len / (ell * ell)).ceil().max(1.0) as usize;
    let k = k_cut.max(k_diff);
    if k > policy.max_substeps {
        return Err(LabError::Contract(format!(
            "{} needs {k} substeps to resolve diffusion across its profile, above the cap {}",
            seg.label, policy.max_substeps
        )));
    }
    Ok(k)
}

/// Functional form of the stochastic advance.
pub fn sde_advance(
    mut ens: ParticleEnsemble,
    f: &VelocityField,
    t1: f64,
    dt: Option<f64>,
    policy: &StepPolicy,
) -> Result<ParticleEnsemble> {
    ens.advance(f, t1, dt, policy)?;
    Ok(ens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Mean and standard error with pairwise sums.
pub fn mean_and_error(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if v.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// `ϑ_κ(t, x) ≈ mean of ϑ_in` over endpoints of `n` backward paths from
/// `(t, x)` to time 0, each with fresh increments.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_estimate(
    f: &VelocityField,
    theta_in: &dyn Fn([f64; 2]) -> f64,
    x: [f64; 2],
    t: f64,
    kappa: f64,
    n: usize,
    seed: u64,
    policy: &StepPolicy,
) -> Result<FkEstimate> {
    if n < 100 {
        return Err(LabError::Contract(format!("Feynman-Kac estimate needs at least 100 paths, got {n}")));
    }
    let mut ens = ParticleEnsemble::from_points(vec![x; n], kappa, t, seed, purpose::BACKWARD)?;
    ens.advance(f, 0.0, None, policy)?;
    let vals: Vec<f64> = ens.positions.iter().map(|p| theta_in(*p)).collect();
    let (estimate, std_error) = mean_and_error(&vals);
    Ok(FkEstimate { estimate, std_error, n })
}

/// Frequency with which one coordinate of `√(2κ)·W` stays within `c` in
/// absolute value over `[0, horizon]`, monitored at `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownianSup {
    pub c: f64,
    pub kappa: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub steps: usize,
    pub frequency: f64,
    pub std_error: f64,
    /// `1 − 2·exp(−c²/(2κT))`.
    pub stated_bound: f64,
    /// `1 − 2·exp(−c²/(4κT))`, the reflection-principle bound.
    pub reflection_bound: f64,
    /// Exact continuous-time probability (eigenfunction series).
    pub exact: f64,
}

/// `P(sup_{[0,T]} |B| < a)` for standard Brownian motion:
/// `(4/π) Σ_k (−1)^k/(2k+1) · exp(−(2k+1)²π²T/(8a²))`.
pub fn exit_free_probability(a: f64, horizon: f64) -> f64 {
    use std::f64::consts::PI;
    if a <= 0.0 {
        return 0.0;
    }
    let r = PI * PI * horizon / (8.0 * a * a);
    // The series converges slowly for small T/a²; the complement is then
    // tiny, so start from the image-sum form instead.
    if r < 0.25 {
        // P = Σ_k (−1)^k [Φ((2k+1)a/√T) − Φ((2k−1)a/√T)] over all integers k.
        let s = horizon.sqrt();
        let mut p = 0.0;
        for k in -50i64..=50 {
            let hi = ((2 * k + 1) as f64) * a / s;
            let lo = ((2 * k - 1) as f64) * a / s;
            let term = normal_cdf(hi) - normal_cdf(lo);
            p += if k % 2 == 0 { term } else { -term };
        }
        return p.clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 0..10_000 {
        let m = (2 * k + 1) as f64;
        let term = (-m * m * r).exp() / m;
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (4.0 / PI * sum).clamp(0.0, 1.0)
}

fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().cdf(x)
}

pub fn brownian_sup_frequency(c: f64, kappa: f64, horizon: f64, n_paths: usize, steps: usize, seed: u64) -> Result<BrownianSup> {
    check_kappa(kappa)?;
    if !(kappa > 0.0 && horizon > 0.0 && c > 0.0) || n_paths == 0 || steps == 0 {
        return Err(LabError::Contract("Brownian sup needs c, kappa, horizon > 0 and paths".into()));
    }
    let sd = (2.0 * kappa * horizon / steps as f64).sqrt();
    let inside: Vec<f64> = (0..n_paths)
        .map(|i| {
            let mut s = RandomStream::new(seed, stream_id(purpose::BROWNIAN, i as u64));
            let mut w = 0.0f64;
            let mut ok = true;
            for _ in 0..steps {
                w += sd * s.gaussian();
                if w.abs() > c {
                    ok = false;
                    break;
                }
            }
            if ok {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (frequency, std_error) = mean_and_error(&inside);
    let var = 2.0 * kappa * horizon;
    Ok(BrownianSup {
        c,
        kappa,
        horizon,
        n_paths,
        steps,
        frequency,
        std_error,
        stated_bound: 1.0 - 2.0 * (-c * c / var).exp(),
        reflection_bound: 1.0 - 2.0 * (-c * c / (2.0 * var)).exp(),
        exact: exit_free_probability(c / (2.0 * kappa).sqrt(), horizon),
    })
}
