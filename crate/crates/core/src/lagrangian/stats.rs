//! Ensemble statistics: set occupancy, uniformity, window drift and flow-map
//! Lipschitz probes.

use super::rng::{purpose, stream_id};
use super::sde::{signed_gap, ParticleEnsemble};
use crate::error::{LabError, Result};
use crate::eulerian::StepPolicy;
use crate::field::{Extension, VelocityField};
use crate::geometry::SetDescriptor;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pairwise summation in index order; the result does not depend on how a
/// caller partitioned the work that produced `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn fraction(hits: impl Iterator<Item = bool>, n: usize) -> f64 {
    let v: Vec<f64> = hits.map(|b| if b { 1.0 } else { 0.0 }).collect();
    pairwise_sum(&v) / n.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupancy {
    pub set: SetDescriptor,
    pub fraction: f64,
    pub measure: f64,
    /// Binomial standard deviation of the fraction for a uniform ensemble.
    pub sigma: f64,
}

pub fn occupancy_statistics(ens: &ParticleEnsemble, sets: &[SetDescriptor]) -> Vec<Occupancy> {
    let n = ens.len();
    sets.iter()
        .map(|set| {
            let m = set.measure();
            Occupancy {
                set: *set,
                fraction: fraction(ens.positions.iter().map(|x| set.contains(*x)), n),
                measure: m,
                sigma: (m * (1.0 - m) / n.max(1) as f64).sqrt(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uniformity {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of the counts on a `cells × cells` partition against the
/// uniform law.
pub fn uniformity_chi2(points: &[[f64; 2]], cells: usize) -> Uniformity {
    let mut counts = vec![0usize; cells * cells];
    for p in points {
        let i = ((p[0] * cells as f64) as usize).min(cells - 1);
        let j = ((p[1] * cells as f64) as usize).min(cells - 1);
        counts[i * cells + j] += 1;
    }
    let expect = points.len() as f64 / (cells * cells) as f64;
    let terms: Vec<f64> = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).collect();
    let statistic = pairwise_sum(&terms);
    let dof = cells * cells - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| 1.0 - d.cdf(statistic)).unwrap_or(f64::NAN);
    Uniformity { statistic, dof, p_value }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubWindowDrift {
    pub t0: f64,
    pub t1: f64,
    pub max: f64,
    pub fraction_below: f64,
}

/// Distribution of `|∫_{1−T_q}^{1+T_q} u(s, X_s) ds|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowDrift {
    pub q: usize,
    pub threshold: f64,
    /// Per-path drift over the whole window.
    pub window: Vec<f64>,
    pub fraction_below: f64,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    /// The window split at `1 ∓ T_{q+1}`; each judged against threshold/3.
    pub sub_windows: Vec<SubWindowDrift>,
    /// Paths below threshold/3 on every sub-window.
    pub all_sub_windows_below: f64,
}

/// Default window threshold `a_q^(1+ε)/6`.
pub fn drift_threshold(a_q: f64, epsilon: f64) -> f64 {
    a_q.powf(1.0 + epsilon) / 6.0
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

/// Advances `ens` from `1 − T_q` to `1 + T_q`, recording the drift.
pub fn window_displacement_stat(
    f: &VelocityField,
    ens: &mut ParticleEnsemble,
    q: usize,
    threshold: f64,
    policy: &StepPolicy,
) -> Result<WindowDrift> {
    if f.extension == Extension::ForwardOnly {
        return Err(LabError::Contract("window drift needs a field on (0, 2)".into()));
    }
    let sched = &f.schedule;
    if q > sched.q_max {
        return Err(LabError::Contract(format!("level {q} beyond q_max = {}", sched.q_max)));
    }
    let big_t = sched.levels[q].big_t_f64();
    let inner = if q < sched.q_max { sched.levels[q + 1].big_t_f64() } else { 0.0 };
    let start = 1.0 - big_t;
    if (ens.time - start).abs() > 1e-12 {
        return Err(LabError::Contract(format!("ensemble is at t = {}, expected 1 - T_{q} = {start}", ens.time)));
    }
    let cuts = [start, 1.0 - inner, 1.0 + inner, 1.0 + big_t];
    let n = ens.len();
    let mut total = vec![[0.0f64; 2]; n];
    let mut subs = Vec::new();
    let mut sub_ok = vec![true; n];
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        ens.reset_path_stats();
        ens.advance(f, w[1], None, policy)?;
        let mags: Vec<f64> = ens.drift.iter().map(|d| d[0].hypot(d[1])).collect();
        for (i, d) in ens.drift.iter().enumerate() {
            total[i][0] += d[0];
            total[i][1] += d[1];
            sub_ok[i] &= mags[i] < threshold / 3.0;
        }
        subs.push(SubWindowDrift {
            t0: w[0],
            t1: w[1],
            max: mags.iter().fold(0.0, |m, v| m.max(*v)),
            fraction_below: fraction(mags.iter().map(|m| *m < threshold / 3.0), n),
        });
    }
    let window: Vec<f64> = total.iter().map(|d| d[0].hypot(d[1])).collect();
    let mut sorted = window.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(WindowDrift {
        q,
        threshold,
        fraction_below: fraction(window.iter().map(|m| *m < threshold), n),
        mean: pairwise_sum(&window) / n.max(1) as f64,
        median: quantile(&sorted, 0.5),
        p90: quantile(&sorted, 0.9),
        window,
        sub_windows: subs,
        all_sub_windows_below: fraction(sub_ok.into_iter(), n),
    })
}

/// Pair of starting points `x` and `x + h·dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub x: [f64; 2],
    pub dir: [f64; 2],
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub max_ratio: f64,
    /// Max over ω for each probe.
    pub per_probe: Vec<f64>,
    pub n_omega: usize,
    /// Product over the stages met of `3 + ∫‖∇u‖`.
    pub bound: f64,
    /// Product over the stages met of `1 + ∫‖∇u‖`, the sharp bound for a
    /// composition of shears driven by common noise.
    pub sharp_bound: f64,
}

/// `Π (c + ∫_{t0}^{t1} |η|·lip)` over the segments met in the time range.
pub fn stage_product(f: &VelocityField, t0: f64, t1: f64, c: f64) -> f64 {
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    f.segments
        .iter()
        .filter(|s| {
            let (a, b) = s.support();
            a < hi && b > lo
        })
        .map(|s| c + s.mass_between(lo, hi).abs() * s.profile.lip())
        .product()
}

/// Max of `|X(x + h·dir) − X(x)|/h` over probes and `n_omega` Brownian
/// paths, each path shared by all starting points; `t1 < t0` measures the
/// backward flow.
#[allow(clippy::too_many_arguments)]
pub fn flow_lipschitz_estimate(
    f: &VelocityField,
    kappa: f64,
    t0: f64,
    t1: f64,
    probes: &[Probe],
    n_omega: usize,
    seed: u64,
    policy: &StepPolicy,
) -> Result<LipschitzEstimate> {
    let mut pts = Vec::with_capacity(2 * probes.len());
    for p in probes {
        if !(p.h > 0.0) {
            return Err(LabError::Contract("probe separation must be positive".into()));
        }
        pts.push(p.x);
        pts.push([p.x[0] + p.h * p.dir[0], p.x[1] + p.h * p.dir[1]]);
    }
    let mut per_probe = vec![0.0f64; probes.len()];
    for w in 0..n_omega {
        let mut ens = ParticleEnsemble::common_noise(pts.clone(), kappa, t0, seed, stream_id(purpose::LIPSCHITZ, w as u64))?;
        ens.advance(f, t1, None, policy)?;
        for (k, p) in probes.iter().enumerate() {
            let (a, b) = (ens.positions[2 * k], ens.positions[2 * k + 1]);
            let d = signed_gap(b[0] - a[0]).hypot(signed_gap(b[1] - a[1]));
            per_probe[k] = per_probe[k].max(d / p.h);
        }
    }
    Ok(LipschitzEstimate {
        max_ratio: per_probe.iter().fold(0.0, |m, v| m.max(*v)),
        per_probe,
        n_omega,
        bound: stage_product(f, t0, t1, 3.0),
        sharp_bound: stage_product(f, t0, t1, 1.0),
    })
}
