//! Per-segment sup/Lipschitz/Hölder norms of the field and the aggregate
//! `L^p_t C^α_x` partial sum.

use super::{Stage, VelocityField};
use crate::params::rational::{qi, Q};
use crate::params::{Exponent, ParameterSet};
use num_traits::One;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SegmentNorms {
    pub label: String,
    pub q: usize,
    pub stage: Stage,
    pub sup: f64,
    pub lip: f64,
    /// Bound on the sup from the construction.
    pub sup_bound: f64,
    /// Gradient bound with the mollifier length of the finer scale in place
    /// of its strict-regime expression.
    pub lip_bound: f64,
    pub c_alpha: f64,
    /// ‖η‖_{C^1}, ‖η‖_{C^2} and their required bounds.
    pub cutoff_ck: [f64; 2],
    pub cutoff_ck_bounds: [f64; 2],
    pub within_bounds: bool,
    pub cutoff_within_bounds: bool,
    /// ∫ ‖u(t)‖_{C^α}^p dt over the segment (or the sup for p = ∞).
    pub lp_contribution: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldNormReport {
    pub alpha: f64,
    /// Time exponent; `None` is p = ∞.
    pub p: Option<f64>,
    pub segments: Vec<SegmentNorms>,
    /// Per-level sums of `lp_contribution`.
    pub level_sums: Vec<f64>,
    /// `(Σ contributions)^{1/p}` (max for p = ∞).
    pub lp_calpha_partial: f64,
    /// Ratio of the last two level sums, used to continue the series.
    pub tail_ratio: Option<f64>,
    /// Geometric bound on the untruncated remainder, when the ratio is < 1.
    pub tail_bound: Option<f64>,
    pub diverges: bool,
}

/// `γ/p + 1 − γ − α(1 + εδ)(1 + δ)`: the velocity lies in `L^p C^α` when
/// this is positive.
pub fn regularity_exponent(p: &ParameterSet) -> Q {
    let one = Q::one();
    let gp = match &p.p {
        Exponent::Infinite => qi(0),
        Exponent::Finite(v) => &p.gamma / v,
    };
    gp + &one - &p.gamma - &p.alpha * (&one + &p.epsilon * &p.delta) * (&one + &p.delta)
}

/// Norms of every segment whose support meets `window` (all when `None`).
pub fn field_norm_report(f: &VelocityField, alpha: f64, p: Option<f64>, window: Option<(f64, f64)>) -> FieldNormReport {
    let sched = &f.schedule;
    let gamma = crate::params::rational::to_f64(&sched.gamma);
    let mut segments = Vec::new();
    let mut level_sums = vec![0.0f64; sched.q_max];
    for s in &f.segments {
        let (lo, hi) = s.support();
        if let Some((w0, w1)) = window {
            if hi <= w0 || lo >= w1 {
                continue;
            }
        }
        let q = s.q;
        let a = sched.levels[q].a_f64();
        let a_next = sched.levels[q + 1].a_f64();
        let ell = sched.levels[q + 1].ell;
        let at = a.powf(-gamma);
        let peak = s.cutoff.peak();
        let sup = peak * s.profile.sup();
        let lip = peak * s.profile.lip();
        let (sup_bound, lip_bound) = match s.stage {
            Stage::Mix2 => (a * at, at * 2.0 * a / ell),
            Stage::Mix3 => (2.0 * a_next * at, at * 2.0 * a_next / ell),
            Stage::Swap => (2.0 * a * at, at * 2.0 * a / ell),
        };
        let c1 = s.cutoff.ck_norm(1, 4000);
        let c2 = s.cutoff.ck_norm(2, 4000);
        let per_k = if s.stage == Stage::Swap { 1.0 } else { 2.0 };
        let ck_bounds = [a.powf(-per_k * gamma), a.powf(-2.0 * per_k * gamma)];
        let w_sup = s.profile.sup();
        let w_lip = s.profile.lip();
        let w_calpha = w_sup + 2f64.powf(1.0 - alpha) * w_sup.powf(1.0 - alpha) * w_lip.powf(alpha);
        let n = 2000;
        let lp_contribution = match p {
            None => peak * w_calpha,
            Some(pe) => {
                let h = (hi - lo) / n as f64;
                let mut acc = 0.0;
                for j in 0..=n {
                    let t = lo + j as f64 * h;
                    let wgt = if j == 0 || j == n { 0.5 } else { 1.0 };
                    acc += wgt * s.eta(t).abs().powf(pe);
                }
                acc * h * w_calpha.powf(pe)
            }
        };
        level_sums[q] = match p {
            None => level_sums[q].max(lp_contribution),
            Some(_) => level_sums[q] + lp_contribution,
        };
        segments.push(SegmentNorms {
            label: s.label.clone(),
            q,
            stage: s.stage,
            sup,
            lip,
            sup_bound,
            lip_bound,
            c_alpha: peak * w_calpha,
            cutoff_ck: [c1, c2],
            cutoff_ck_bounds: ck_bounds,
            within_bounds: sup <= sup_bound * (1.0 + 1e-12) && lip <= lip_bound * (1.0 + 1e-12),
            cutoff_within_bounds: c1 <= ck_bounds[0] && c2 <= ck_bounds[1],
            lp_contribution,
        });
    }
    let lp_calpha_partial = match p {
        None => level_sums.iter().fold(0.0f64, |m, v| m.max(*v)),
        Some(pe) => level_sums.iter().sum::<f64>().powf(1.0 / pe),
    };
    let nonzero: Vec<f64> = level_sums.iter().copied().filter(|v| *v > 0.0).collect();
    let tail_ratio = if nonzero.len() >= 2 {
        Some(nonzero[nonzero.len() - 1] / nonzero[nonzero.len() - 2])
    } else {
        None
    };
    let tail_bound = match (p, tail_ratio) {
        (Some(_), Some(r)) if r < 1.0 => Some(nonzero[nonzero.len() - 1] * r / (1.0 - r)),
        (None, Some(r)) if r <= 1.0 => Some(nonzero[nonzero.len() - 1]),
        _ => None,
    };
    FieldNormReport {
        alpha,
        p,
        segments,
        diverges: tail_ratio.is_some() && tail_bound.is_none(),
        level_sums,
        lp_calpha_partial,
        tail_ratio,
        tail_bound,
    }
}
