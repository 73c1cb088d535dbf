//! Scalar diagnostics on grid fields: set pairings, Hölder seminorms,
//! structure functions and space-time norms.

use super::grid::{node, ScalarField};
use crate::geometry::SetDescriptor;
use serde::Serialize;

/// Midpoint quadrature of `∫ ϑ·1_A`.
pub fn weak_pairing(field: &ScalarField, set: &SetDescriptor) -> f64 {
    let n = field.n;
    let mut acc = 0.0;
    for j in 0..n {
        let y = node(j, n);
        for i in 0..n {
            if set.contains([node(i, n), y]) {
                acc += field.values[j * n + i];
            }
        }
    }
    acc / (n * n) as f64
}

/// Largest `|ϑ(x + h e_k) − ϑ(x)|` over the grid for an offset of `s` cells.
fn max_increment(field: &ScalarField, s: usize) -> f64 {
    let n = field.n;
    let v = &field.values;
    let mut m: f64 = 0.0;
    for j in 0..n {
        let row = &v[j * n..(j + 1) * n];
        let up = &v[((j + s) % n) * n..((j + s) % n + 1) * n];
        for i in 0..n {
            m = m.max((row[(i + s) % n] - row[i]).abs()).max((up[i] - row[i]).abs());
        }
    }
    m
}

/// `max_h ‖ϑ(·+h) − ϑ‖_∞ / |h|^β` over axis offsets `h = 2^j/N`, `h ≤ 1/2`.
pub fn holder_seminorm(field: &ScalarField, beta: f64) -> f64 {
    let n = field.n;
    let mut best: f64 = 0.0;
    let mut s = 1;
    while s <= n / 2 {
        let h = s as f64 / n as f64;
        best = best.max(max_increment(field, s) / h.powf(beta));
        s *= 2;
    }
    best
}

/// Spatial mean of `|ϑ(x + ℓe_k) − ϑ(x)|^order`, averaged over both axes.
/// The offset is rounded to the nearest whole number of cells.
pub fn structure_function(field: &ScalarField, ell: f64, order: f64) -> f64 {
    let n = field.n;
    let s = ((ell * n as f64).round() as usize).max(1) % n;
    let v = &field.values;
    let mut acc = 0.0;
    for j in 0..n {
        let row = &v[j * n..(j + 1) * n];
        let up = &v[((j + s) % n) * n..((j + s) % n + 1) * n];
        for i in 0..n {
            acc += (row[(i + s) % n] - row[i]).abs().powf(order) + (up[i] - row[i]).abs().powf(order);
        }
    }
    acc / (2 * n * n) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct LpTimeNorm {
    pub value: f64,
    /// `(t_a, t_b, ∫ ‖ϑ‖^{p°}_{C^β})` per interval between snapshots.
    pub intervals: Vec<(f64, f64, f64)>,
}

/// `(∫ ‖ϑ(t)‖^{p°}_{C^β} dt)^{1/p°}` by the trapezoid rule over the
/// snapshots, with `‖·‖_{C^β} = ‖·‖_∞ + [·]_β` (just `‖·‖_∞` for β = 0).
pub fn lp_time_norm(trajectory: &[ScalarField], p_circ: f64, beta: f64) -> LpTimeNorm {
    let norm = |f: &ScalarField| {
        let s = f.sup_norm();
        if beta == 0.0 {
            s
        } else {
            s + holder_seminorm(f, beta)
        }
    };
    let vals: Vec<f64> = trajectory.iter().map(|f| norm(f).powf(p_circ)).collect();
    let mut intervals = Vec::new();
    let mut total = 0.0;
    for k in 1..trajectory.len() {
        let (ta, tb) = (trajectory[k - 1].time, trajectory[k].time);
        let c = 0.5 * (tb - ta) * (vals[k] + vals[k - 1]);
        total += c;
        intervals.push((ta, tb, c));
    }
    LpTimeNorm { value: total.powf(1.0 / p_circ), intervals }
}
