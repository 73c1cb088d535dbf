use super::rational::to_f64;
use super::schedule::CascadeSchedule;
use serde::Serialize;

/// Dimensionless combinations that decide, level by level, whether diffusion
/// is felt during the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessGroups {
    /// κλ_q²(T_{q−1} − T_q): diffusion at the new scale before the window.
    pub close_flows: f64,
    /// κλ_q²t̄_q: diffusion during the idle window of level q.
    pub dissipate: f64,
    /// κ(T_q − T_{q+1})λ_{q+1}²: diffusion at the next scale during level q.
    pub ito_tanaka: f64,
    /// κλ_q²T_q: diffusion at scale q over the rest of the cascade.
    pub survive: f64,
}

/// Frequency of the scale one level finer than `q`, continuing the ratio list
/// past the truncation when needed.
fn next_lambda(sched: &CascadeSchedule, q: usize) -> f64 {
    if q < sched.q_max {
        sched.levels[q + 1].lambda_f64()
    } else {
        let lv = &sched.levels[q];
        let r = if q > 0 {
            sched.levels[q - 1].a_f64() / lv.a_f64()
        } else {
            4.0
        };
        lv.lambda_f64() * r
    }
}

/// Groups for level `q ≤ q_max`. At the last level the window is the final
/// idle window and the finer scale is the continuation of the ratio list
/// (with `T_{q_max+1} = 0`).
pub fn goal_inequalities(sched: &CascadeSchedule, kappa: f64, q: usize) -> DimensionlessGroups {
    let lv = &sched.levels[q];
    let l2 = lv.lambda_f64().powi(2);
    let t_q = lv.big_t_f64();
    let t_prev = to_f64(&sched.big_t(q as isize - 1));
    let t_next = if q < sched.q_max { sched.levels[q + 1].big_t_f64() } else { 0.0 };
    let ln = next_lambda(sched, q);
    DimensionlessGroups {
        close_flows: kappa * l2 * (t_prev - t_q),
        dissipate: kappa * l2 * lv.t_bar_f64(),
        ito_tanaka: kappa * (t_q - t_next) * ln * ln,
        survive: kappa * l2 * t_q,
    }
}

/// Diffusivity giving a prescribed `dissipate` group at level `q`.
pub fn kappa_for_dissipate(sched: &CascadeSchedule, q: usize, target: f64) -> f64 {
    let lv = &sched.levels[q];
    target / (lv.lambda_f64().powi(2) * lv.t_bar_f64())
}

/// Diffusivity giving a prescribed `survive` group at level `q`.
pub fn kappa_for_survive(sched: &CascadeSchedule, q: usize, target: f64) -> f64 {
    let lv = &sched.levels[q];
    target / (lv.lambda_f64().powi(2) * lv.big_t_f64())
}
