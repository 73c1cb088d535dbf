//! Cascade schedule: scales, frequencies, slot durations and the interval
//! tiling of (0, 2) \ {1}.

use super::rational::{fmt_q, from_f64_exact, is_dyadic, qi, to_f64, Q};
use super::{Mode, ParameterSet, STRICT_RESTRICTION_FACTOR};
use crate::error::{LabError, Result};
use num_traits::{One, Zero};
use serde::Serialize;

/// Half-open time interval `(lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

impl Interval {
    pub fn len(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Mirror image about t = 1.
    pub fn reflect(&self) -> Interval {
        Interval { lo: qi(2) - &self.hi, hi: qi(2) - &self.lo }
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }
}

/// One level of the desk cascade. Level `q_max` only carries the final idle
/// window; levels below it carry three slots.
#[derive(Debug, Clone)]
pub struct Level {
    pub q: usize,
    pub a: Q,
    pub lambda: Q,
    pub t: Q,
    pub t_bar: Q,
    pub big_t: Q,
    /// `[I_{q,0}, I_{q,1}, I_{q,2}, I_{q,3}]`; the last level only has `I_{q,0}`.
    pub slots: Vec<Interval>,
    pub active: bool,
    /// Mollifier length smoothing profiles that jump at multiples of `a_q`.
    pub ell: f64,
    /// Good-set restriction at this scale.
    pub restriction: f64,
}

impl Level {
    pub fn a_f64(&self) -> f64 {
        to_f64(&self.a)
    }
    pub fn lambda_f64(&self) -> f64 {
        to_f64(&self.lambda)
    }
    pub fn t_f64(&self) -> f64 {
        to_f64(&self.t)
    }
    pub fn t_bar_f64(&self) -> f64 {
        to_f64(&self.t_bar)
    }
    pub fn big_t_f64(&self) -> f64 {
        to_f64(&self.big_t)
    }
    /// `I_{q,i}` mirrored: `J_{q,i}`.
    pub fn mirror(&self, i: usize) -> Interval {
        self.slots[i].reflect()
    }
}

#[derive(Debug, Clone)]
pub struct CascadeSchedule {
    pub q_max: usize,
    pub m: u32,
    pub gamma: Q,
    pub levels: Vec<Level>,
    /// `I_{-1} = (0, 1 − T_0]`.
    pub pre: Interval,
    /// Length added to the final idle window on top of `t̄_{q_max}` so the
    /// tiling ends exactly at t = 1.
    pub absorbed_tail: Q,
    /// Remainder of the untruncated series beyond what was absorbed, when the
    /// series converges; `None` when the desk idle sequence grows with q.
    pub series_remainder: Option<f64>,
}

impl CascadeSchedule {
    pub fn level(&self, q: usize) -> &Level {
        &self.levels[q]
    }

    /// `T_q`, with `T_{-1}` taken as 1 (the start of time).
    pub fn big_t(&self, q: isize) -> Q {
        if q < 0 {
            Q::one()
        } else {
            self.levels[q as usize].big_t.clone()
        }
    }

    /// All intervals on the forward side, in time order, labelled.
    pub fn forward_intervals(&self) -> Vec<(String, Interval)> {
        let mut out = vec![("I_-1".to_string(), self.pre.clone())];
        for lv in &self.levels {
            for (i, iv) in lv.slots.iter().enumerate() {
                out.push((format!("I_{},{}", lv.q, i), iv.clone()));
            }
        }
        out
    }

    /// Every interval of the tiling, forward then mirrored, with labels.
    pub fn all_intervals(&self) -> Vec<(String, Interval)> {
        let fwd = self.forward_intervals();
        let mut out = fwd.clone();
        for (name, iv) in fwd.iter().rev() {
            out.push((name.replacen('I', "J", 1), iv.reflect()));
        }
        out
    }

    /// Interval endpoints at which trajectories are checkpointed on [t0, t1].
    pub fn checkpoint_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .all_intervals()
            .iter()
            .flat_map(|(_, iv)| [iv.lo_f64(), iv.hi_f64()])
            .filter(|t| *t >= t0 && *t <= t1)
            .collect();
        ts.push(t0);
        ts.push(t1);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        ts
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<_> = self
            .levels
            .iter()
            .map(|lv| {
                serde_json::json!({
                    "q": lv.q,
                    "active": lv.active,
                    "a": fmt_q(&lv.a),
                    "lambda": fmt_q(&lv.lambda),
                    "t": lv.t_f64(),
                    "t_bar": lv.t_bar_f64(),
                    "T": lv.big_t_f64(),
                    "ell": lv.ell,
                    "restriction": lv.restriction,
                    "slots": lv.slots.iter().map(|iv| [iv.lo_f64(), iv.hi_f64()]).collect::<Vec<_>>(),
                    "slots_exact": lv.slots.iter().map(|iv| [fmt_q(&iv.lo), fmt_q(&iv.hi)]).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "q_max": self.q_max,
            "m": self.m,
            "pre": [self.pre.lo_f64(), self.pre.hi_f64()],
            "absorbed_tail": to_f64(&self.absorbed_tail),
            "series_remainder": self.series_remainder,
            "levels": levels,
        })
    }
}

/// Symbolic schedule for strict parameter sets: every quantity is a power of
/// `a0`, stored through its exponent and its natural logarithm.
#[derive(Debug, Clone, Serialize)]
pub struct StrictSchedule {
    pub q_max: usize,
    /// `a_q = a0^(exponent_q)` with `exponent_q = (1+δ)^q` (exact strings).
    pub exponents: Vec<String>,
    pub ln_a: Vec<f64>,
    pub ln_t: Vec<f64>,
    /// `None` for levels outside the idle subsequence.
    pub ln_t_bar: Vec<Option<f64>>,
    pub ln_big_t: Vec<f64>,
    pub ln_ell: Vec<f64>,
    pub ln_restriction: Vec<f64>,
}

impl StrictSchedule {
    pub fn exponent(&self, q: usize) -> Q {
        super::rational::parse_q("exponent", &self.exponents[q]).expect("own formatting")
    }
}

#[derive(Debug, Clone)]
pub enum Schedule {
    Desk(CascadeSchedule),
    Strict(StrictSchedule),
}

impl Schedule {
    pub fn desk(&self) -> Result<&CascadeSchedule> {
        match self {
            Schedule::Desk(s) => Ok(s),
            Schedule::Strict(_) => Err(LabError::Contract(
                "strict schedules are validation-only and cannot be simulated".into(),
            )),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Schedule::Desk(s) => s.to_json(),
            Schedule::Strict(s) => serde_json::to_value(s).unwrap(),
        }
    }
}

pub fn derive_schedule(p: &ParameterSet, q_max: usize) -> Result<Schedule> {
    p.check_ranges()?;
    match p.mode {
        Mode::Desk => derive_desk(p, q_max).map(Schedule::Desk),
        Mode::PaperStrict => derive_strict(p, q_max).map(Schedule::Strict),
    }
}

fn exact_dyadic(field: &str, x: f64) -> Result<Q> {
    if !(x.is_finite() && x > 0.0) {
        return Err(LabError::Schedule(format!("{field} is not a positive finite number ({x})")));
    }
    Ok(from_f64_exact(x))
}

fn desk_ratio(p: &ParameterSet, q: usize) -> u32 {
    let r = &p.desk.ratios;
    r[q.min(r.len() - 1)]
}

fn is_idle_level(q: usize, m: u32) -> bool {
    q.is_multiple_of(m as usize)
}

fn derive_desk(p: &ParameterSet, q_max: usize) -> Result<CascadeSchedule> {
    let gamma = to_f64(&p.gamma);
    let idle_exp = to_f64(&p.idle_exponent());
    let idle_scale = to_f64(&p.desk.idle_scale);
    let a0 = p.a0.exact().expect("checked by check_ranges");

    let scale_at = |q: usize| -> Q {
        let mut a = a0.clone();
        for j in 0..q {
            a /= qi(desk_ratio(p, j) as i64);
        }
        a
    };
    let slot_len = |a: &Q| exact_dyadic("t_q", to_f64(a).powf(gamma));
    let idle_len = |q: usize, a: &Q| -> Result<Q> {
        if is_idle_level(q, p.m) {
            exact_dyadic("t_bar_q", idle_scale * to_f64(a).powf(idle_exp))
        } else {
            Ok(Q::zero())
        }
    };

    let mut a = Vec::with_capacity(q_max + 1);
    let mut t = Vec::with_capacity(q_max + 1);
    let mut tb = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let aq = scale_at(q);
        t.push(slot_len(&aq)?);
        tb.push(idle_len(q, &aq)?);
        a.push(aq);
    }

    // Final window: the last idle length plus every slot (and, when the idle
    // sequence is summable, every idle window) the truncation drops.
    let convergent = idle_exp > 0.0;
    let head = to_f64(&tb[q_max]) + 3.0 * to_f64(&t[q_max]);
    let mut dropped = 0.0f64;
    let mut last_term = 0.0f64;
    {
        let mut aq = a[q_max].clone();
        for j in q_max + 1..q_max + 2000 {
            aq /= qi(desk_ratio(p, j - 1) as i64);
            let af = to_f64(&aq);
            let mut term = 3.0 * af.powf(gamma);
            if convergent && is_idle_level(j, p.m) {
                term += idle_scale * af.powf(idle_exp);
            }
            dropped += term;
            last_term = term;
            if term <= 1e-18 * head {
                break;
            }
        }
    }
    let mut absorbed = qi(3) * &t[q_max];
    if dropped > 0.0 {
        absorbed += exact_dyadic("tail", dropped)?;
    }
    let final_window = &tb[q_max] + &absorbed;

    let mut big_t = vec![Q::zero(); q_max + 1];
    big_t[q_max] = final_window.clone();
    for q in (0..q_max).rev() {
        big_t[q] = &tb[q] + qi(3) * &t[q] + &big_t[q + 1];
    }
    if big_t[0] >= Q::one() {
        return Err(LabError::Schedule(format!(
            "cascade does not fit before t=1 (T_0 = {:.6})",
            to_f64(&big_t[0])
        )));
    }

    let mut levels = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let start = Q::one() - &big_t[q];
        let slots = if q < q_max {
            let i0 = Interval { lo: start.clone(), hi: &start + &tb[q] };
            let mut v = vec![i0];
            for i in 1..=3 {
                let lo = &start + &tb[q] + qi(i - 1) * &t[q];
                let hi = &lo + &t[q];
                v.push(Interval { lo, hi });
            }
            v
        } else {
            vec![Interval { lo: start, hi: Q::one() }]
        };
        let af = to_f64(&a[q]);
        let ell = p.desk.collar * af;
        levels.push(Level {
            q,
            lambda: Q::one() / (qi(2) * &a[q]),
            a: a[q].clone(),
            t: t[q].clone(),
            t_bar: if q == q_max { final_window.clone() } else { tb[q].clone() },
            big_t: big_t[q].clone(),
            slots,
            active: q < q_max,
            ell,
            restriction: p.desk.restriction_factor * ell,
        });
    }
    debug_assert!(levels.iter().all(|l| is_dyadic(&l.t)));
    Ok(CascadeSchedule {
        q_max,
        m: p.m,
        gamma: p.gamma.clone(),
        pre: Interval { lo: Q::zero(), hi: Q::one() - &big_t[0] },
        levels,
        absorbed_tail: absorbed,
        series_remainder: if convergent { Some(last_term) } else { None },
    })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn derive_strict(p: &ParameterSet, q_max: usize) -> Result<StrictSchedule> {
    let one = Q::one();
    let growth = &one + &p.delta;
    let ln_a0 = p.a0.ln();
    let gamma = to_f64(&p.gamma);
    let idle = to_f64(&p.idle_exponent());
    let ed = to_f64(&(&p.epsilon * &p.delta));
    // Extra levels beyond q_max so T_q includes the (super-geometrically
    // decaying) series tail.
    let depth = q_max + 8;
    let mut exps = Vec::with_capacity(depth + 1);
    let mut e = one.clone();
    for _ in 0..=depth {
        exps.push(e.clone());
        e = &e * &growth;
    }
    let ln_a: Vec<f64> = exps.iter().map(|e| to_f64(e) * ln_a0).collect();
    let ln_t: Vec<f64> = ln_a.iter().map(|l| gamma * l).collect();
    let ln_tb: Vec<Option<f64>> = ln_a
        .iter()
        .enumerate()
        .map(|(q, l)| if is_idle_level(q, p.m) { Some(idle * l) } else { None })
        .collect();
    let mut ln_big_t = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let mut terms = Vec::new();
        for j in q..=depth {
            terms.push(ln_t[j] + 3f64.ln());
            if let Some(x) = ln_tb[j] {
                terms.push(x);
            }
        }
        ln_big_t.push(log_sum_exp(&terms));
    }
    if ln_big_t[0] >= 0.0 {
        return Err(LabError::Schedule("cascade does not fit before t=1".into()));
    }
    let ln_ell: Vec<f64> = ln_a[..=q_max]
        .iter()
        .map(|l| (1.0 + ed) * (l + 2f64.ln()))
        .collect();
    let ln_restriction: Vec<f64> = ln_a[..=q_max]
        .iter()
        .map(|l| STRICT_RESTRICTION_FACTOR.ln() + (1.0 + ed) * l)
        .collect();
    Ok(StrictSchedule {
        q_max,
        exponents: exps[..=q_max].iter().map(fmt_q).collect(),
        ln_a: ln_a[..=q_max].to_vec(),
        ln_t: ln_t[..=q_max].to_vec(),
        ln_t_bar: ln_tb[..=q_max].to_vec(),
        ln_big_t,
        ln_ell,
        ln_restriction,
    })
}
