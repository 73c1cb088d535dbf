use super::rational::{fmt_q, qi, to_f64, Q};
use super::schedule::Schedule;
use super::ParameterSet;
use num_traits::One;
use serde::Serialize;

/// The three vanishing sequences, each a power `a_q^e` of the scale.
#[derive(Debug, Clone, Serialize)]
pub struct DiffusivitySequences {
    /// Exponent of the dissipative diffusivity κ̃_q.
    pub kappa_tilde_exponent: String,
    /// Exponent of the conservative diffusivity κ_q.
    pub kappa_exponent: String,
    /// Exponent of the convolution width σ_q.
    pub sigma_exponent: String,
    pub ln_kappa_tilde: Vec<f64>,
    pub ln_kappa: Vec<f64>,
    pub ln_sigma: Vec<f64>,
    /// Plain values; zero where they underflow.
    pub kappa_tilde: Vec<f64>,
    pub kappa: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Whether each sequence is strictly decreasing in q.
    pub monotone: [bool; 3],
}

pub fn kappa_tilde_exponent(p: &ParameterSet) -> Q {
    let one = Q::one();
    qi(2) - &p.gamma / (&one + &p.delta) + qi(4) * &p.epsilon
}

pub fn kappa_exponent(p: &ParameterSet) -> Q {
    qi(2) + qi(3) * &p.epsilon
}

pub fn sigma_exponent(p: &ParameterSet) -> Q {
    Q::one() + &p.gamma
}

/// Exponent gap (≥ 0 means the inequality holds) for
/// `sqrt(κ̃_q a_{q-1}^γ) ≤ a_q^(1+2ε)` with `a_{q-1} = a_q^(1/(1+δ))`.
pub fn reach_upper_gap(p: &ParameterSet) -> Q {
    let one = Q::one();
    let lhs = (kappa_tilde_exponent(p) + &p.gamma / (&one + &p.delta)) / qi(2);
    let rhs = &one + qi(2) * &p.epsilon;
    lhs - rhs
}

/// Exponent gap for `sqrt(κ̃_q a_q^(γ−γδ)) ≥ a_q^(1−ε/2)`.
pub fn reach_lower_gap(p: &ParameterSet) -> Q {
    let one = Q::one();
    let lhs = (kappa_tilde_exponent(p) + &p.gamma - &p.gamma * &p.delta) / qi(2);
    let rhs = &one - &p.epsilon / qi(2);
    rhs - lhs
}

/// Exponent `e` with `κλ_q²t̄_q = a_q^e / 4` for `κ = a_q^kappa_exp` in strict mode.
pub fn strict_dissipate_exponent(p: &ParameterSet, kappa_exp: &Q) -> Q {
    kappa_exp - qi(2) + p.idle_exponent()
}

pub fn diffusivity_sequences(p: &ParameterSet, sched: &Schedule) -> DiffusivitySequences {
    let ln_a: Vec<f64> = match sched {
        Schedule::Desk(s) => s.levels.iter().map(|l| l.a_f64().ln()).collect(),
        Schedule::Strict(s) => s.ln_a.clone(),
    };
    let ekt = kappa_tilde_exponent(p);
    let ek = kappa_exponent(p);
    let es = sigma_exponent(p);
    let scale = |e: &Q| -> Vec<f64> {
        let ef = to_f64(e);
        ln_a.iter().map(|l| ef * l).collect()
    };
    let ln_kt = scale(&ekt);
    let ln_k = scale(&ek);
    let ln_s = scale(&es);
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let monotone = [dec(&ln_kt), dec(&ln_k), dec(&ln_s)];
    DiffusivitySequences {
        kappa_tilde_exponent: fmt_q(&ekt),
        kappa_exponent: fmt_q(&ek),
        sigma_exponent: fmt_q(&es),
        kappa_tilde: ln_kt.iter().map(|x| x.exp()).collect(),
        kappa: ln_k.iter().map(|x| x.exp()).collect(),
        sigma: ln_s.iter().map(|x| x.exp()).collect(),
        ln_kappa_tilde: ln_kt,
        ln_kappa: ln_k,
        ln_sigma: ln_s,
        monotone,
    }
}
