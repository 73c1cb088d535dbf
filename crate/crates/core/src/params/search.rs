//! Exact search for admissible (ε, δ) given the regularity pair (α, β).

use super::constraints::{epsilon_budget, integrability_budget, regularity_budget, validate_constraints, ConstraintReport};
use super::rational::{ceil_int, fmt_q, q, qi, Q};
use super::{DeskSettings, Exponent, Mode, ParameterSet, ScaleBase};
use crate::error::Result;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found { params: Box<ParameterSet>, report: ConstraintReport },
    /// No (ε, δ) can work; the string is the exact argument.
    Infeasible(String),
    /// Nothing on the searched grid, but no proof of infeasibility either.
    NotFound,
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

/// Yaglom-compatible pairs `(p, p°)` tried when the caller does not fix them.
pub fn yaglom_pairs() -> Vec<(Exponent, Q)> {
    vec![
        (Exponent::Infinite, qi(2)),
        (Exponent::Finite(qi(4)), q(8, 3)),
        (Exponent::Finite(qi(3)), qi(3)),
        (Exponent::Finite(qi(2)), qi(4)),
    ]
}

/// Supremum of the regularity budget over ε, δ > 0 is `1 − 2β − α`, approached
/// as both go to zero and never attained. A non-positive supremum is a proof
/// that no admissible pair exists.
pub fn infeasibility_certificate(alpha: &Q, beta: &Q) -> Option<String> {
    let sup = Q::one() - qi(2) * beta - alpha;
    if sup.is_positive() {
        None
    } else {
        Some(format!(
            "every term subtracted from 1 in the regularity budget is strictly increasing in (epsilon, delta), \
             so its supremum over epsilon, delta > 0 is 1 - 2*beta - alpha = {} <= 0; no admissible pair exists",
            fmt_q(&sup)
        ))
    }
}

/// Completes a strict parameter set from (α, β, p, p°, ε, δ): γ from its
/// formula, the smallest admissible m, and `a0 = 20^(-k)` with the smallest
/// k satisfying the scale floor.
pub fn complete_strict(alpha: Q, beta: Q, p: Exponent, p_circ: Q, epsilon: Q, delta: Q) -> ParameterSet {
    let m_minus_1 = ceil_int(&(qi(16) / (&delta * &delta)));
    let m = m_minus_1.to_u32().unwrap_or(u32::MAX - 1) + 1;
    let k = ceil_int(&(qi(8) / (&epsilon * &delta)));
    let mut ps = ParameterSet {
        p,
        p_circ,
        alpha,
        beta,
        epsilon,
        delta,
        gamma: Q::zero(),
        m,
        a0: ScaleBase { base: qi(20), power: Q::from_integer(k) },
        mode: Mode::PaperStrict,
        desk: DeskSettings::default(),
    };
    ps.gamma = ps.gamma_formula();
    ps
}

/// Searches ε, δ over negative powers of two (largest δ first, then the
/// largest admissible ε) and, unless fixed, over standard Yaglom pairs.
pub fn search_parameters(alpha: &Q, beta: &Q, fixed: Option<(Exponent, Q)>) -> Result<SearchOutcome> {
    if let Some(cert) = infeasibility_certificate(alpha, beta) {
        return Ok(SearchOutcome::Infeasible(cert));
    }
    let pairs = match fixed {
        Some(pair) => vec![pair],
        None => yaglom_pairs(),
    };
    for (p, p_circ) in pairs {
        for kd in 3..=14u32 {
            let delta = Q::new(1.into(), num_bigint::BigInt::one() << kd);
            for ke in 1..=64u32 {
                let epsilon = Q::new(1.into(), num_bigint::BigInt::one() << ke);
                if epsilon_budget(&epsilon, &delta).is_negative() {
                    continue;
                }
                if !regularity_budget(alpha, beta, &epsilon, &delta).is_positive()
                    || !integrability_budget(&p_circ, beta, &epsilon, &delta).is_positive()
                {
                    // Smaller ε only helps slightly; keep scanning.
                    continue;
                }
                let ps = complete_strict(alpha.clone(), beta.clone(), p.clone(), p_circ.clone(), epsilon, delta.clone());
                let report = validate_constraints(&ps)?;
                if report.passed {
                    return Ok(SearchOutcome::Found { params: Box::new(ps), report });
                }
            }
        }
    }
    Ok(SearchOutcome::NotFound)
}
