//! Exact rational helpers: parsing, formatting, and power comparisons whose
//! answer is exact (floating point only settles clear-cut cases).

use crate::error::{LabError, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

/// Largest power (in bits of the result) we are willing to materialise when
/// deciding `b^u` against `c^v` exactly.
pub const POWER_BIT_CAP: u64 = 1 << 24;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn parse_q(field: &str, s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || LabError::validation(field, format!("cannot parse `{s}` as an exact rational"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(LabError::validation(field, "zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    if let Some(x) = v.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Huge numerators/denominators: go through logarithms.
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs(v).exp()
}

/// Natural log of |v| computed without overflow.
pub fn ln_abs(v: &Q) -> f64 {
    ln_big(v.numer().magnitude()) - ln_big(v.denom().magnitude())
}

fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn from_f64_exact(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

pub fn recip(v: &Q) -> Q {
    Q::one() / v
}

/// Exact decision of `b^e` compared with `c` for positive rationals `b`, `c`
/// and a positive rational exponent `e = u/v`: compares `b^u` with `c^v`.
/// Logarithms decide when the gap is far above their rounding error;
/// otherwise the integer powers are materialised.
pub fn cmp_pow(b: &Q, e: &Q, c: &Q) -> Result<std::cmp::Ordering> {
    if !b.is_positive() || !c.is_positive() || !e.is_positive() {
        return Err(LabError::Contract("power comparison needs positive operands".into()));
    }
    let u = e.numer().magnitude().clone();
    let v = e.denom().magnitude().clone();
    let (uf, vf) = (u.to_f64().unwrap_or(f64::INFINITY), v.to_f64().unwrap_or(f64::INFINITY));
    let (lhs_log, rhs_log) = (uf * ln_abs(b), vf * ln_abs(c));
    if (lhs_log - rhs_log).abs() > 1e-9 * (1.0 + lhs_log.abs() + rhs_log.abs()) {
        return Ok(lhs_log.total_cmp(&rhs_log));
    }
    let est_bits = |x: &Q, p: f64| -> f64 { p * (x.numer().bits().max(x.denom().bits()) as f64) };
    if est_bits(b, uf) > POWER_BIT_CAP as f64 || est_bits(c, vf) > POWER_BIT_CAP as f64 {
        return Err(LabError::Contract(format!(
            "exact power comparison exceeds the {POWER_BIT_CAP}-bit cap"
        )));
    }
    let (u, v) = (u.to_u32().unwrap(), v.to_u32().unwrap());
    // b^u <=> c^v  iff  nb^u·dc^v <=> nc^v·db^u (all factors positive).
    let lhs = b.numer().magnitude().pow(u) * c.denom().magnitude().pow(v);
    let rhs = c.numer().magnitude().pow(v) * b.denom().magnitude().pow(u);
    Ok(lhs.cmp(&rhs))
}

/// Smallest integer >= v.
pub fn ceil_int(v: &Q) -> BigInt {
    v.ceil().to_integer()
}

pub fn is_dyadic(v: &Q) -> bool {
    let d = v.denom().magnitude();
    d.is_one() || (d & (d - BigUint::one())).is_zero()
}

pub fn sign_str(v: &Q) -> &'static str {
    match v.numer().sign() {
        Sign::Minus => "negative",
        Sign::NoSign => "zero",
        Sign::Plus => "positive",
    }
}
