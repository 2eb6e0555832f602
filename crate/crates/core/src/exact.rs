//! Exact integer and rational arithmetic: factorials, binomials, Gamma at
//! integer and half-integer arguments, and the `num/den` wire format.
//!
//! Everything here is exact. Floating point appears only in the explicit
//! lossy conversions, which exist so numerical layers can consume exact
//! values at the last moment.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use serde_json::json;

use crate::error::{Error, Result};
use crate::report::{param_map, VerificationReport};
use crate::Rational;

/// Factorials 0..=CAP are memoized; larger arguments are computed by
/// extending the table product on the fly.
const FACTORIAL_CAP: usize = 512;

static FACTORIALS: Lazy<Vec<BigInt>> = Lazy::new(|| {
    let mut table = Vec::with_capacity(FACTORIAL_CAP + 1);
    table.push(BigInt::one());
    for i in 1..=FACTORIAL_CAP {
        let next = table.last().unwrap() * BigInt::from(i);
        table.push(next);
    }
    table
});

pub fn factorial(n: u64) -> BigInt {
    let table = &*FACTORIALS;
    if (n as usize) < table.len() {
        return table[n as usize].clone();
    }
    let mut acc = table.last().unwrap().clone();
    for i in (FACTORIAL_CAP as u64 + 1)..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// C(n, k) over the integers; zero for k outside 0..=n.
pub fn binomial_int(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// C(n, k) as an exact rational, the form the identity checkers consume.
pub fn binomial(n: u64, k: i64) -> Rational {
    Rational::from_integer(binomial_int(n, k))
}

/// Gamma at a positive integer: Γ(n) = (n-1)!.
pub fn gamma_int(n: i64) -> Result<Rational> {
    if n <= 0 {
        return Err(Error::domain(format!("gamma pole at non-positive integer {n}")));
    }
    Ok(Rational::from_integer(factorial(n as u64 - 1)))
}

/// Γ(m/2) represented exactly as `coeff * (sqrt pi)^sqrt_pi`.
///
/// `sqrt_pi` is 0 exactly when m is even (integer argument, plain rational)
/// and 1 when m is odd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntGamma {
    pub coeff: Rational,
    pub sqrt_pi: u8,
}

impl HalfIntGamma {
    /// Γ(m/2) for any integer m >= 1, both parities.
    pub fn of(m: i64) -> Result<Self> {
        if m <= 0 {
            return Err(Error::domain(format!("gamma pole or negative half-integer: m = {m}")));
        }
        if m % 2 == 0 {
            Ok(HalfIntGamma { coeff: gamma_int(m / 2)?, sqrt_pi: 0 })
        } else {
            // Γ(m/2) = (m-2)!! / 2^((m-1)/2) * sqrt(pi), falling from Γ(1/2).
            let mut numer = BigInt::one();
            let mut j = m - 2;
            while j >= 1 {
                numer *= BigInt::from(j);
                j -= 2;
            }
            let denom = BigInt::one() << ((m - 1) / 2) as usize;
            Ok(HalfIntGamma { coeff: Rational::new(numer, denom), sqrt_pi: 1 })
        }
    }

    pub fn to_f64(&self) -> f64 {
        let base = to_f64_lossy(&self.coeff);
        if self.sqrt_pi == 1 {
            base * std::f64::consts::PI.sqrt()
        } else {
            base
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "coeff": fraction_string(&self.coeff), "sqrt_pi": self.sqrt_pi })
    }
}

/// Gamma at a half-odd-integer argument m/2 (m odd).
pub fn gamma_half(m: i64) -> Result<HalfIntGamma> {
    if m <= 0 || m % 2 == 0 {
        return Err(Error::domain(format!("gamma_half wants a positive odd m, got {m}")));
    }
    HalfIntGamma::of(m)
}

/// Legendre duplication at x = k/2: Γ(2x) = 2^(2x-1) Γ(x) Γ(x+1/2) / sqrt(pi).
///
/// Exactly one of Γ(x), Γ(x+1/2) carries a sqrt(pi), which the division
/// cancels, so both sides are plain rationals and the check is exact.
pub fn check_duplication(two_x: i64) -> Result<VerificationReport> {
    if two_x <= 0 {
        return Err(Error::domain(format!("need 2x >= 1, got {two_x}")));
    }
    let lhs = gamma_int(two_x)?; // Γ(2x), 2x = two_x
    let g_x = HalfIntGamma::of(two_x)?;
    let g_x_half = HalfIntGamma::of(two_x + 1)?;
    debug_assert_eq!(g_x.sqrt_pi + g_x_half.sqrt_pi, 1);
    let power = Rational::from_integer(BigInt::one() << (two_x - 1) as usize);
    let rhs = power * &g_x.coeff * &g_x_half.coeff;
    let residual = &lhs - &rhs;
    let pass = residual.is_zero();
    Ok(VerificationReport::exact(
        "gamma/duplication",
        param_map(&[("two_x", json!(two_x))]),
        fraction_string(&lhs),
        fraction_string(&rhs),
        fraction_string(&residual),
        pass,
    ))
}

/// Always `numer/denom`, including integers ("5/1"), matching the wire
/// format. num-rational's own Display drops the denominator when it is 1.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `num/den` or a bare integer, arbitrary precision.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = |_| Error::domain(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        None => {
            let n: BigInt = t.parse().map_err(bad)?;
            Ok(Rational::from_integer(n))
        }
        Some((numer, denom)) => {
            let n: BigInt = numer.trim().parse().map_err(bad)?;
            let d: BigInt = denom.trim().parse().map_err(bad)?;
            if d.is_zero() {
                return Err(Error::domain(format!("zero denominator: {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Shift-based conversion that stays finite for numerators and denominators
/// far beyond f64 range (num-rational's ToPrimitive yields inf/inf = NaN
/// there). Relative error is at the 2^-63 level.
pub fn to_f64_lossy(r: &Rational) -> f64 {
    let numer = r.numer();
    if numer.is_zero() {
        return 0.0;
    }
    let (nm, ne) = big_mantissa(numer.magnitude());
    let (dm, de) = big_mantissa(r.denom().magnitude());
    let sign = if numer.is_negative() { -1.0 } else { 1.0 };
    let exp = (ne - de).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    sign * (nm / dm) * 2f64.powi(exp)
}

/// |x| = mantissa * 2^exponent with the mantissa below 2^64.
fn big_mantissa(x: &num_bigint::BigUint) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_f64().expect("fits"), 0);
    }
    let shift = bits - 64;
    ((x >> shift).to_f64().expect("shifted fits"), shift as i64)
}

/// serde adapter: rationals as `num/den` strings. Use as
/// `#[serde(with = "crate::exact::rational_string")]`.
pub mod rational_string {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fraction_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

/// Map of parameter name -> exact rational, rendered for reports.
pub fn rational_param(name: &str, r: &Rational) -> (String, serde_json::Value) {
    (name.to_string(), json!(fraction_string(r)))
}

pub fn rational_params(pairs: &[(&str, &Rational)]) -> BTreeMap<String, serde_json::Value> {
    pairs.iter().map(|(k, v)| rational_param(k, v)).collect()
}
