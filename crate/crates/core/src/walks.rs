//! Step laws for two lattice walks and the splitting identities between
//! position laws and first-passage laws.
//!
//! `PlusMinus` steps +1 with probability p and -1 with probability q = 1-p;
//! `NonDecreasing` steps +1 with probability p and stays put otherwise. Both
//! are skip-free upward, which is what makes every identity here exact: a
//! walk cannot reach level a+b without passing through a, and the time spent
//! is a clean convolution.
//!
//! Probabilities come in two independent shapes: closed-form point masses
//! (binomials times powers) and incrementally built distributions (ratio
//! recurrences from one support point to the next). The unit tests hold the
//! two shapes against each other; the check_* functions compare whole
//! identities in exact rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{fraction_string, to_f64_lossy};
use crate::gamma_identities::{ballot_number, occupancy_number};
use crate::report::{param_map, VerificationReport};
use crate::scalar::{binomial, int, powi, Scalar};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    PlusMinus,
    NonDecreasing,
}

impl WalkKind {
    pub fn label(self) -> &'static str {
        match self {
            WalkKind::PlusMinus => "plus_minus",
            WalkKind::NonDecreasing => "non_decreasing",
        }
    }
}

/// Step distribution: up with probability `up`, otherwise down (PlusMinus)
/// or hold (NonDecreasing).
#[derive(Debug, Clone)]
pub struct WalkParams<T> {
    pub kind: WalkKind,
    pub up: T,
    pub down: T,
}

impl<T: Scalar> WalkParams<T> {
    pub fn new(kind: WalkKind, up: T) -> Result<Self> {
        if up <= T::zero() || up >= T::one() {
            return Err(Error::domain(format!("step probability must be in (0,1), got {up}")));
        }
        let down = T::one() - up.clone();
        Ok(WalkParams { kind, up, down })
    }
}

/// A probability mass function over lattice points, possibly truncated at a
/// horizon; `tail` is then the exact leftover 1 - sum(mass), which covers
/// both "not yet" and "never".
#[derive(Debug, Clone)]
pub struct Pmf<T> {
    pub mass: BTreeMap<i64, T>,
    pub truncated: bool,
    pub tail: Option<T>,
}

impl<T: Scalar> Pmf<T> {
    pub fn at(&self, j: i64) -> T {
        self.mass.get(&j).cloned().unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.mass.values().fold(T::zero(), |acc, v| acc + v.clone())
    }

    fn exact(mass: BTreeMap<i64, T>) -> Self {
        Pmf { mass, truncated: false, tail: None }
    }

    fn truncated(mass: BTreeMap<i64, T>) -> Self {
        let tail = {
            let total = mass.values().fold(T::zero(), |acc, v| acc + v.clone());
            T::one() - total
        };
        Pmf { mass, truncated: true, tail: Some(tail) }
    }
}

impl Pmf<Rational> {
    /// Lossy float view, for feeding expected frequencies to statistics.
    pub fn to_f64(&self) -> Pmf<f64> {
        Pmf {
            mass: self.mass.iter().map(|(k, v)| (*k, to_f64_lossy(v))).collect(),
            truncated: self.truncated,
            tail: self.tail.as_ref().map(to_f64_lossy),
        }
    }
}

/// P{S_n = j} as a closed form; zero off the support.
pub fn position_mass<T: Scalar>(params: &WalkParams<T>, n: u64, j: i64) -> T {
    let n_i = n as i64;
    match params.kind {
        WalkKind::PlusMinus => {
            if j.abs() > n_i || (n_i + j) % 2 != 0 {
                return T::zero();
            }
            let m = (n_i + j) / 2;
            binomial::<T>(n_i, m)
                * powi(&params.up, m as u32)
                * powi(&params.down, (n_i - m) as u32)
        }
        WalkKind::NonDecreasing => {
            if j < 0 || j > n_i {
                return T::zero();
            }
            binomial::<T>(n_i, j) * powi(&params.up, j as u32) * powi(&params.down, (n_i - j) as u32)
        }
    }
}

/// P{T_a = n} as a closed form, where T_a is the first time the walk sits at
/// level a (for PlusMinus, a = 0 means first return to the origin).
pub fn first_passage_mass<T: Scalar>(params: &WalkParams<T>, a: i64, n: u64) -> Result<T> {
    let n_i = n as i64;
    match params.kind {
        WalkKind::PlusMinus => {
            if a == 0 {
                // first return: C(n, n/2) (pq)^(n/2) / (n-1) on even n >= 2
                if n < 2 || n % 2 != 0 {
                    return Ok(T::zero());
                }
                let half = n_i / 2;
                return Ok(binomial::<T>(n_i, half)
                    * powi(&(params.up.clone() * params.down.clone()), half as u32)
                    / int(n_i - 1));
            }
            // mirror negative targets by swapping the step probabilities
            let (toward, away) =
                if a > 0 { (&params.up, &params.down) } else { (&params.down, &params.up) };
            let a_abs = a.abs();
            if n_i < a_abs || (n_i + a_abs) % 2 != 0 {
                return Ok(T::zero());
            }
            let m = (n_i + a_abs) / 2;
            // hitting-time relation: (|a|/n) P{S_n = a}
            Ok(int::<T>(a_abs) / int(n_i)
                * binomial::<T>(n_i, m)
                * powi(toward, m as u32)
                * powi(away, (n_i - m) as u32))
        }
        WalkKind::NonDecreasing => {
            if a < 1 {
                return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
            }
            if n_i < a {
                return Ok(T::zero());
            }
            // a-1 up-steps among the first n-1, then an up-step
            Ok(binomial::<T>(n_i - 1, a - 1)
                * powi(&params.up, a as u32)
                * powi(&params.down, (n_i - a) as u32))
        }
    }
}

/// Full position law at time n, built incrementally along the support with
/// the binomial ratio recurrence (O(n) multiplications).
pub fn pmf_position<T: Scalar>(params: &WalkParams<T>, n: u64) -> Pmf<T> {
    let n_i = n as i64;
    let mut mass = BTreeMap::new();
    let ratio_base = params.up.clone() / params.down.clone();
    let mut cur = powi(&params.down, n as u32);
    for m in 0..=n_i {
        let j = match params.kind {
            WalkKind::PlusMinus => 2 * m - n_i,
            WalkKind::NonDecreasing => m,
        };
        mass.insert(j, cur.clone());
        if m < n_i {
            // C(n,m+1)/C(n,m) = (n-m)/(m+1)
            cur = cur * int::<T>(n_i - m) / int(m + 1) * ratio_base.clone();
        }
    }
    Pmf::exact(mass)
}

/// First-passage law up to `horizon`, built with the ratio recurrences
/// between consecutive support points; exact at every kept point, with the
/// leftover probability in `tail`.
pub fn pmf_first_passage<T: Scalar>(
    params: &WalkParams<T>,
    a: i64,
    horizon: u64,
) -> Result<Pmf<T>> {
    let mut mass = BTreeMap::new();
    match params.kind {
        WalkKind::PlusMinus => {
            let pq = params.up.clone() * params.down.clone();
            if a == 0 {
                // mass(2) = 2pq; mass(n+2)/mass(n) = (n+2)(n-1) pq / (n/2+1)^2
                let mut n = 2i64;
                let mut cur = int::<T>(2) * pq.clone();
                while n as u64 <= horizon {
                    mass.insert(n, cur.clone());
                    let half = n / 2;
                    cur = cur * int::<T>((n + 2) * (n - 1)) / (int::<T>(half + 1) * int(half + 1))
                        * pq.clone();
                    n += 2;
                }
            } else {
                let a_abs = a.abs();
                let toward = if a > 0 { params.up.clone() } else { params.down.clone() };
                let mut n = a_abs;
                let mut cur = powi(&toward, a_abs as u32);
                while n as u64 <= horizon {
                    mass.insert(n, cur.clone());
                    // m = (n+|a|)/2; mass(n+2)/mass(n) = n(n+1) pq / ((m+1)(n+1-m))
                    let m = (n + a_abs) / 2;
                    cur = cur * int::<T>(n * (n + 1)) / (int::<T>(m + 1) * int(n + 1 - m))
                        * pq.clone();
                    n += 2;
                }
            }
        }
        WalkKind::NonDecreasing => {
            if a < 1 {
                return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
            }
            // mass(a) = p^a; mass(n+1)/mass(n) = n q / (n-a+1)
            let mut n = a;
            let mut cur = powi(&params.up, a as u32);
            while n as u64 <= horizon {
                mass.insert(n, cur.clone());
                cur = cur * int::<T>(n) / int(n - a + 1) * params.down.clone();
                n += 1;
            }
        }
    }
    Ok(Pmf::truncated(mass))
}

/// P{T_a < infinity} in closed form. For PlusMinus this is
/// (min(1, p/q))^a toward positive a, the mirror toward negative a, and
/// 2 min(p,q) for the first return; a NonDecreasing walk hits every a >= 1.
pub fn hitting_probability<T: Scalar>(params: &WalkParams<T>, a: i64) -> Result<T> {
    match params.kind {
        WalkKind::PlusMinus => {
            let (toward, away) = if a >= 0 {
                (params.up.clone(), params.down.clone())
            } else {
                (params.down.clone(), params.up.clone())
            };
            if a == 0 {
                let m = if params.up < params.down { params.up.clone() } else { params.down.clone() };
                return Ok(int::<T>(2) * m);
            }
            if toward >= away {
                Ok(T::one())
            } else {
                Ok(powi(&(toward / away), a.unsigned_abs() as u32))
            }
        }
        WalkKind::NonDecreasing => {
            if a < 1 {
                return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
            }
            Ok(T::one())
        }
    }
}

fn walk_params_json(params: &WalkParams<Rational>, extra: &[(&str, serde_json::Value)]) -> BTreeMap<String, serde_json::Value> {
    let mut entries = vec![
        ("kind", json!(params.kind.label())),
        ("p", json!(fraction_string(&params.up))),
    ];
    entries.extend(extra.iter().cloned());
    param_map(&entries)
}

fn exact_check(
    id: &str,
    params: BTreeMap<String, serde_json::Value>,
    lhs: &Rational,
    rhs: &Rational,
) -> VerificationReport {
    VerificationReport::exact(
        id,
        params,
        fraction_string(lhs),
        fraction_string(rhs),
        fraction_string(&(lhs.clone() - rhs.clone())),
        lhs == rhs,
    )
}

fn validate_split_signs(kind: WalkKind, a: i64, b: i64) -> Result<()> {
    let ok = match kind {
        WalkKind::PlusMinus => (a >= 1 && b >= 0) || (a <= -1 && b <= 0),
        WalkKind::NonDecreasing => a >= 1 && b >= 0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "split needs the intermediate level between start and end, got a={a} b={b}"
        )))
    }
}

/// The hitting-time relation P{T_a = n} = (|a|/n) P{S_n = a}, compared as
/// two full closed forms (the ratio-recurrence route is tested separately
/// against the closed forms).
pub fn check_hitting_vs_position(
    params: &WalkParams<Rational>,
    a: i64,
    n: u64,
) -> Result<VerificationReport> {
    if a == 0 || n == 0 {
        return Err(Error::domain("hitting-time relation needs a != 0, n >= 1"));
    }
    if params.kind == WalkKind::NonDecreasing && a < 1 {
        return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
    }
    let lhs = first_passage_mass(params, a, n)?;
    let rhs = match params.kind {
        WalkKind::PlusMinus => {
            Rational::new(BigInt::from(a.abs()), BigInt::from(n)) * position_mass(params, n, a)
        }
        // the walk sits at a when first reaching it iff the n-th step is up:
        // P{T_a = n} = (p/ P{step up at n}) ... = P{S_{n-1} = a-1} p
        WalkKind::NonDecreasing => position_mass(params, n - 1, a - 1) * params.up.clone(),
    };
    Ok(exact_check(
        "walk/hitting_vs_position",
        walk_params_json(params, &[("a", json!(a)), ("n", json!(n))]),
        &lhs,
        &rhs,
    ))
}

/// P{S_n = a+b} = sum_k P{T_a = k} P{S_{n-k} = b at level b above a}:
/// splitting the position law at the first passage through level a.
pub fn check_position_split(
    params: &WalkParams<Rational>,
    a: i64,
    b: i64,
    n: u64,
) -> Result<VerificationReport> {
    validate_split_signs(params.kind, a, b)?;
    let lhs = position_mass(params, n, a + b);
    let mut rhs = Rational::zero();
    for k in (a.abs() as u64)..=n {
        let t = first_passage_mass(params, a, k)?;
        if !t.is_zero() {
            rhs += t * position_mass(params, n - k, b);
        }
    }
    Ok(exact_check(
        "walk/position_split",
        walk_params_json(params, &[("a", json!(a)), ("b", json!(b)), ("n", json!(n))]),
        &lhs,
        &rhs,
    ))
}

/// P{T_{a+b} = n} = sum_k P{T_a = k} P{T_b = n-k}: passage times through
/// successive levels add as independent pieces.
pub fn check_passage_split(
    params: &WalkParams<Rational>,
    a: i64,
    b: i64,
    n: u64,
) -> Result<VerificationReport> {
    validate_split_signs(params.kind, a, b)?;
    if b == 0 {
        return Err(Error::domain("passage split needs b != 0"));
    }
    let lhs = first_passage_mass(params, a + b, n)?;
    let mut rhs = Rational::zero();
    for k in (a.abs() as u64)..=n {
        let t = first_passage_mass(params, a, k)?;
        if !t.is_zero() {
            rhs += t * first_passage_mass(params, b, n - k)?;
        }
    }
    Ok(exact_check(
        "walk/passage_split",
        walk_params_json(params, &[("a", json!(a)), ("b", json!(b)), ("n", json!(n))]),
        &lhs,
        &rhs,
    ))
}

/// The time-weighted refinement of the passage split:
/// sum_k k P{T_a = k} P{T_b = n-k} = (a/(a+b)) n P{T_{a+b} = n}.
/// The first of a+b levels accounts for an a/(a+b) share of the total time,
/// exactly, at every n.
pub fn check_weighted_split(
    params: &WalkParams<Rational>,
    a: i64,
    b: i64,
    n: u64,
) -> Result<VerificationReport> {
    validate_split_signs(params.kind, a, b)?;
    if b == 0 {
        return Err(Error::domain("weighted split needs b != 0"));
    }
    let mut lhs = Rational::zero();
    for k in (a.abs() as u64)..=n {
        let t = first_passage_mass(params, a, k)?;
        if !t.is_zero() {
            lhs += Rational::from_integer(BigInt::from(k)) * t * first_passage_mass(params, b, n - k)?;
        }
    }
    let rhs = Rational::new(BigInt::from(a), BigInt::from(a + b))
        * Rational::from_integer(BigInt::from(n))
        * first_passage_mass(params, a + b, n)?;
    Ok(exact_check(
        "walk/passage_split_weighted",
        walk_params_json(params, &[("a", json!(a)), ("b", json!(b)), ("n", json!(n))]),
        &lhs,
        &rhs,
    ))
}

/// Negative binomial law with index mu and success probability theta:
/// P{N = n} = C(n+mu-1, n) theta^n (1-theta)^mu. This is the
/// NonDecreasing first-passage law with the deterministic mu steps removed.
pub fn pmf_negative_binomial<T: Scalar>(mu: u64, theta: &T, horizon: u64) -> Result<Pmf<T>> {
    if *theta <= T::zero() || *theta >= T::one() {
        return Err(Error::domain("theta must be in (0,1)"));
    }
    if mu == 0 {
        return Err(Error::domain("index mu must be >= 1"));
    }
    let mut mass = BTreeMap::new();
    let mut cur = powi(&(T::one() - theta.clone()), mu as u32);
    for n in 0..=horizon {
        mass.insert(n as i64, cur.clone());
        // C(n+mu, n+1)/C(n+mu-1, n) = (n+mu)/(n+1)
        cur = cur * int::<T>((n + mu) as i64) / int((n + 1) as i64) * theta.clone();
    }
    Ok(Pmf::truncated(mass))
}

/// Convolving negative binomials with indices mu and nu gives index mu+nu:
/// checked exactly on 0..=horizon.
pub fn check_negbinom_additivity(
    theta: &Rational,
    mu: u64,
    nu: u64,
    horizon: u64,
) -> Result<Vec<VerificationReport>> {
    let left = pmf_negative_binomial(mu, theta, horizon)?;
    let right = pmf_negative_binomial(nu, theta, horizon)?;
    let combined = pmf_negative_binomial(mu + nu, theta, horizon)?;
    let mut reports = Vec::new();
    for n in 0..=(horizon as i64) {
        let conv: Rational = (0..=n).map(|k| left.at(k) * right.at(n - k)).sum();
        reports.push(exact_check(
            "walk/negbinom_additivity",
            param_map(&[
                ("theta", json!(fraction_string(theta))),
                ("mu", json!(mu)),
                ("nu", json!(nu)),
                ("n", json!(n)),
            ]),
            &conv,
            &combined.at(n),
        ));
    }
    Ok(reports)
}

/// Law of the first-passage index through level mu for a PlusMinus bridge
/// pinned to S_{2r+mu+nu} = mu+nu: the probability that T_mu = 2k+mu is
///
///   p_k = B_k(mu) O_{r-k}(nu+1) / O_r(mu+nu+1),   k = 0..r,
///
/// independent of the step probability (it cancels in the conditioning).
pub fn bridge_first_passage_law(mu: u64, nu: u64, r: u64) -> Result<Vec<Rational>> {
    if mu == 0 {
        return Err(Error::domain("bridge passage level mu must be >= 1"));
    }
    let denom = occupancy_number(mu + nu + 1, r);
    Ok((0..=r)
        .map(|k| {
            Rational::new(ballot_number(mu, k) * occupancy_number(nu + 1, r - k), denom.clone())
        })
        .collect())
}

/// Dual route for the bridge law: the conditional probability assembled
/// from actual walk pmfs at a concrete step probability. The closed form
/// must reproduce it for every p.
pub fn check_bridge_first_passage(
    mu: u64,
    nu: u64,
    r: u64,
    p: &Rational,
) -> Result<Vec<VerificationReport>> {
    let params = WalkParams::new(WalkKind::PlusMinus, p.clone())?;
    let n = 2 * r + mu + nu;
    let law = bridge_first_passage_law(mu, nu, r)?;
    let pin = position_mass(&params, n, (mu + nu) as i64);
    if pin.is_zero() {
        return Err(Error::domain("bridge endpoint has zero probability"));
    }
    let mut reports = Vec::new();
    for (k, closed) in law.iter().enumerate() {
        let time = 2 * k as u64 + mu;
        let quotient = first_passage_mass(&params, mu as i64, time)?
            * position_mass(&params, n - time, nu as i64)
            / pin.clone();
        reports.push(exact_check(
            "walk/bridge_first_passage",
            param_map(&[
                ("mu", json!(mu)),
                ("nu", json!(nu)),
                ("r", json!(r)),
                ("k", json!(k)),
                ("p", json!(fraction_string(p))),
            ]),
            &quotient,
            closed,
        ));
    }
    Ok(reports)
}

/// Law of the first-return index for a PlusMinus bridge pinned to
/// S_{2r} = 0: the probability that T_0 = 2k equals the first-passage
/// bridge law at (mu, nu, r) = (1, 0, r-1) shifted by one, and the
/// function returns q_1..q_r at indices 0..r-1.
pub fn bridge_return_law(r: u64) -> Result<Vec<Rational>> {
    if r == 0 {
        return Err(Error::domain("bridge return law needs r >= 1"));
    }
    bridge_first_passage_law(1, 0, r - 1)
}

/// Dual route for the return law, as a conditional-probability quotient of
/// first-return and bridge masses at a concrete p.
pub fn check_bridge_return(r: u64, p: &Rational) -> Result<Vec<VerificationReport>> {
    let params = WalkParams::new(WalkKind::PlusMinus, p.clone())?;
    let law = bridge_return_law(r)?;
    let pin = position_mass(&params, 2 * r, 0);
    let mut reports = Vec::new();
    for (idx, closed) in law.iter().enumerate() {
        let k = idx as u64 + 1;
        let quotient = first_passage_mass(&params, 0, 2 * k)?
            * position_mass(&params, 2 * (r - k), 0)
            / pin.clone();
        reports.push(exact_check(
            "walk/bridge_return",
            param_map(&[("r", json!(r)), ("k", json!(k)), ("p", json!(fraction_string(p)))]),
            &quotient,
            closed,
        ));
    }
    Ok(reports)
}
