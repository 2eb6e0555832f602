//! Truncated formal power series and the closed-form generating functions
//! of the walk laws.
//!
//! A `TruncatedSeries` tracks coefficients 0..=order exactly; ring
//! operations stay exact on the kept range because multiplication is lower
//! triangular. The walk generating functions are assembled from
//!
//!   sum_n P{S_n = 0} xi^n           = (1 - 4pq xi^2)^(-1/2)
//!   E[xi^(T_1)]                     = (1 - sqrt(1 - 4pq xi^2)) / (2q xi)
//!   E[xi^(T_0)]                     = 1 - sqrt(1 - 4pq xi^2)
//!
//! for the PlusMinus walk, and from rational functions of (1 - q xi) for
//! the NonDecreasing walk. Their coefficients must reproduce the point
//! masses from the walks module term by term; that comparison, and the
//! quotient relation between position and passage series, are the checks
//! this module exports.

use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::fraction_string;
use crate::report::{param_map, VerificationReport};
use crate::scalar::{binomial, int, powi, Scalar};
use crate::walks::{first_passage_mass, position_mass, WalkKind, WalkParams};
use crate::Rational;

/// Polynomial truncation of a power series: coefficient k of the true
/// series at index k, for k = 0..=order.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        TruncatedSeries { coeffs }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = value;
        TruncatedSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> &T {
        assert!(k <= self.order(), "coefficient {k} beyond truncation order {}", self.order());
        &self.coeffs[k]
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncation (have {})", self.order());
        TruncatedSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let order = self.order().min(other.order());
        let coeffs =
            (0..=order).map(|k| f(self.coeffs[k].clone(), other.coeffs[k].clone())).collect();
        TruncatedSeries { coeffs }
    }

    pub fn scale(&self, factor: &T) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncatedSeries { coeffs }
    }

    /// Multiplicative inverse; needs a unit constant term.
    pub fn invert(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::domain("cannot invert a series with zero constant term"));
        }
        let order = self.order();
        let lead = self.coeffs[0].clone();
        let mut inv = vec![T::zero(); order + 1];
        inv[0] = T::one() / lead.clone();
        for n in 1..=order {
            let mut acc = T::zero();
            for k in 1..=n {
                acc = acc + self.coeffs[k].clone() * inv[n - k].clone();
            }
            inv[n] = -acc / lead.clone();
        }
        Ok(TruncatedSeries { coeffs: inv })
    }

    /// Square root with constant term 1, by the coefficient recurrence
    /// b_n = (a_n - sum_{k=1}^{n-1} b_k b_{n-k}) / 2. Independent of the
    /// explicit binomial expansion of sqrt(1 - z), which the tests hold it
    /// against.
    pub fn sqrt_unit(&self) -> Result<Self> {
        if self.coeffs[0] != T::one() {
            return Err(Error::domain("series square root wants constant term exactly 1"));
        }
        let order = self.order();
        let mut root = vec![T::zero(); order + 1];
        root[0] = T::one();
        for n in 1..=order {
            let mut acc = self.coeffs[n].clone();
            for k in 1..n {
                acc = acc - root[k].clone() * root[n - k].clone();
            }
            root[n] = acc / int(2);
        }
        Ok(TruncatedSeries { coeffs: root })
    }

    /// Multiply by xi^k; the truncation order grows with the shift.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        TruncatedSeries { coeffs }
    }

    /// Divide by xi^k; the low k coefficients must vanish identically.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(Error::domain("shift exceeds truncation order"));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::inconsistent(
                "division by xi^k on a series with nonzero low coefficients".to_string(),
            ));
        }
        Ok(TruncatedSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut acc = TruncatedSeries::constant(T::one(), self.order());
        for _ in 0..exponent {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Series for sqrt(1 - scale * xi^2): coefficient of xi^(2k) is
/// -C(2k,k) scale^k / ((2k-1) 4^k).
pub fn sqrt_one_minus<T: Scalar>(scale: &T, order: usize) -> TruncatedSeries<T> {
    let mut coeffs = vec![T::zero(); order + 1];
    for k in 0..=(order / 2) {
        let ki = k as i64;
        let c = if k == 0 {
            T::one()
        } else {
            -binomial::<T>(2 * ki, ki) * powi(scale, k as u32)
                / (int::<T>(2 * ki - 1) * powi(&int(4), k as u32))
        };
        coeffs[2 * k] = c;
    }
    TruncatedSeries::from_coeffs(coeffs)
}

/// Series for (1 - scale * xi^2)^(-1/2): coefficient of xi^(2k) is
/// C(2k,k) scale^k / 4^k.
pub fn inv_sqrt_one_minus<T: Scalar>(scale: &T, order: usize) -> TruncatedSeries<T> {
    let mut coeffs = vec![T::zero(); order + 1];
    for k in 0..=(order / 2) {
        let ki = k as i64;
        coeffs[2 * k] = binomial::<T>(2 * ki, ki) * powi(scale, k as u32) / powi(&int(4), k as u32);
    }
    TruncatedSeries::from_coeffs(coeffs)
}

fn four_pq<T: Scalar>(params: &WalkParams<T>) -> T {
    int::<T>(4) * params.up.clone() * params.down.clone()
}

/// E[xi^(T_1)] for PlusMinus (or its mirror for T_{-1}), to the given order.
fn pm_step_genfun<T: Scalar>(params: &WalkParams<T>, upward: bool, order: usize) -> Result<TruncatedSeries<T>> {
    let against = if upward { params.down.clone() } else { params.up.clone() };
    let numerator = TruncatedSeries::constant(T::one(), order + 1)
        .sub(&sqrt_one_minus(&four_pq(params), order + 1));
    Ok(numerator.shift_down(1)?.scale(&(T::one() / (int::<T>(2) * against))))
}

/// Generating function of the position law, sum_n P{S_n = j} xi^n.
pub fn genfun_position<T: Scalar>(
    params: &WalkParams<T>,
    j: i64,
    order: usize,
) -> Result<TruncatedSeries<T>> {
    match params.kind {
        WalkKind::PlusMinus => {
            let centered = inv_sqrt_one_minus(&four_pq(params), order);
            if j == 0 {
                return Ok(centered);
            }
            let step = pm_step_genfun(params, j > 0, order)?;
            Ok(centered.mul(&step.pow(j.unsigned_abs() as u32)))
        }
        WalkKind::NonDecreasing => {
            if j < 0 {
                return Err(Error::domain("a non-decreasing walk stays at levels >= 0"));
            }
            // (p xi)^j / (1 - q xi)^(j+1)
            let mut denom = vec![T::zero(); order + 1];
            denom[0] = T::one();
            denom[1] = -params.down.clone();
            let inv = TruncatedSeries::from_coeffs(denom).invert()?;
            Ok(inv
                .pow(j as u32 + 1)
                .scale(&powi(&params.up, j as u32))
                .shift_up(j as usize)
                .truncate(order))
        }
    }
}

/// Generating function of the first-passage law, E[xi^(T_a)].
pub fn genfun_first_passage<T: Scalar>(
    params: &WalkParams<T>,
    a: i64,
    order: usize,
) -> Result<TruncatedSeries<T>> {
    match params.kind {
        WalkKind::PlusMinus => {
            if a == 0 {
                return Ok(TruncatedSeries::constant(T::one(), order)
                    .sub(&sqrt_one_minus(&four_pq(params), order)));
            }
            Ok(pm_step_genfun(params, a > 0, order)?.pow(a.unsigned_abs() as u32))
        }
        WalkKind::NonDecreasing => {
            if a < 1 {
                return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
            }
            // (p xi / (1 - q xi))^a
            let mut denom = vec![T::zero(); order + 1];
            denom[0] = T::one();
            denom[1] = -params.down.clone();
            let inv = TruncatedSeries::from_coeffs(denom).invert()?;
            Ok(inv.scale(&params.up).shift_up(1).truncate(order).pow(a as u32))
        }
    }
}

fn series_check(
    id: &str,
    params: std::collections::BTreeMap<String, serde_json::Value>,
    lhs: &TruncatedSeries<Rational>,
    rhs: &TruncatedSeries<Rational>,
) -> VerificationReport {
    let order = lhs.order().min(rhs.order());
    let mismatch = (0..=order).find(|&k| lhs.coefficient(k) != rhs.coefficient(k));
    let (l, r, residual) = match mismatch {
        None => ("equal".to_string(), "equal".to_string(), "0".to_string()),
        Some(k) => (
            fraction_string(lhs.coefficient(k)),
            fraction_string(rhs.coefficient(k)),
            format!("first mismatch at order {k}"),
        ),
    };
    VerificationReport::exact(id, params, l, r, residual, mismatch.is_none())
}

/// Coefficients of the closed-form position series must equal the point
/// masses P{S_n = j} for every n up to the order.
pub fn check_position_coefficients(
    params: &WalkParams<Rational>,
    j: i64,
    order: usize,
) -> Result<VerificationReport> {
    let series = genfun_position(params, j, order)?;
    let masses = TruncatedSeries::from_coeffs(
        (0..=order).map(|n| position_mass(params, n as u64, j)).collect(),
    );
    Ok(series_check(
        "genfun/position_coefficients",
        param_map(&[
            ("kind", json!(params.kind.label())),
            ("p", json!(fraction_string(&params.up))),
            ("j", json!(j)),
            ("order", json!(order)),
        ]),
        &series,
        &masses,
    ))
}

/// Coefficients of the closed-form passage series must equal P{T_a = n}.
pub fn check_passage_coefficients(
    params: &WalkParams<Rational>,
    a: i64,
    order: usize,
) -> Result<VerificationReport> {
    let series = genfun_first_passage(params, a, order)?;
    let masses = TruncatedSeries::from_coeffs(
        (0..=order)
            .map(|n| first_passage_mass(params, a, n as u64))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(series_check(
        "genfun/passage_coefficients",
        param_map(&[
            ("kind", json!(params.kind.label())),
            ("p", json!(fraction_string(&params.up))),
            ("a", json!(a)),
            ("order", json!(order)),
        ]),
        &series,
        &masses,
    ))
}

/// The quotient relation: the position series at level a factors as
/// E[xi^(T_a)] times the position series at the starting level,
/// G(xi, a) = E[xi^(T_a)] G(xi, 0).
pub fn check_passage_quotient(
    params: &WalkParams<Rational>,
    a: i64,
    order: usize,
) -> Result<VerificationReport> {
    let lhs = genfun_position(params, a, order)?;
    let rhs = genfun_first_passage(params, a, order)?.mul(&genfun_position(params, 0, order)?);
    Ok(series_check(
        "genfun/passage_quotient",
        param_map(&[
            ("kind", json!(params.kind.label())),
            ("p", json!(fraction_string(&params.up))),
            ("a", json!(a)),
            ("order", json!(order)),
        ]),
        &lhs,
        &rhs,
    ))
}
