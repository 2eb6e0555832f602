//! Scalar abstractions: one trait for exact field arithmetic, one for
//! floating point.
//!
//! The combinatorial laws (walks, generating functions, Gamma identities) are
//! written against [`Scalar`] so the same code runs exactly over
//! `BigRational` and approximately over `f64`; the analytic laws (Bessel
//! series, quadrature) are written against [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed};

/// Exact field scalar. `BigRational` is the canonical instance; `f64`/`f32`
/// satisfy the bound too and give a floating shadow of the same computation.
pub trait Scalar: Num + Signed + PartialOrd + FromPrimitive + Clone + Debug + Display {}

impl<T> Scalar for T where T: Num + Signed + PartialOrd + FromPrimitive + Clone + Debug + Display {}

/// Floating-point scalar for series evaluation and quadrature.
pub trait Real: num_traits::Float + FromPrimitive + Debug + Display {}

impl Real for f32 {}
impl Real for f64 {}

/// Embeds a small signed integer into any scalar. Panics only if the scalar
/// cannot represent it, which no supported instance does.
pub fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("integer representable in scalar")
}

/// `numer/denom` as an exact scalar quotient; `denom` must be nonzero.
pub fn ratio<T: Scalar>(numer: i64, denom: i64) -> T {
    assert!(denom != 0, "zero denominator");
    int::<T>(numer) / int::<T>(denom)
}

/// x^n by repeated multiplication, exact for exact scalars.
pub fn powi<T: Scalar>(x: &T, n: u32) -> T {
    let mut acc = T::one();
    for _ in 0..n {
        acc = acc * x.clone();
    }
    acc
}

/// Binomial coefficient as a scalar, via the falling-factorial product.
/// Exact over rationals. Returns zero for k outside 0..=n.
pub fn binomial<T: Scalar>(n: i64, k: i64) -> T {
    if k < 0 || k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 1..=k {
        acc = acc * int::<T>(n - k + i) / int::<T>(i);
    }
    acc
}
