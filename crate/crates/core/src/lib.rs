//! Verification toolkit for a family of classical identities: Bessel
//! convolution and Laplace-transform integrals, exact Gamma-function
//! identities, and the first-passage laws of one-dimensional random walks,
//! together with the convolution relations tying them together.
//!
//! Each identity is checked along independent routes: exact rational
//! arithmetic where the law is combinatorial, adaptive quadrature against
//! closed forms where it is analytic, and seeded Monte Carlo where it is
//! probabilistic.

pub mod bessel;
pub mod error;
pub mod exact;
pub mod gamma_identities;
pub mod integrals;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod series;
pub mod suites;
pub mod scalar;
pub mod walks;

pub use error::{Error, Result};
pub use report::{summarize, SweepSummary, VerificationReport};
pub use scalar::{Real, Scalar};

/// Canonical exact scalar: arbitrary-precision rational, reduced form,
/// positive denominator.
pub type Rational = num_rational::BigRational;
