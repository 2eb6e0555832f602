//! Verification of the Bessel convolution and Laplace-transform identities
//! by adaptive quadrature against closed forms.
//!
//! Every integrand is assembled from J_rho(x)/x^rho (entire at 0), so
//! algebraic endpoint factors appear explicitly as x^(s-1) weights and go
//! through the substitution-based rule rather than raw adaptivity. Closed
//! forms use exact half-integer Gamma values converted to float at the last
//! moment; the floating Lanczos Gamma only enters for orders that are not
//! half-integers.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::bessel::{bessel_j_over_pow_with, bessel_j_with, gamma_fn, EvalLimits};
use crate::error::{Error, Result};
use crate::exact::HalfIntGamma;
use crate::quad::{integrate, integrate_power_weighted, QuadResult, QuadratureConfig};
use crate::report::{param_map, VerificationReport};

/// Convolution identities on [0, a]:
///
/// - `InvX`:       ∫ J_mu(x) J_nu(a-x) / x dx            = J_{mu+nu}(a) / mu
/// - `InvBoth`:    ∫ J_mu(x) J_nu(a-x) / (x (a-x)) dx    = (1/mu + 1/nu) J_{mu+nu}(a) / a
/// - `PowMatched`: ∫ x^mu (a-x)^nu J_mu(x) J_nu(a-x) dx  = K a^(mu+nu+1/2) J_{mu+nu+1/2}(a)
/// - `PowShifted`: ∫ x^mu (a-x)^nu J_{mu-1}(x) J_nu(a-x) dx = K a^(mu+nu+1/2) J_{mu+nu-1/2}(a)
///
/// with K = Gamma(mu+1/2) Gamma(nu+1/2) / (sqrt(2 pi) Gamma(mu+nu+1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvIdentity {
    InvX,
    InvBoth,
    PowMatched,
    PowShifted,
}

/// Laplace transforms over [0, inf), all with exponential weight e^(-alpha x):
///
/// - `Plain`:      ∫ e^(-ax) J_nu(bx) dx         = (sqrt(a^2+b^2) - a)^nu / (b^nu sqrt(a^2+b^2))
/// - `InvX`:       ∫ e^(-ax) J_nu(bx) / x dx     = (sqrt(a^2+b^2) - a)^nu / (nu b^nu)
/// - `PowMatched`: ∫ e^(-ax) x^nu J_nu(bx) dx    = 2^nu Gamma(nu+1/2) b^nu / (sqrt(pi) (a^2+b^2)^(nu+1/2))
/// - `PowShifted`: ∫ e^(-ax) x^nu J_{nu-1}(bx) dx = 2^nu Gamma(nu+1/2) a b^(nu-1) / (sqrt(pi) (a^2+b^2)^(nu+1/2))
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LapIdentity {
    Plain,
    InvX,
    PowMatched,
    PowShifted,
}

/// One parameterized identity instance with an optional tolerance override
/// on the relative residual (default 1e-8).
#[derive(Debug, Clone)]
pub enum IntegralCase {
    Convolution { identity: ConvIdentity, mu: f64, nu: f64, a: f64, rel_tolerance: Option<f64> },
    Laplace { identity: LapIdentity, nu: f64, alpha: f64, beta: f64, rel_tolerance: Option<f64> },
}

/// Default pass bar on the relative residual: an order of magnitude above
/// the quadrature's own relative target.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;

impl IntegralCase {
    pub fn identity_id(&self) -> &'static str {
        match self {
            IntegralCase::Convolution { identity, .. } => match identity {
                ConvIdentity::InvX => "conv/inv_x",
                ConvIdentity::InvBoth => "conv/inv_both",
                ConvIdentity::PowMatched => "conv/pow_matched",
                ConvIdentity::PowShifted => "conv/pow_shifted",
            },
            IntegralCase::Laplace { identity, .. } => match identity {
                LapIdentity::Plain => "lap/plain",
                LapIdentity::InvX => "lap/inv_x",
                LapIdentity::PowMatched => "lap/pow_matched",
                LapIdentity::PowShifted => "lap/pow_shifted",
            },
        }
    }

    pub fn params(&self) -> BTreeMap<String, serde_json::Value> {
        match self {
            IntegralCase::Convolution { mu, nu, a, .. } => {
                param_map(&[("mu", json!(mu)), ("nu", json!(nu)), ("a", json!(a))])
            }
            IntegralCase::Laplace { nu, alpha, beta, .. } => {
                param_map(&[("nu", json!(nu)), ("alpha", json!(alpha)), ("beta", json!(beta))])
            }
        }
    }

    fn rel_tolerance(&self) -> f64 {
        match self {
            IntegralCase::Convolution { rel_tolerance, .. } | IntegralCase::Laplace { rel_tolerance, .. } => {
                rel_tolerance.unwrap_or(DEFAULT_IDENTITY_TOL)
            }
        }
    }
}

/// Bessel evaluation tolerance for integrand points. Laplace arguments reach
/// beta*T where only ~1e-13 absolute is available, so integrand noise is
/// budgeted at 1e-11; the quadrature averages it out well below the 1e-8 bar.
const POINT_TOL: f64 = 1e-11;

fn integrand_limits() -> EvalLimits {
    // truncation point times beta can exceed the public series cap; the
    // large-argument branch has no conditioning problem there
    EvalLimits { max_terms: 400, arg_cap: f64::MAX }
}

/// J_rho(x)/x^rho as a plain float, NaN on failure so the quadrature engine
/// reports non-convergence instead of silently integrating garbage.
fn jop(rho: f64, x: f64) -> f64 {
    bessel_j_over_pow_with(rho, x, POINT_TOL, &integrand_limits()).unwrap_or(f64::NAN)
}

fn j(order: f64, x: f64) -> Result<f64> {
    Ok(bessel_j_with(order, x, 1e-13, &integrand_limits())?.value)
}

/// Gamma with exact half-integer arguments routed through the exact
/// representation; Lanczos otherwise.
fn gamma_value(x: f64) -> f64 {
    let two_x = (2.0 * x).round();
    if (2.0 * x - two_x).abs() < 1e-9 && two_x >= 1.0 {
        HalfIntGamma::of(two_x as i64).expect("positive half-integer").to_f64()
    } else {
        gamma_fn(x)
    }
}

fn add(a: QuadResult<f64>, b: QuadResult<f64>) -> QuadResult<f64> {
    QuadResult {
        value: a.value + b.value,
        error_bound: a.error_bound + b.error_bound,
        subdivisions: a.subdivisions + b.subdivisions,
    }
}

pub fn verify_convolution(
    identity: ConvIdentity,
    mu: f64,
    nu: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<VerificationReport> {
    let case = IntegralCase::Convolution { identity, mu, nu, a, rel_tolerance: None };
    verify_case(&case, cfg)
}

pub fn verify_laplace(
    identity: LapIdentity,
    nu: f64,
    alpha: f64,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<VerificationReport> {
    let case = IntegralCase::Laplace { identity, nu, alpha, beta, rel_tolerance: None };
    verify_case(&case, cfg)
}

pub fn verify_case(case: &IntegralCase, cfg: &QuadratureConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let (lhs, rhs, tail_bound) = match case {
        IntegralCase::Convolution { identity, mu, nu, a, .. } => {
            let (lhs, rhs) = convolution_sides(*identity, *mu, *nu, *a, cfg)?;
            (lhs, rhs, 0.0)
        }
        IntegralCase::Laplace { identity, nu, alpha, beta, .. } => {
            laplace_sides(*identity, *nu, *alpha, *beta, cfg)?
        }
    };
    let tolerance = case.rel_tolerance();
    // scale floor keeps the relative residual meaningful near zeros of J
    let scale = lhs.value.abs().max(rhs.abs()).max(cfg.abs_tol / cfg.rel_tol);
    let residual = ((lhs.value - rhs).abs() + tail_bound) / scale;
    let mut report = VerificationReport::numeric(
        case.identity_id(),
        "quadrature",
        case.params(),
        lhs.value,
        rhs,
        residual,
        tolerance,
    );
    report.subdivisions = Some(lhs.subdivisions);
    report.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

fn convolution_sides(
    identity: ConvIdentity,
    mu: f64,
    nu: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<(QuadResult<f64>, f64)> {
    if mu <= 0.0 || nu <= 0.0 {
        return Err(Error::domain(format!("orders must be positive, got mu={mu} nu={nu}")));
    }
    if a <= 0.0 {
        return Err(Error::domain(format!("interval length must be positive, got a={a}")));
    }
    let half = a / 2.0;
    let lhs = match identity {
        ConvIdentity::InvX => {
            // x^(mu-1) * [J_mu(x)/x^mu] * J_nu(a-x)
            let g = |x: f64| jop(mu, x) * jop(nu, a - x) * (a - x).powf(nu);
            integrate_power_weighted(&g, mu, a, cfg)?
        }
        ConvIdentity::InvBoth => {
            // split at a/2; each half has one algebraic endpoint
            let left = |x: f64| jop(mu, x) * jop(nu, a - x) * (a - x).powf(nu - 1.0);
            let right = |u: f64| jop(nu, u) * jop(mu, a - u) * (a - u).powf(mu - 1.0);
            let l = integrate_power_weighted(&left, mu, half, cfg)?;
            let r = integrate_power_weighted(&right, nu, half, cfg)?;
            add(l, r)
        }
        ConvIdentity::PowMatched => {
            // integrand = x^(2 mu) jop(mu, x) (a-x)^(2 nu) jop(nu, a-x)
            let left = |x: f64| jop(mu, x) * jop(nu, a - x) * (a - x).powf(2.0 * nu);
            let right = |u: f64| jop(nu, u) * jop(mu, a - u) * (a - u).powf(2.0 * mu);
            let l = integrate_power_weighted(&left, 2.0 * mu + 1.0, half, cfg)?;
            let r = integrate_power_weighted(&right, 2.0 * nu + 1.0, half, cfg)?;
            add(l, r)
        }
        ConvIdentity::PowShifted => {
            // first factor drops an order: x^(2 mu - 1) jop(mu-1, x)
            let left = |x: f64| jop(mu - 1.0, x) * jop(nu, a - x) * (a - x).powf(2.0 * nu);
            let right = |u: f64| jop(nu, u) * jop(mu - 1.0, a - u) * (a - u).powf(2.0 * mu - 1.0);
            let l = integrate_power_weighted(&left, 2.0 * mu, half, cfg)?;
            let r = integrate_power_weighted(&right, 2.0 * nu + 1.0, half, cfg)?;
            add(l, r)
        }
    };
    let rhs = match identity {
        ConvIdentity::InvX => j(mu + nu, a)? / mu,
        ConvIdentity::InvBoth => (1.0 / mu + 1.0 / nu) * j(mu + nu, a)? / a,
        ConvIdentity::PowMatched => gamma_constant(mu, nu) * a.powf(mu + nu + 0.5) * j(mu + nu + 0.5, a)?,
        ConvIdentity::PowShifted => gamma_constant(mu, nu) * a.powf(mu + nu + 0.5) * j(mu + nu - 0.5, a)?,
    };
    Ok((lhs, rhs))
}

/// K = Gamma(mu+1/2) Gamma(nu+1/2) / (sqrt(2 pi) Gamma(mu+nu+1)).
fn gamma_constant(mu: f64, nu: f64) -> f64 {
    gamma_value(mu + 0.5) * gamma_value(nu + 0.5)
        / ((2.0 * std::f64::consts::PI).sqrt() * gamma_value(mu + nu + 1.0))
}

fn laplace_sides(
    identity: LapIdentity,
    nu: f64,
    alpha: f64,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<(QuadResult<f64>, f64, f64)> {
    if nu <= 0.0 || alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::domain(format!(
            "parameters must be positive, got nu={nu} alpha={alpha} beta={beta}"
        )));
    }
    let t = (40.0 / alpha).max(cfg.laplace_truncation);
    // tail bounds rely on |J_rho(y)| <= 1 for y >= 2, rho > -1
    if beta * t < 2.0 {
        return Err(Error::domain("truncation point too small for the J magnitude bound"));
    }
    let tail_bound = match identity {
        LapIdentity::Plain => (-alpha * t).exp() / alpha,
        LapIdentity::InvX => (-alpha * t).exp() / (alpha * t),
        LapIdentity::PowMatched | LapIdentity::PowShifted => {
            // ∫_T^inf x^nu e^(-a x) dx <= (2/a) T^nu e^(-a T) once T >= 2 nu / a
            if t < 2.0 * nu / alpha {
                return Err(Error::domain("truncation point below the monotone-tail threshold"));
            }
            2.0 / alpha * t.powf(nu) * (-alpha * t).exp()
        }
    };
    if tail_bound > cfg.abs_tol {
        return Err(Error::non_convergence(format!(
            "tail bound {tail_bound:e} exceeds abs_tol {:e}; raise laplace_truncation",
            cfg.abs_tol
        )));
    }
    let lhs = match identity {
        LapIdentity::Plain => {
            let f = |x: f64| (-alpha * x).exp() * jop(nu, beta * x) * (beta * x).powf(nu);
            integrate(&f, 0.0, t, cfg)?
        }
        LapIdentity::InvX => {
            // J_nu(bx)/x = b^nu x^(nu-1) jop(nu, bx)
            let g = |x: f64| beta.powf(nu) * jop(nu, beta * x) * (-alpha * x).exp();
            integrate_power_weighted(&g, nu, t, cfg)?
        }
        LapIdentity::PowMatched => {
            let g = |x: f64| beta.powf(nu) * jop(nu, beta * x) * (-alpha * x).exp();
            integrate_power_weighted(&g, 2.0 * nu + 1.0, t, cfg)?
        }
        LapIdentity::PowShifted => {
            let g = |x: f64| beta.powf(nu - 1.0) * jop(nu - 1.0, beta * x) * (-alpha * x).exp();
            integrate_power_weighted(&g, 2.0 * nu, t, cfg)?
        }
    };
    let root = alpha.hypot(beta);
    let rhs = match identity {
        LapIdentity::Plain => (root - alpha).powf(nu) / (beta.powf(nu) * root),
        LapIdentity::InvX => (root - alpha).powf(nu) / (nu * beta.powf(nu)),
        LapIdentity::PowMatched => {
            2f64.powf(nu) * gamma_value(nu + 0.5) * beta.powf(nu)
                / (std::f64::consts::PI.sqrt() * root.powf(2.0 * nu + 1.0))
        }
        LapIdentity::PowShifted => {
            2f64.powf(nu) * gamma_value(nu + 0.5) * alpha * beta.powf(nu - 1.0)
                / (std::f64::consts::PI.sqrt() * root.powf(2.0 * nu + 1.0))
        }
    };
    Ok((lhs, rhs, tail_bound))
}

/// Acceptance grid for the convolution identities:
/// mu, nu in {0.5, 1, 2, 3.5}, a in {0.5, 1, 2, 5}.
pub fn default_convolution_grid() -> Vec<IntegralCase> {
    let orders = [0.5, 1.0, 2.0, 3.5];
    let lengths = [0.5, 1.0, 2.0, 5.0];
    let identities =
        [ConvIdentity::InvX, ConvIdentity::InvBoth, ConvIdentity::PowMatched, ConvIdentity::PowShifted];
    let mut grid = Vec::new();
    for identity in identities {
        for &mu in &orders {
            for &nu in &orders {
                for &a in &lengths {
                    grid.push(IntegralCase::Convolution { identity, mu, nu, a, rel_tolerance: None });
                }
            }
        }
    }
    grid
}

/// Acceptance grid for the Laplace identities:
/// nu in {0.5, 1, 2, 3}, alpha, beta in {0.5, 1, 2}.
pub fn default_laplace_grid() -> Vec<IntegralCase> {
    let orders = [0.5, 1.0, 2.0, 3.0];
    let rates = [0.5, 1.0, 2.0];
    let identities = [LapIdentity::Plain, LapIdentity::InvX, LapIdentity::PowMatched, LapIdentity::PowShifted];
    let mut grid = Vec::new();
    for identity in identities {
        for &nu in &orders {
            for &alpha in &rates {
                for &beta in &rates {
                    grid.push(IntegralCase::Laplace { identity, nu, alpha, beta, rel_tolerance: None });
                }
            }
        }
    }
    grid
}

/// Runs every case, in parallel when a thread pool is configured; a case
/// that errors becomes a failing report instead of aborting the sweep.
pub fn sweep(cases: &[IntegralCase], cfg: &QuadratureConfig) -> Vec<VerificationReport> {
    cases
        .par_iter()
        .map(|case| verify_case(case, cfg).unwrap_or_else(|e| error_report(case, &e)))
        .collect()
}

fn error_report(case: &IntegralCase, err: &Error) -> VerificationReport {
    VerificationReport {
        identity_id: case.identity_id().to_string(),
        method: "quadrature".to_string(),
        params: case.params(),
        lhs: json!(null),
        rhs: json!(null),
        residual: json!(null),
        tolerance: case.rel_tolerance(),
        pass: false,
        subdivisions: None,
        runtime_ms: None,
        warning: Some(err.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn inv_x_matches_named_value() {
        // mu = nu = 1, a = 2: rhs is J_2(2)
        let r = verify_convolution(ConvIdentity::InvX, 1.0, 1.0, 2.0, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let lhs = r.lhs.as_f64().unwrap();
        assert!((lhs - 0.3528340286156377).abs() < 1e-9, "{lhs}");
    }

    #[test]
    fn inv_both_matches_named_value() {
        // mu = nu = 1, a = 1: rhs = 2 J_2(1)
        let r = verify_convolution(ConvIdentity::InvBoth, 1.0, 1.0, 1.0, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let rhs = r.rhs.as_f64().unwrap();
        assert!((rhs - 2.0 * 0.1149034849319005).abs() < 1e-12, "{rhs}");
    }

    #[test]
    fn singular_order_half_converges() {
        // mu = 1/2 puts an x^(-1/2) weight at the left endpoint
        for identity in [ConvIdentity::InvX, ConvIdentity::InvBoth, ConvIdentity::PowShifted] {
            let r = verify_convolution(identity, 0.5, 1.0, 1.0, &cfg()).unwrap();
            assert!(r.pass, "{identity:?}: {r:?}");
        }
    }

    #[test]
    fn laplace_named_values() {
        // nu=1, alpha=beta=1: (sqrt2 - 1)/sqrt2
        let r = verify_laplace(LapIdentity::Plain, 1.0, 1.0, 1.0, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let rhs = r.rhs.as_f64().unwrap();
        assert!((rhs - (2f64.sqrt() - 1.0) / 2f64.sqrt()).abs() < 1e-14);
        // nu=2, alpha=beta=1: (sqrt2 - 1)^2 / 2
        let r = verify_laplace(LapIdentity::InvX, 2.0, 1.0, 1.0, &cfg()).unwrap();
        let rhs = r.rhs.as_f64().unwrap();
        assert!((rhs - (2f64.sqrt() - 1.0).powi(2) / 2.0).abs() < 1e-14);
        assert!(r.pass, "{r:?}");
        // nu=1, alpha=2, beta=1: 5^(-3/2)
        let r = verify_laplace(LapIdentity::PowMatched, 1.0, 2.0, 1.0, &cfg()).unwrap();
        let rhs = r.rhs.as_f64().unwrap();
        assert!((rhs - 5f64.powf(-1.5)).abs() < 1e-14);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn semigroup_ratio_connects_the_pow_identities() {
        // away from zeros of J, lhs(PowMatched)/lhs(PowShifted) equals
        // J_{mu+nu+1/2}(a) / J_{mu+nu-1/2}(a)
        let quad = cfg();
        for (mu, nu, a) in [(1.0, 1.0, 1.0), (0.5, 2.0, 2.0), (2.0, 3.5, 5.0)] {
            let up = verify_convolution(ConvIdentity::PowMatched, mu, nu, a, &quad).unwrap();
            let down = verify_convolution(ConvIdentity::PowShifted, mu, nu, a, &quad).unwrap();
            let ratio = up.lhs.as_f64().unwrap() / down.lhs.as_f64().unwrap();
            let jr = crate::bessel::bessel_j(mu + nu + 0.5, a, 1e-13).unwrap().value
                / crate::bessel::bessel_j(mu + nu - 0.5, a, 1e-13).unwrap().value;
            assert!((ratio - jr).abs() <= 1e-7 * jr.abs().max(1.0), "mu={mu} nu={nu} a={a}");
        }
    }

    #[test]
    fn laplace_plain_integrated_over_rate_gives_inv_x() {
        // integrating the Plain closed form over alpha in [a0, inf)
        // reproduces the InvX closed form; substitution alpha = a0/u maps the
        // tail to u in (0,1] with a u^(nu-1) weight
        let quad = cfg();
        for (nu, a0, beta) in [(1.0, 1.0, 1.0), (2.0, 0.5, 2.0), (0.5, 1.0, 0.5)] {
            let stable_plain = |alpha: f64| {
                let root = alpha.hypot(beta);
                // (root - alpha) computed cancellation-free for huge alpha
                let diff = beta * beta / (root + alpha);
                diff.powf(nu) / (beta.powf(nu) * root)
            };
            let g = |u: f64| {
                let alpha = a0 / u;
                stable_plain(alpha) * a0 * u.powf(-1.0 - nu)
            };
            let got = integrate_power_weighted(&g, nu, 1.0, &quad).unwrap();
            let want = (a0.hypot(beta) - a0).powf(nu) / (nu * beta.powf(nu));
            assert!((got.value - want).abs() < 1e-6, "nu={nu}: {} vs {want}", got.value);
        }
    }

    #[test]
    fn sweep_turns_bad_case_into_failing_report() {
        let cases = [IntegralCase::Convolution {
            identity: ConvIdentity::InvX,
            mu: -1.0,
            nu: 1.0,
            a: 1.0,
            rel_tolerance: None,
        }];
        let reports = sweep(&cases, &cfg());
        assert_eq!(reports.len(), 1);
        assert!(!reports[0].pass);
        assert!(reports[0].warning.is_some());
    }

    #[test]
    #[ignore = "full grid; run explicitly or via the acceptance suite"]
    fn full_default_grids_pass() {
        let quad = cfg();
        let start = std::time::Instant::now();
        let mut reports = sweep(&default_convolution_grid(), &quad);
        reports.extend(sweep(&default_laplace_grid(), &quad));
        let failures: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
        assert!(failures.is_empty(), "{} failures, first: {:?}", failures.len(), failures.first());
        let worst = reports
            .iter()
            .filter_map(|r| r.residual.as_f64())
            .fold(0.0f64, f64::max);
        println!("grid of {} cases in {:?}, worst residual {worst:e}", reports.len(), start.elapsed());
    }

    #[test]
    fn truncation_too_short_is_flagged() {
        let mut quad = cfg();
        quad.laplace_truncation = 5.0;
        // alpha = 0.5 gives T = max(80, 5) = 80, fine; alpha = 5 gives T = 8
        // with tail e^-40/5 ~ 8e-19, fine; force failure with absurd abs_tol
        quad.abs_tol = 1e-30;
        let r = verify_laplace(LapIdentity::PowMatched, 3.0, 0.5, 1.0, &quad);
        assert!(matches!(r, Err(Error::NonConvergence(_))), "{r:?}");
    }
}
