//! Bessel functions of the first kind, J_mu, for real order mu > -1.
//!
//! Small arguments use the ascending series
//!
//!   J_mu(x) = sum_n (-1)^n / (n! Gamma(n+mu+1)) (x/2)^(2n+mu),
//!
//! driven by the term recurrence t_{n+1} = -t_n (x/2)^2 / ((n+1)(n+mu+1)).
//! Once the ratio falls below 1 the series alternates with decreasing terms,
//! so the truncation error is bounded by the first omitted term; the reported
//! bound adds the roundoff floor eps * max|term|, which is what actually
//! limits accuracy as x grows. Beyond the switch point the large-argument
//! form
//!
//!   J_mu(x) = sqrt(2/(pi x)) (cos w P(mu,x) - sin w Q(mu,x)),
//!   w = x - (mu/2 + 1/4) pi,
//!
//! takes over; its coefficient sequence terminates exactly for half-integer
//! mu and is truncated at the smallest term otherwise, with the first omitted
//! term as the bound.

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadResult, QuadratureConfig};
use crate::report::{param_map, VerificationReport};
use crate::scalar::Real;

/// Below this argument the ascending series is used; above, the
/// large-argument form. At the switch point the series roundoff floor is
/// ~6e-12 absolute and the large-argument truncation error stays below
/// ~8e-12 for orders up to 8, so both sides meet a 1e-11 point tolerance,
/// which is what the integral verifiers request per evaluation.
const SERIES_SWITCH: f64 = 12.5;

/// Evaluation budget and the argument cap for the series path.
#[derive(Debug, Clone)]
pub struct EvalLimits {
    pub max_terms: usize,
    pub arg_cap: f64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits { max_terms: 400, arg_cap: 200.0 }
    }
}

/// Value of J_mu(x) with its evaluation record: terms consumed and a
/// truncation bound that is honest about both series cutoff and roundoff.
#[derive(Debug, Clone, Copy)]
pub struct BesselEval<R> {
    pub order: R,
    pub argument: R,
    pub value: R,
    pub terms_used: usize,
    pub truncation_bound: R,
}

fn c<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("constant fits in scalar")
}

/// J_mu(x) for mu > -1, x >= 0, to absolute tolerance `tol`.
pub fn bessel_j<R: Real>(mu: R, x: R, tol: R) -> Result<BesselEval<R>> {
    bessel_j_with(mu, x, tol, &EvalLimits::default())
}

pub fn bessel_j_with<R: Real>(mu: R, x: R, tol: R, limits: &EvalLimits) -> Result<BesselEval<R>> {
    if mu <= c(-1.0) {
        return Err(Error::domain(format!("order must exceed -1, got {mu}")));
    }
    if x < R::zero() || !x.is_finite() {
        return Err(Error::domain(format!("argument must be finite and >= 0, got {x}")));
    }
    if x == R::zero() {
        if mu < R::zero() {
            return Err(Error::domain("J_mu diverges at 0 for negative order"));
        }
        let value = if mu == R::zero() { R::one() } else { R::zero() };
        return Ok(BesselEval { order: mu, argument: x, value, terms_used: 1, truncation_bound: R::zero() });
    }
    let series = |err_from: Option<Error>| -> Result<BesselEval<R>> {
        let lead = (x / c(2.0)).powf(mu) / gamma_fn(mu + R::one());
        series_tail(mu, x, tol, limits, lead)
            .map(|(value, terms_used, truncation_bound)| BesselEval {
                order: mu,
                argument: x,
                value,
                terms_used,
                truncation_bound,
            })
            .map_err(|e| err_from.unwrap_or(e))
    };
    // two-way fallback around the switch: each branch carries a rigorous
    // bound, so whichever meets tol is valid; near the switch the loser is
    // typically only marginally out (large orders push the asymptotic
    // minimum up, negative orders push the series floor up)
    if x < c(SERIES_SWITCH) {
        series(None).or_else(|e| asymptotic(mu, x, tol, limits).map_err(|_| e))
    } else {
        match asymptotic(mu, x, tol, limits) {
            Ok(eval) => Ok(eval),
            Err(e) => series(Some(e)),
        }
    }
}

/// Shared series loop: sums lead * sum_n (-1)^n prod with the term
/// recurrence, so both J_mu and J_mu(x)/x^mu reuse it exactly.
fn series_tail<R: Real>(
    mu: R,
    x: R,
    tol: R,
    limits: &EvalLimits,
    lead: R,
) -> Result<(R, usize, R)> {
    let quarter_sq = (x / c(2.0)) * (x / c(2.0));
    let mut term = lead;
    let mut sum = term;
    let mut max_abs = term.abs();
    for n in 0..limits.max_terms {
        let nf = c::<R>(n as f64);
        let next = -term * quarter_sq / ((nf + R::one()) * (nf + R::one() + mu));
        let decreasing = next.abs() < term.abs();
        let floor = R::epsilon() * max_abs * c(4.0);
        // sink to the roundoff floor regardless of tol: the extra terms are
        // cheap and the value is then the best this float type admits, which
        // integrand callers depend on; tol only gates the error contract
        if decreasing && next.abs() <= floor.max(R::epsilon() * sum.abs()) * c(0.25) {
            let bound = next.abs() + floor;
            if bound > tol {
                return Err(Error::non_convergence(format!(
                    "series roundoff floor {:e} exceeds tolerance {:e} at x = {x}",
                    bound.to_f64().unwrap_or(f64::NAN),
                    tol.to_f64().unwrap_or(f64::NAN),
                )));
            }
            return Ok((sum, n + 1, bound));
        }
        term = next;
        sum = sum + term;
        max_abs = max_abs.max(term.abs());
    }
    Err(Error::non_convergence(format!("series needs more than {} terms", limits.max_terms)))
}

/// Large-argument Hankel form. The coefficient recurrence is
/// c_m = c_{m-1} (4 mu^2 - (2m-1)^2) / (8 m x); P collects even-index terms
/// with alternating sign, Q the odd ones. For half-integer mu some factor
/// 4 mu^2 - (2m-1)^2 vanishes and the expansion is exact. Otherwise the
/// magnitudes pass through an initial hump (when mu is large), fall to a
/// minimum near m ~ 2x, and then diverge; the sum is truncated at the
/// smallest coefficient with that coefficient as the omitted-term bound.
fn asymptotic<R: Real>(mu: R, x: R, tol: R, limits: &EvalLimits) -> Result<BesselEval<R>> {
    if x > c(limits.arg_cap) {
        return Err(Error::domain(format!("argument {x} beyond cap {}", limits.arg_cap)));
    }
    let four_mu_sq = c::<R>(4.0) * mu * mu;
    let horizon = {
        let xf = x.to_f64().unwrap_or(f64::MAX);
        let muf = mu.to_f64().unwrap_or(0.0);
        (((2.0 * xf + muf * muf / xf).ceil() as usize) + 8).min(limits.max_terms)
    };
    let mut coeffs = vec![R::one()];
    let mut exact = false;
    while coeffs.len() <= horizon {
        let m = coeffs.len();
        let mf = c::<R>(m as f64);
        let odd = c::<R>((2 * m - 1) as f64);
        let next = coeffs[m - 1] * (four_mu_sq - odd * odd) / (c::<R>(8.0) * mf * x);
        if next == R::zero() {
            exact = true; // half-integer order
            break;
        }
        coeffs.push(next);
        if next.abs() < R::epsilon() * R::epsilon() {
            break; // machine floor reached well before the divergent tail
        }
    }
    let (cut, omitted) = if exact {
        (coeffs.len(), R::zero())
    } else {
        let mut m_star = coeffs.len() - 1;
        for m in 1..coeffs.len() {
            if coeffs[m].abs() < coeffs[m_star].abs() {
                m_star = m;
            }
        }
        (m_star, coeffs[m_star].abs())
    };
    // sign pattern: P = c0 - c2 + c4 - ..., Q = c1 - c3 + ...
    let mut p = R::zero();
    let mut q = R::zero();
    let mut max_c = R::zero();
    for (m, c_m) in coeffs.iter().take(cut).enumerate() {
        max_c = max_c.max(c_m.abs());
        let sign = if (m / 2) % 2 == 0 { R::one() } else { -R::one() };
        if m % 2 == 0 {
            p = p + sign * *c_m;
        } else {
            q = q + sign * *c_m;
        }
    }
    let amp = (c::<R>(2.0) / (c::<R>(std::f64::consts::PI) * x)).sqrt();
    let omega = x - (mu / c(2.0) + c(0.25)) * c(std::f64::consts::PI);
    let value = amp * (omega.cos() * p - omega.sin() * q);
    let roundoff = c::<R>(2.0) * (c::<R>(cut as f64) + x) * R::epsilon() * max_c.max(R::one());
    let bound = amp * (omitted * c(1.5) + roundoff);
    let terms_used = cut;
    if bound > tol {
        return Err(Error::non_convergence(format!(
            "large-argument form bound {:e} exceeds tolerance {:e} at x = {x}",
            bound.to_f64().unwrap_or(f64::NAN),
            tol.to_f64().unwrap_or(f64::NAN),
        )));
    }
    Ok(BesselEval { order: mu, argument: x, value, terms_used, truncation_bound: bound })
}

/// J_rho(x) / x^rho, which is entire in x and finite at 0. This is the form
/// integrands use where the plain J would put an x^rho singularity at an
/// endpoint.
pub fn bessel_j_over_pow<R: Real>(rho: R, x: R, tol: R) -> Result<R> {
    bessel_j_over_pow_with(rho, x, tol, &EvalLimits::default())
}

pub fn bessel_j_over_pow_with<R: Real>(rho: R, x: R, tol: R, limits: &EvalLimits) -> Result<R> {
    if rho <= c(-1.0) {
        return Err(Error::domain(format!("order must exceed -1, got {rho}")));
    }
    if x < R::zero() {
        return Err(Error::domain("argument must be >= 0"));
    }
    if x < c(SERIES_SWITCH) {
        // (x/2)^(2n+rho) / x^rho = (x/2)^(2n) 2^(-rho)
        let lead = c::<R>(2.0).powf(-rho) / gamma_fn(rho + R::one());
        match series_tail(rho, x, tol, limits, lead) {
            Ok((v, _, _)) => Ok(v),
            // negative orders raise the scaled series floor; the quotient
            // route can still meet tol (exactly so for half-integer rho)
            Err(e) if x > R::zero() => {
                let scale = x.powf(rho);
                bessel_j_with(rho, x, tol * scale.abs(), limits)
                    .map(|eval| eval.value / scale)
                    .map_err(|_| e)
            }
            Err(e) => Err(e),
        }
    } else {
        let scale = x.powf(rho);
        Ok(bessel_j_with(rho, x, tol * scale.abs(), limits)?.value / scale)
    }
}

/// Integral representation, valid for integer order only:
/// J_m(x) = (1/pi) int_0^pi cos(x sin t - m t) dt. Cross-check route.
pub fn bessel_j_integral_form(m: u32, x: f64, cfg: &QuadratureConfig) -> Result<QuadResult<f64>> {
    let mf = m as f64;
    let f = |t: f64| (x * t.sin() - mf * t).cos();
    let r = integrate(&f, 0.0, std::f64::consts::PI, cfg)?;
    Ok(QuadResult {
        value: r.value / std::f64::consts::PI,
        error_bound: r.error_bound / std::f64::consts::PI,
        subdivisions: r.subdivisions,
    })
}

/// Checks the three-term recurrence J_{mu-1} + J_{mu+1} = (2 mu / x) J_mu
/// and the derivative identity d/dx [x^mu J_mu] = x^mu J_{mu-1} (central
/// differences at h and h/2, confirming the O(h^2) decay). Needs mu >= 2 so
/// every order involved stays >= 1.
pub fn check_recurrences<R: Real>(mu: R, x: R) -> Result<Vec<VerificationReport>> {
    if mu < c(2.0) {
        return Err(Error::domain("recurrence check wants mu >= 2"));
    }
    if x <= R::zero() {
        return Err(Error::domain("recurrence check wants x > 0"));
    }
    let tol = c::<R>(1e-11);
    let jm1 = bessel_j(mu - R::one(), x, tol)?.value;
    let j = bessel_j(mu, x, tol)?.value;
    let jp1 = bessel_j(mu + R::one(), x, tol)?.value;
    let lhs = jm1 + jp1;
    let rhs = c::<R>(2.0) * mu / x * j;
    let scale = lhs.abs().max(rhs.abs()).max(c(1e-30));
    let rec_residual = ((lhs - rhs) / scale).abs();
    let rec_tol = 1e-9;
    let params = param_map(&[
        ("mu", serde_json::json!(mu.to_f64().unwrap())),
        ("x", serde_json::json!(x.to_f64().unwrap())),
    ]);
    let recurrence = VerificationReport::numeric(
        "bessel/three_term_recurrence",
        "series",
        params.clone(),
        lhs.to_f64().unwrap_or(f64::NAN),
        rhs.to_f64().unwrap_or(f64::NAN),
        rec_residual.to_f64().unwrap_or(f64::NAN),
        rec_tol,
    );

    // derivative identity by central differences
    let f = |t: R| -> Result<R> { Ok(t.powf(mu) * bessel_j(mu, t, tol)?.value) };
    let target = x.powf(mu) * jm1;
    let h = c::<R>(3e-4) * x.abs().max(R::one());
    let diff = |h: R| -> Result<R> { Ok((f(x + h)? - f(x - h)?) / (c::<R>(2.0) * h)) };
    let scale_d = target.abs().max(x.powf(mu) * j.abs() / x.max(R::one())).max(c(1e-12));
    let res_h = ((diff(h)? - target) / scale_d).abs();
    let res_h2 = ((diff(h * c(0.5))? - target) / scale_d).abs();
    let ratio = if res_h2 > R::zero() { res_h / res_h2 } else { c(4.0) };
    // noise floor: if both residuals are already at roundoff the O(h^2)
    // ratio is meaningless and the identity is confirmed outright
    let at_floor = res_h < c(1e-11);
    let ratio_ok = at_floor || (ratio > c(3.0) && ratio < c(5.0));
    let mut deriv = VerificationReport::numeric(
        "bessel/derivative_identity",
        "central_difference",
        {
            let mut p = params;
            p.insert("h".into(), serde_json::json!(h.to_f64().unwrap()));
            p
        },
        diff(h)?.to_f64().unwrap_or(f64::NAN),
        target.to_f64().unwrap_or(f64::NAN),
        res_h.to_f64().unwrap_or(f64::NAN),
        1e-5,
    );
    deriv.pass = deriv.pass && ratio_ok;
    if !at_floor {
        deriv.warning = Some(format!("residual ratio h vs h/2: {:.2} (expect ~4)", ratio.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(vec![recurrence, deriv])
}

const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Floating Gamma via Lanczos (g = 7, 9 coefficients), the only floating
/// Gamma in the crate. Exact half-integer arguments should instead go
/// through the exact module and convert at the last moment.
pub fn gamma_fn<R: Real>(x: R) -> R {
    let half = c::<R>(0.5);
    if x < half {
        // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
        let pi = c::<R>(std::f64::consts::PI);
        return pi / ((pi * x).sin() * gamma_fn(R::one() - x));
    }
    let z = x - R::one();
    let mut acc = c::<R>(LANCZOS_COEFFS[0]);
    for (i, coeff) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + c::<R>(*coeff) / (z + c(i as f64));
    }
    let t = z + c(7.5);
    let sqrt_two_pi = c::<R>((2.0 * std::f64::consts::PI).sqrt());
    sqrt_two_pi * t.powf(z + half) * (-t).exp() * acc
}

/// log Gamma for positive arguments, same coefficients; needed where Gamma
/// itself would overflow (chi-square thresholds at large degrees of freedom).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma wants x > 0");
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, coeff) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += coeff / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}
