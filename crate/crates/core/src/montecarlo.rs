//! Brute-force simulation of the walk laws and a chi-square comparison
//! against the exact distributions.
//!
//! RNG discipline: trajectory i draws from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream i. Each trajectory owns its stream, so results are bit
//! identical across reruns and across any partition of trajectories over
//! threads; the thread count never touches the numbers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::bessel::ln_gamma;
use crate::error::{Error, Result};
use crate::exact::{fraction_string, to_f64_lossy};
use crate::report::{param_map, VerificationReport};
use crate::walks::{
    bridge_return_law, pmf_first_passage, pmf_position, Pmf, WalkKind, WalkParams,
};
use crate::Rational;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub seed: u64,
    /// Trajectories to launch. Rejection samplers may record fewer.
    pub samples: u64,
    /// Step cap per trajectory for passage-time sampling; a trajectory
    /// that has not hit its level by then is counted as censored.
    pub horizon: u64,
}

/// Observed frequencies from one simulation run.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw {
    pub seed: u64,
    /// Trajectories recorded: every launched one for direct sampling,
    /// accepted ones under rejection. Equals sum of counts plus censored.
    pub samples: u64,
    pub horizon: u64,
    pub counts: BTreeMap<i64, u64>,
    pub censored: u64,
}

impl EmpiricalLaw {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "samples": self.samples,
            "horizon": self.horizon,
            "counts": self.counts.iter().map(|(n, c)| json!({"n": n, "count": c})).collect::<Vec<_>>(),
            "censored": self.censored,
        })
    }
}

enum Trajectory {
    Value(i64),
    Censored,
    Rejected,
}

fn collect<F>(seed: u64, launches: u64, horizon: u64, run: F) -> EmpiricalLaw
where
    F: Fn(&mut ChaCha8Rng) -> Trajectory + Sync,
{
    let (counts, censored, recorded) = (0..launches)
        .into_par_iter()
        .fold(
            || (BTreeMap::new(), 0u64, 0u64),
            |(mut counts, censored, recorded), i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                match run(&mut rng) {
                    Trajectory::Value(v) => {
                        *counts.entry(v).or_insert(0) += 1;
                        (counts, censored, recorded + 1)
                    }
                    Trajectory::Censored => (counts, censored + 1, recorded + 1),
                    Trajectory::Rejected => (counts, censored, recorded),
                }
            },
        )
        .reduce(
            || (BTreeMap::new(), 0u64, 0u64),
            |(mut a, ca, ra), (b, cb, rb)| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                (a, ca + cb, ra + rb)
            },
        );
    EmpiricalLaw { seed, samples: recorded, horizon, counts, censored }
}

fn step(params: &WalkParams<f64>, rng: &mut ChaCha8Rng) -> i64 {
    let up = rng.gen_bool(params.up);
    match params.kind {
        WalkKind::PlusMinus => {
            if up {
                1
            } else {
                -1
            }
        }
        WalkKind::NonDecreasing => i64::from(up),
    }
}

/// Samples the position S_n; every trajectory records a value.
pub fn simulate_position(params: &WalkParams<f64>, n: u64, cfg: &SimConfig) -> EmpiricalLaw {
    collect(cfg.seed, cfg.samples, n, |rng| {
        let mut pos = 0i64;
        for _ in 0..n {
            pos += step(params, rng);
        }
        Trajectory::Value(pos)
    })
}

/// Samples the first-passage time T_a, censoring at the horizon.
pub fn simulate_first_passage(
    params: &WalkParams<f64>,
    a: i64,
    cfg: &SimConfig,
) -> Result<EmpiricalLaw> {
    if params.kind == WalkKind::NonDecreasing && a < 1 {
        return Err(Error::domain("a non-decreasing walk only hits levels a >= 1"));
    }
    Ok(collect(cfg.seed, cfg.samples, cfg.horizon, |rng| {
        let mut pos = 0i64;
        for n in 1..=cfg.horizon {
            pos += step(params, rng);
            if pos == a {
                return Trajectory::Value(n as i64);
            }
        }
        Trajectory::Censored
    }))
}

/// Samples the first return to the origin on a sign walk conditioned to be
/// back at the origin after 2r steps, by rejection on the endpoint. The
/// recorded value is k where the first return happens at step 2k; it always
/// exists on an accepted path, so nothing is censored.
pub fn simulate_bridge_return(
    params: &WalkParams<f64>,
    r: u64,
    cfg: &SimConfig,
) -> Result<EmpiricalLaw> {
    if params.kind != WalkKind::PlusMinus {
        return Err(Error::domain("bridge sampling needs the sign walk"));
    }
    if r == 0 {
        return Err(Error::domain("bridge return needs r >= 1"));
    }
    Ok(collect(cfg.seed, cfg.samples, 2 * r, |rng| {
        let mut pos = 0i64;
        let mut first_return = 0u64;
        for n in 1..=2 * r {
            pos += step(params, rng);
            if pos == 0 && first_return == 0 {
                first_return = n;
            }
        }
        if pos == 0 {
            Trajectory::Value((first_return / 2) as i64)
        } else {
            Trajectory::Rejected
        }
    }))
}

/// Result of a chi-square comparison between observed and expected counts.
#[derive(Debug, Clone)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    /// Quantile of the chi-square law at 1 - alpha; the check fails when
    /// the statistic exceeds it.
    pub threshold: f64,
    pub alpha: f64,
    pub pooled_bins: usize,
    pub pass: bool,
    pub warning: Option<String>,
}

/// Classic floor on expected counts per cell; cells below it are pooled
/// with their neighbors before the statistic is formed.
const MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-square test of the observed law against an exact one. The
/// expected pmf's tail, when present, becomes the expectation of the
/// censored bin, so truncation is part of the comparison rather than a
/// leak. No parameters are fitted, so dof = pooled bins - 1.
pub fn chi_square_check(
    law: &EmpiricalLaw,
    expected: &Pmf<f64>,
    alpha: f64,
) -> Result<GoodnessOfFit> {
    if !(0.0..0.5).contains(&alpha) || alpha == 0.0 {
        return Err(Error::domain(format!("significance level out of range: {alpha}")));
    }
    if law.samples == 0 {
        return Err(Error::domain("no recorded trajectories"));
    }
    let n = law.samples as f64;
    for value in law.counts.keys() {
        if !expected.mass.contains_key(value) {
            return Err(Error::inconsistent(format!(
                "observed value {value} lies outside the support of the expected law"
            )));
        }
    }
    let mut raw: Vec<(f64, f64)> = expected
        .mass
        .iter()
        .map(|(k, p)| (law.counts.get(k).copied().unwrap_or(0) as f64, p * n))
        .collect();
    match expected.tail {
        Some(tail) => raw.push((law.censored as f64, tail * n)),
        None if law.censored > 0 => {
            return Err(Error::inconsistent(
                "censored trajectories but the expected law has no tail mass".to_string(),
            ))
        }
        None => {}
    }
    let total_expected: f64 = raw.iter().map(|(_, e)| e).sum();
    if (total_expected / n - 1.0).abs() > 1e-6 {
        return Err(Error::inconsistent(format!(
            "expected law does not normalize: total {total_expected} over {n} trajectories"
        )));
    }

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (obs, exp) in raw {
        obs_acc += obs;
        exp_acc += exp;
        if exp_acc >= MIN_EXPECTED {
            pooled.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if (obs_acc > 0.0 || exp_acc > 0.0) && !pooled.is_empty() {
        let last = pooled.last_mut().expect("nonempty");
        last.0 += obs_acc;
        last.1 += exp_acc;
    } else if pooled.is_empty() {
        pooled.push((obs_acc, exp_acc));
    }

    if pooled.len() < 2 {
        return Ok(GoodnessOfFit {
            statistic: 0.0,
            dof: 0,
            threshold: 0.0,
            alpha,
            pooled_bins: pooled.len(),
            pass: true,
            warning: Some(
                "pooling left a single cell; the test has no discriminating power".to_string(),
            ),
        });
    }

    let statistic: f64 = pooled.iter().map(|(obs, exp)| (obs - exp).powi(2) / exp).sum();
    let dof = pooled.len() - 1;
    let threshold = chi_square_quantile(1.0 - alpha, dof)?;
    Ok(GoodnessOfFit {
        statistic,
        dof,
        threshold,
        alpha,
        pooled_bins: pooled.len(),
        pass: statistic <= threshold,
        warning: None,
    })
}

/// Regularized lower incomplete gamma P(s, x), series for x < s + 1 and a
/// Lentz continued fraction for the complement above.
fn reg_lower_gamma(s: f64, x: f64) -> f64 {
    debug_assert!(s > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefactor = s * x.ln() - x - ln_gamma(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut denom = s;
        for _ in 0..500 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * log_prefactor.exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - log_prefactor.exp() * h
    }
}

/// Quantile of the chi-square law with `dof` degrees of freedom, by
/// bisection on the cdf P(dof/2, x/2).
pub fn chi_square_quantile(prob: f64, dof: usize) -> Result<f64> {
    if dof == 0 || !(0.0..1.0).contains(&prob) {
        return Err(Error::domain(format!("chi-square quantile at prob={prob}, dof={dof}")));
    }
    let s = dof as f64 / 2.0;
    let cdf = |x: f64| reg_lower_gamma(s, x / 2.0);
    let mut hi = (dof as f64).max(1.0);
    while cdf(hi) < prob {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::non_convergence("chi-square quantile bracket"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn fit_report(
    id: &str,
    mut params: BTreeMap<String, serde_json::Value>,
    law: &EmpiricalLaw,
    fit: &GoodnessOfFit,
) -> VerificationReport {
    params.insert("seed".to_string(), json!(law.seed));
    params.insert("samples".to_string(), json!(law.samples));
    params.insert("censored".to_string(), json!(law.censored));
    params.insert("alpha".to_string(), json!(fit.alpha));
    params.insert("dof".to_string(), json!(fit.dof));
    let residual = if fit.threshold > 0.0 { fit.statistic / fit.threshold } else { 0.0 };
    let mut report = VerificationReport::numeric(
        id,
        "monte_carlo_chi_square",
        params,
        fit.statistic,
        fit.threshold,
        residual,
        1.0,
    );
    report.warning = fit.warning.clone();
    report
}

fn float_params(params: &WalkParams<Rational>) -> Result<WalkParams<f64>> {
    WalkParams::new(params.kind, to_f64_lossy(&params.up))
}

/// Tests recorded position counts against the exact law of S_n.
pub fn position_report(
    params: &WalkParams<Rational>,
    n: u64,
    law: &EmpiricalLaw,
    alpha: f64,
) -> Result<VerificationReport> {
    let fit = chi_square_check(law, &pmf_position(params, n).to_f64(), alpha)?;
    let params = param_map(&[
        ("kind", json!(params.kind.label())),
        ("p", json!(fraction_string(&params.up))),
        ("n", json!(n)),
    ]);
    Ok(fit_report("walk/position_law", params, law, &fit))
}

/// Tests recorded passage times against the exact law of T_a truncated at
/// the law's own horizon; the censored bin carries the tail.
pub fn passage_report(
    params: &WalkParams<Rational>,
    a: i64,
    law: &EmpiricalLaw,
    alpha: f64,
) -> Result<VerificationReport> {
    let expected = pmf_first_passage(params, a, law.horizon)?.to_f64();
    let fit = chi_square_check(law, &expected, alpha)?;
    let params = param_map(&[
        ("kind", json!(params.kind.label())),
        ("p", json!(fraction_string(&params.up))),
        ("a", json!(a)),
        ("horizon", json!(law.horizon)),
    ]);
    Ok(fit_report("walk/passage_law", params, law, &fit))
}

/// Tests recorded conditioned first-return times against the universal
/// bridge law, which has no p in it; the simulation may have run at any
/// step probability.
pub fn bridge_report(
    params: &WalkParams<Rational>,
    r: u64,
    law: &EmpiricalLaw,
    launched: u64,
    alpha: f64,
) -> Result<VerificationReport> {
    let exact = bridge_return_law(r)?;
    let mass: BTreeMap<i64, f64> = exact
        .iter()
        .enumerate()
        .map(|(idx, q)| (idx as i64 + 1, to_f64_lossy(q)))
        .collect();
    let expected = Pmf { mass, truncated: false, tail: None };
    let fit = chi_square_check(law, &expected, alpha)?;
    let params = param_map(&[
        ("kind", json!(params.kind.label())),
        ("p", json!(fraction_string(&params.up))),
        ("r", json!(r)),
        ("launched", json!(launched)),
    ]);
    Ok(fit_report("walk/bridge_return_law", params, law, &fit))
}

/// Simulates S_n and tests the counts against the exact position law.
pub fn check_position_law(
    params: &WalkParams<Rational>,
    n: u64,
    cfg: &SimConfig,
    alpha: f64,
) -> Result<VerificationReport> {
    let law = simulate_position(&float_params(params)?, n, cfg);
    position_report(params, n, &law, alpha)
}

/// Simulates T_a with censoring at the horizon and tests against the exact
/// passage law truncated at the same horizon.
pub fn check_passage_law(
    params: &WalkParams<Rational>,
    a: i64,
    cfg: &SimConfig,
    alpha: f64,
) -> Result<VerificationReport> {
    let law = simulate_first_passage(&float_params(params)?, a, cfg)?;
    passage_report(params, a, &law, alpha)
}

/// Simulates the first return on an endpoint-conditioned sign walk and
/// tests against the universal bridge return law.
pub fn check_bridge_return_law(
    params: &WalkParams<Rational>,
    r: u64,
    cfg: &SimConfig,
    alpha: f64,
) -> Result<VerificationReport> {
    let law = simulate_bridge_return(&float_params(params)?, r, cfg)?;
    bridge_report(params, r, &law, cfg.samples, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn pm(n: i64, d: i64) -> WalkParams<Rational> {
        WalkParams::new(WalkKind::PlusMinus, rat(n, d)).unwrap()
    }

    #[test]
    fn quantile_matches_frozen_reference_values() {
        // scipy.stats.chi2.ppf, frozen
        let anchors = [
            (0.999, 1, 10.827566170662733),
            (0.999, 10, 29.58829845220364),
            (0.95, 2, 5.991464547107979),
        ];
        for (prob, dof, want) in anchors {
            let got = chi_square_quantile(prob, dof).unwrap();
            assert!((got - want).abs() < 1e-9 * want, "prob={prob} dof={dof}: {got} vs {want}");
        }
    }

    #[test]
    fn quantile_matches_closed_form_at_two_dof() {
        // dof = 2 is an exponential law: quantile(p) = -2 ln(1 - p)
        for prob in [0.1, 0.5, 0.95, 0.999] {
            let got = chi_square_quantile(prob, 2).unwrap();
            let want = -2.0 * (1.0 - prob).ln();
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn runs_are_bit_identical_and_seeds_matter() {
        let params = WalkParams::new(WalkKind::PlusMinus, 0.4f64).unwrap();
        let cfg = SimConfig { seed: 11, samples: 2000, horizon: 0 };
        let a = simulate_position(&params, 9, &cfg);
        let b = simulate_position(&params, 9, &cfg);
        assert_eq!(a.counts, b.counts);
        let c = simulate_position(&params, 9, &SimConfig { seed: 12, ..cfg });
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn position_law_passes_chi_square() {
        let rep = check_position_law(
            &pm(1, 2),
            10,
            &SimConfig { seed: 7, samples: 20_000, horizon: 0 },
            0.001,
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.warning.is_none());
    }

    #[test]
    fn censored_passage_law_passes_chi_square() {
        // drift away from the level: about a third of trajectories never
        // arrive, and the slow (4pq)^(n/2) decay leaves real tail mass at
        // horizon 50; the censored bin carries all of it
        let params = pm(2, 5);
        let cfg = SimConfig { seed: 3, samples: 20_000, horizon: 50 };
        let law = simulate_first_passage(
            &WalkParams::new(WalkKind::PlusMinus, 0.4f64).unwrap(),
            1,
            &cfg,
        )
        .unwrap();
        assert!(law.censored > 5_000);
        // censored fraction must sit within 5 binomial standard errors of
        // the exact tail mass
        let expected = pmf_first_passage(&params, 1, cfg.horizon).unwrap().to_f64();
        let tail = expected.tail.unwrap();
        let sigma = (tail * (1.0 - tail) / law.samples as f64).sqrt();
        let observed = law.censored as f64 / law.samples as f64;
        assert!((observed - tail).abs() <= 5.0 * sigma, "{observed} vs {tail}");
        let rep = check_passage_law(&params, 1, &cfg, 0.001).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn empirical_law_serializes_to_declared_shape() {
        let params = WalkParams::new(WalkKind::PlusMinus, 0.5f64).unwrap();
        let law = simulate_position(&params, 2, &SimConfig { seed: 1, samples: 50, horizon: 0 });
        let v = law.to_json();
        assert_eq!(v["seed"], 1);
        assert_eq!(v["samples"], 50);
        assert!(v["counts"].as_array().unwrap().iter().all(|e| e["n"].is_number() && e["count"].is_number()));
    }

    #[test]
    fn bridge_return_matches_universal_law_at_biased_p() {
        // the conditioned law has no p in it; sample at p = 3/10 and test
        // against the p-free expectation
        let rep = check_bridge_return_law(
            &pm(3, 10),
            4,
            &SimConfig { seed: 19, samples: 40_000, horizon: 0 },
            0.001,
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        // acceptance rate P{S_8 = 0} at p = 0.3 is about 0.136
        let accepted = rep.params["samples"].as_u64().unwrap();
        assert!((4_000..8_000).contains(&accepted), "{accepted}");
    }

    #[test]
    fn wrong_law_is_rejected() {
        // simulate at p = 0.55 but compare against p = 1/2
        let biased = WalkParams::new(WalkKind::PlusMinus, 0.55f64).unwrap();
        let law = simulate_position(&biased, 10, &SimConfig { seed: 5, samples: 20_000, horizon: 0 });
        let expected = pmf_position(&pm(1, 2), 10).to_f64();
        let fit = chi_square_check(&law, &expected, 0.001).unwrap();
        assert!(!fit.pass, "statistic {} vs threshold {}", fit.statistic, fit.threshold);
    }

    #[test]
    fn single_cell_comparison_is_flagged_as_powerless() {
        let law = EmpiricalLaw {
            seed: 0,
            samples: 100,
            horizon: 1,
            counts: BTreeMap::from([(0, 100)]),
            censored: 0,
        };
        let expected = Pmf { mass: BTreeMap::from([(0, 1.0)]), truncated: false, tail: None };
        let fit = chi_square_check(&law, &expected, 0.001).unwrap();
        assert!(fit.pass);
        assert_eq!(fit.dof, 0);
        assert!(fit.warning.is_some());
    }

    #[test]
    fn bookkeeping_mismatches_are_errors() {
        let expected = Pmf { mass: BTreeMap::from([(0, 1.0)]), truncated: false, tail: None };
        // censored mass with nowhere to put it
        let law = EmpiricalLaw {
            seed: 0,
            samples: 10,
            horizon: 1,
            counts: BTreeMap::from([(0, 8)]),
            censored: 2,
        };
        assert!(chi_square_check(&law, &expected, 0.001).is_err());
        // observation outside the support
        let law = EmpiricalLaw {
            seed: 0,
            samples: 10,
            horizon: 1,
            counts: BTreeMap::from([(3, 10)]),
            censored: 0,
        };
        assert!(chi_square_check(&law, &expected, 0.001).is_err());
    }
}
