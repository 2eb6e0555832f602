//! Exact combinatorial identities between Gamma-function convolutions,
//! checked in integer arithmetic.
//!
//! For integer orders every Gamma quotient that appears here is an integer:
//! the ballot number B_k(mu) = mu/(2k+mu) * C(2k+mu, k), the occupancy
//! number O_j(nu) = C(2j+nu-1, j), the ascending factorial
//! Gamma(k+mu)/k! = (k+mu-1)!/k!, and the shifted binomial C(k+mu-1, mu-1).
//! Each check therefore reduces to a BigInt sum compared against a single
//! BigInt quotient of factorials, with no rounding anywhere. The rational
//! Gamma-quotient route is kept in the tests as an independent second
//! derivation of the same sums.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::exact::{binomial_int, factorial};
use crate::report::{param_map, VerificationReport};
use crate::Rational;

/// B_k(mu) = mu/(2k+mu) * C(2k+mu, k) = mu * (2k+mu-1)! / (k! (k+mu)!),
/// the number of nonnegative lattice paths first hitting mu at step 2k+mu.
pub fn ballot_number(mu: u64, k: u64) -> BigInt {
    assert!(mu >= 1, "ballot numbers need mu >= 1");
    let num = BigInt::from(mu) * factorial(2 * k + mu - 1);
    let den = factorial(k) * factorial(k + mu);
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(r.is_zero(), "ballot number must be an integer");
    q
}

/// O_j(nu) = C(2j+nu-1, j), the number of length-(2j+nu-1) paths with j
/// down-steps; the coefficient weighting an occupancy tail of order nu.
pub fn occupancy_number(nu: u64, j: u64) -> BigInt {
    assert!(nu >= 1, "occupancy numbers need nu >= 1");
    binomial_int(2 * j + nu - 1, j as i64)
}

/// Gamma(k+mu)/k! = (k+mu-1)!/k!, integer for integer mu >= 1.
pub fn ascending_quotient(mu: u64, k: u64) -> BigInt {
    assert!(mu >= 1);
    let (q, r) = num_integer::Integer::div_rem(&factorial(k + mu - 1), &factorial(k));
    debug_assert!(r.is_zero());
    q
}

fn exact_report(id: &str, params: &[(&str, u64)], lhs: &BigInt, rhs: &BigInt) -> VerificationReport {
    let jparams: Vec<_> = params.iter().map(|(k, v)| (*k, json!(v))).collect();
    VerificationReport::exact(
        id,
        param_map(&jparams),
        lhs.to_string(),
        rhs.to_string(),
        (lhs - rhs).to_string(),
        lhs == rhs,
    )
}

/// sum_k B_k(mu) O_{r-k}(nu) = O_r(mu+nu): splitting a tail of order mu+nu
/// at the first passage through level mu.
pub fn check_hitting_occupancy(mu: u64, nu: u64, r: u64) -> VerificationReport {
    let lhs: BigInt = (0..=r).map(|k| ballot_number(mu, k) * occupancy_number(nu, r - k)).sum();
    let rhs = occupancy_number(mu + nu, r);
    exact_report("gamma/hit_occ", &[("mu", mu), ("nu", nu), ("r", r)], &lhs, &rhs)
}

/// sum_k B_k(mu) B_{r-k}(nu) = B_r(mu+nu): first passage through mu+nu
/// decomposes over the intermediate passage through mu.
pub fn check_hitting_convolution(mu: u64, nu: u64, r: u64) -> VerificationReport {
    let lhs: BigInt = (0..=r).map(|k| ballot_number(mu, k) * ballot_number(nu, r - k)).sum();
    let rhs = ballot_number(mu + nu, r);
    exact_report("gamma/hit_hit", &[("mu", mu), ("nu", nu), ("r", r)], &lhs, &rhs)
}

/// sum_k [Gamma(k+mu)/k!][Gamma(r-k+nu)/(r-k)!]
///   = [Gamma(mu)Gamma(nu)/Gamma(mu+nu)] * Gamma(r+mu+nu)/r!,
/// all sides integers for integer orders.
pub fn check_gamma_convolution(mu: u64, nu: u64, r: u64) -> VerificationReport {
    let lhs: BigInt =
        (0..=r).map(|k| ascending_quotient(mu, k) * ascending_quotient(nu, r - k)).sum();
    let num = factorial(mu - 1) * factorial(nu - 1) * factorial(r + mu + nu - 1);
    let den = factorial(mu + nu - 1) * factorial(r);
    let (rhs, rem) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(rem.is_zero());
    exact_report("gamma/conv", &[("mu", mu), ("nu", nu), ("r", r)], &lhs, &rhs)
}

/// sum_k C(k+mu-1, mu-1) C(r-k+nu-1, nu-1) = C(r+mu+nu-1, mu+nu-1):
/// the previous identity with the constant Gamma factors divided out.
pub fn check_negbinom_convolution(mu: u64, nu: u64, r: u64) -> VerificationReport {
    let lhs: BigInt = (0..=r)
        .map(|k| {
            binomial_int(k + mu - 1, (mu - 1) as i64) * binomial_int(r - k + nu - 1, (nu - 1) as i64)
        })
        .sum();
    let rhs = binomial_int(r + mu + nu - 1, (mu + nu - 1) as i64);
    exact_report("gamma/negbinom_conv", &[("mu", mu), ("nu", nu), ("r", r)], &lhs, &rhs)
}

/// sum_{k=a}^{n-b} C(k-1, a-1) C(n-k, b) = C(n, a+b): counting the position
/// of the a-th success among n trials with b later successes.
pub fn check_pascal_convolution(a: u64, b: u64, n: u64) -> VerificationReport {
    assert!(a >= 1 && n >= a + b, "need a >= 1 and n >= a+b");
    let lhs: BigInt =
        (a..=n - b).map(|k| binomial_int(k - 1, (a - 1) as i64) * binomial_int(n - k, b as i64)).sum();
    let rhs = binomial_int(n, (a + b) as i64);
    exact_report("gamma/pascal_conv", &[("a", a), ("b", b), ("n", n)], &lhs, &rhs)
}

/// Normalized form of the hit/occupancy identity: the conditioned
/// first-passage weights p_k = B_k(mu) O_{r-k}(nu) / O_r(mu+nu) must sum to
/// exactly 1. This is the same identity reached through rational division
/// instead of an integer comparison.
pub fn check_conditional_normalization(mu: u64, nu: u64, r: u64) -> VerificationReport {
    let total = occupancy_number(mu + nu, r);
    let sum: Rational = (0..=r)
        .map(|k| {
            Rational::new(ballot_number(mu, k) * occupancy_number(nu, r - k), total.clone())
        })
        .sum();
    let lhs = crate::exact::fraction_string(&sum);
    let pass = sum == Rational::one();
    VerificationReport {
        identity_id: "gamma/hit_occ".to_string(),
        method: "normalization".to_string(),
        params: param_map(&[("mu", json!(mu)), ("nu", json!(nu)), ("r", json!(r))]),
        lhs: json!(lhs),
        rhs: json!("1"),
        residual: json!(crate::exact::fraction_string(&(sum - Rational::one()))),
        tolerance: 0.0,
        pass,
        subdivisions: None,
        runtime_ms: None,
        warning: None,
    }
}

/// Precomputed term tables for the sweep; indexing is [order][index].
struct Tables {
    ballot: Vec<Vec<BigInt>>,
    occupancy: Vec<Vec<BigInt>>,
    ascending: Vec<Vec<BigInt>>,
    shifted_binom: Vec<Vec<BigInt>>,
}

impl Tables {
    fn new(order_hi: u64, r_max: u64) -> Self {
        let build = |f: &dyn Fn(u64, u64) -> BigInt, hi: u64| -> Vec<Vec<BigInt>> {
            (0..=hi)
                .map(|mu| {
                    if mu == 0 {
                        Vec::new()
                    } else {
                        (0..=r_max).map(|k| f(mu, k)).collect()
                    }
                })
                .collect()
        };
        Tables {
            ballot: build(&ballot_number, order_hi),
            occupancy: build(&occupancy_number, order_hi),
            ascending: build(&ascending_quotient, order_hi),
            shifted_binom: build(
                &|mu, k| binomial_int(k + mu - 1, (mu - 1) as i64),
                order_hi,
            ),
        }
    }
}

/// Exhaustive integer check of all five families over
/// mu in 1..=mu_max, nu in 1..=nu_max, r in 0..=r_max (for the Pascal family
/// a <= mu_max, b <= nu_max, a+b <= n <= r_max). Term tables are shared, so
/// each check is a straight BigInt dot product.
pub fn identity_sweep(mu_max: u64, nu_max: u64, r_max: u64) -> Vec<VerificationReport> {
    assert!(mu_max >= 1 && nu_max >= 1);
    let tables = Tables::new(mu_max + nu_max, r_max);
    let pairs: Vec<(u64, u64)> =
        (1..=mu_max).flat_map(|mu| (1..=nu_max).map(move |nu| (mu, nu))).collect();
    let mut reports: Vec<VerificationReport> = pairs
        .par_iter()
        .flat_map_iter(|&(mu, nu)| {
            let tables = &tables;
            (0..=r_max).flat_map(move |r| {
                let ru = r as usize;
                let dot = |xs: &[BigInt], ys: &[BigInt]| -> BigInt {
                    (0..=ru).map(|k| &xs[k] * &ys[ru - k]).sum()
                };
                let lhs_s = dot(&tables.ballot[mu as usize], &tables.occupancy[nu as usize]);
                let lhs_d = dot(&tables.ballot[mu as usize], &tables.ballot[nu as usize]);
                let lhs_b = dot(&tables.ascending[mu as usize], &tables.ascending[nu as usize]);
                let lhs_nb =
                    dot(&tables.shifted_binom[mu as usize], &tables.shifted_binom[nu as usize]);
                let num = factorial(mu - 1) * factorial(nu - 1) * factorial(r + mu + nu - 1);
                let den = factorial(mu + nu - 1) * factorial(r);
                let rhs_b = num / den;
                [
                    exact_report(
                        "gamma/hit_occ",
                        &[("mu", mu), ("nu", nu), ("r", r)],
                        &lhs_s,
                        &tables.occupancy[(mu + nu) as usize][ru],
                    ),
                    exact_report(
                        "gamma/hit_hit",
                        &[("mu", mu), ("nu", nu), ("r", r)],
                        &lhs_d,
                        &tables.ballot[(mu + nu) as usize][ru],
                    ),
                    exact_report("gamma/conv", &[("mu", mu), ("nu", nu), ("r", r)], &lhs_b, &rhs_b),
                    exact_report(
                        "gamma/negbinom_conv",
                        &[("mu", mu), ("nu", nu), ("r", r)],
                        &lhs_nb,
                        &binomial_int(r + mu + nu - 1, (mu + nu - 1) as i64),
                    ),
                ]
                .into_iter()
            })
        })
        .collect();
    let pascal: Vec<VerificationReport> = pairs
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            ((a + b)..=r_max).map(move |n| check_pascal_convolution(a, b, n))
        })
        .collect();
    reports.extend(pascal);
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::gamma_int;

    #[test]
    fn ballot_and_occupancy_ground_values() {
        assert_eq!(ballot_number(1, 0), BigInt::from(1));
        assert_eq!(ballot_number(1, 1), BigInt::from(1));
        assert_eq!(ballot_number(1, 2), BigInt::from(2)); // Catalan
        assert_eq!(ballot_number(1, 3), BigInt::from(5));
        assert_eq!(ballot_number(2, 1), BigInt::from(2));
        assert_eq!(occupancy_number(1, 1), BigInt::from(2));
        assert_eq!(occupancy_number(2, 1), BigInt::from(3));
        assert_eq!(ascending_quotient(3, 2), BigInt::from(12)); // 4!/2!
    }

    #[test]
    fn hand_checked_small_cases() {
        assert!(check_hitting_occupancy(1, 1, 1).pass);
        assert!(check_hitting_convolution(1, 1, 1).pass);
        assert!(check_gamma_convolution(1, 1, 1).pass);
        assert!(check_negbinom_convolution(1, 1, 1).pass);
        assert!(check_pascal_convolution(1, 1, 3).pass);
        // the r=0 degenerate case reduces every family to 1 = 1
        assert!(check_hitting_occupancy(3, 5, 0).pass);
        assert!(check_hitting_convolution(3, 5, 0).pass);
    }

    /// Independent route: the same sums assembled from rational Gamma
    /// quotients, fractions and all, must agree with the integer route.
    #[test]
    fn rational_gamma_route_agrees() {
        let g = |n: u64| gamma_int(n as i64).unwrap();
        for (mu, nu, r) in [(1u64, 1u64, 4u64), (2, 3, 5), (4, 1, 7), (5, 5, 6)] {
            // B_k(mu) as mu/(2k+mu) * Gamma(2k+mu+1)/(Gamma(k+1) Gamma(k+mu+1))
            let ballot_rat = |m: u64, k: u64| -> Rational {
                Rational::new(BigInt::from(m), BigInt::from(2 * k + m))
                    * Rational::new(
                        g(2 * k + m + 1).to_integer(),
                        (g(k + 1) * g(k + m + 1)).to_integer(),
                    )
            };
            let lhs: Rational = (0..=r)
                .map(|k| {
                    ballot_rat(mu, k)
                        * Rational::new(
                            g(2 * (r - k) + nu).to_integer(),
                            (g(r - k + 1) * g(r - k + nu)).to_integer(),
                        )
                })
                .sum();
            let expect = Rational::from_integer(
                (0..=r).map(|k| ballot_number(mu, k) * occupancy_number(nu, r - k)).sum(),
            );
            assert_eq!(lhs, expect, "mu={mu} nu={nu} r={r}");
        }
    }

    #[test]
    fn families_are_symmetric_in_the_orders() {
        for (mu, nu, r) in [(2u64, 5u64, 6u64), (1, 4, 9)] {
            for f in [check_hitting_convolution, check_gamma_convolution, check_negbinom_convolution]
            {
                let a = f(mu, nu, r);
                let b = f(nu, mu, r);
                assert_eq!(a.lhs, b.lhs);
                assert_eq!(a.rhs, b.rhs);
            }
        }
    }

    /// The ascending-factorial and shifted-binomial families are the same
    /// sum up to the constant (mu-1)! (nu-1)!.
    #[test]
    fn convolution_families_differ_by_constant() {
        for (mu, nu, r) in [(2u64, 3u64, 5u64), (4, 4, 8)] {
            let b: BigInt =
                (0..=r).map(|k| ascending_quotient(mu, k) * ascending_quotient(nu, r - k)).sum();
            let nb: BigInt = (0..=r)
                .map(|k| {
                    binomial_int(k + mu - 1, (mu - 1) as i64)
                        * binomial_int(r - k + nu - 1, (nu - 1) as i64)
                })
                .sum();
            assert_eq!(b, nb * factorial(mu - 1) * factorial(nu - 1));
        }
    }

    #[test]
    fn normalization_is_exactly_one() {
        for (mu, nu, r) in [(1u64, 1u64, 5u64), (2, 7, 11), (6, 3, 20)] {
            let rep = check_conditional_normalization(mu, nu, r);
            assert!(rep.pass, "{rep:?}");
            assert_eq!(rep.residual, serde_json::json!("0/1"));
        }
    }

    #[test]
    fn small_sweep_passes_with_expected_count() {
        let reports = identity_sweep(4, 4, 10);
        // 4 families on a 4x4x11 grid, plus the Pascal family on
        // a,b <= 4 with a+b <= n <= 10
        let pascal: u64 = (1..=4u64)
            .flat_map(|a| (1..=4u64).map(move |b| 11u64.saturating_sub(a + b)))
            .sum();
        assert_eq!(reports.len(), 4 * 4 * 4 * 11 + pascal as usize);
        assert!(reports.iter().all(|r| r.pass));
    }
}
