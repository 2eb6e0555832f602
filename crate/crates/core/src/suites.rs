//! Named verification sweeps over the default grids, shared by the
//! command-line front end and the acceptance tests so both run the exact
//! same checks.

use num_bigint::BigInt;

use crate::error::Result;
use crate::exact::check_duplication;
use crate::gamma_identities::identity_sweep;
use crate::integrals::{default_convolution_grid, default_laplace_grid, sweep};
use crate::quad::QuadratureConfig;
use crate::report::VerificationReport;
use crate::series::{check_passage_coefficients, check_passage_quotient, check_position_coefficients};
use crate::walks::{
    check_bridge_first_passage, check_bridge_return, check_hitting_vs_position,
    check_negbinom_additivity, check_passage_split, check_position_split, check_weighted_split,
    WalkKind, WalkParams,
};
use crate::Rational;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Step probabilities exercised by the exact walk sweeps.
pub fn default_probabilities() -> Vec<Rational> {
    vec![rat(1, 2), rat(1, 3), rat(2, 5)]
}

/// Grid for the exact walk-identity sweep: all splits through an
/// intermediate level with 1 <= a, b <= level_max and a+b <= n <= n_max.
#[derive(Debug, Clone)]
pub struct WalkGrid {
    pub level_max: i64,
    pub n_max: u64,
    pub probabilities: Vec<Rational>,
}

impl Default for WalkGrid {
    fn default() -> Self {
        WalkGrid { level_max: 5, n_max: 30, probabilities: default_probabilities() }
    }
}

/// Grid for the generating-function sweep: series order and the range of
/// levels whose coefficients are compared against the point masses.
#[derive(Debug, Clone)]
pub struct GenfunGrid {
    pub order: usize,
    pub level_max: i64,
    pub probabilities: Vec<Rational>,
}

impl Default for GenfunGrid {
    fn default() -> Self {
        GenfunGrid { order: 60, level_max: 6, probabilities: default_probabilities() }
    }
}

/// Grid for the conditioned-walk laws; two step probabilities make the
/// p-independence visible.
#[derive(Debug, Clone)]
pub struct BridgeGrid {
    pub r_max: u64,
    pub probabilities: Vec<Rational>,
}

impl Default for BridgeGrid {
    fn default() -> Self {
        BridgeGrid { r_max: 15, probabilities: vec![rat(1, 2), rat(1, 3)] }
    }
}

/// Quadrature verification of the four convolution identities on the
/// default parameter grid.
pub fn convolution_suite(cfg: &QuadratureConfig) -> Vec<VerificationReport> {
    sweep(&default_convolution_grid(), cfg)
}

/// Quadrature verification of the four Laplace-transform identities on the
/// default parameter grid.
pub fn laplace_suite(cfg: &QuadratureConfig) -> Vec<VerificationReport> {
    sweep(&default_laplace_grid(), cfg)
}

/// Exact integer sweep of the five Gamma-quotient families plus the
/// half-integer duplication checks.
pub fn gamma_suite(mu_max: u64, nu_max: u64, r_max: u64) -> Vec<VerificationReport> {
    let mut reports = identity_sweep(mu_max, nu_max, r_max);
    for k in 1..=40 {
        reports.push(check_duplication(k).expect("k >= 1 is in range"));
    }
    reports
}

/// Exact sweep of the split identities (position, passage, weighted), the
/// hitting-time relation, and Pascal additivity, for both walk kinds.
pub fn walk_suite(grid: &WalkGrid) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for kind in [WalkKind::PlusMinus, WalkKind::NonDecreasing] {
        for p in &grid.probabilities {
            let params = WalkParams::new(kind, p.clone())?;
            for a in 1..=grid.level_max {
                for n in (a as u64)..=grid.n_max {
                    reports.push(check_hitting_vs_position(&params, a, n)?);
                }
                for b in 1..=grid.level_max {
                    for n in ((a + b) as u64)..=grid.n_max {
                        reports.push(check_position_split(&params, a, b, n)?);
                        reports.push(check_passage_split(&params, a, b, n)?);
                        reports.push(check_weighted_split(&params, a, b, n)?);
                    }
                }
            }
        }
    }
    // Pascal additivity is a statement about the parameter theta alone
    for theta in &grid.probabilities {
        for mu in 1..=grid.level_max as u64 {
            for nu in 1..=grid.level_max as u64 {
                reports.extend(check_negbinom_additivity(theta, mu, nu, grid.n_max)?);
            }
        }
    }
    Ok(reports)
}

/// Exact conditioned-walk sweep: quotient route against the closed
/// binomial form, at every step probability in the grid.
pub fn bridge_suite(grid: &BridgeGrid) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for p in &grid.probabilities {
        for r in 1..=grid.r_max {
            reports.extend(check_bridge_return(r, p)?);
        }
        let passage_r_max = grid.r_max.min(8);
        for mu in 1..=3 {
            for nu in 0..=3 {
                for r in 1..=passage_r_max {
                    reports.extend(check_bridge_first_passage(mu, nu, r, p)?);
                }
            }
        }
    }
    Ok(reports)
}

/// Coefficient-by-coefficient comparison of the closed-form generating
/// functions against the point masses, plus the quotient relation.
pub fn genfun_suite(grid: &GenfunGrid) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let hi = grid.level_max;
    for p in &grid.probabilities {
        let pm = WalkParams::new(WalkKind::PlusMinus, p.clone())?;
        let nd = WalkParams::new(WalkKind::NonDecreasing, p.clone())?;
        for j in -hi..=hi {
            reports.push(check_position_coefficients(&pm, j, grid.order)?);
            reports.push(check_passage_coefficients(&pm, j, grid.order)?);
            if j != 0 {
                reports.push(check_passage_quotient(&pm, j, grid.order)?);
            }
        }
        for j in 0..=hi {
            reports.push(check_position_coefficients(&nd, j, grid.order)?);
            if j >= 1 {
                reports.push(check_passage_coefficients(&nd, j, grid.order)?);
                reports.push(check_passage_quotient(&nd, j, grid.order)?);
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::summarize;

    #[test]
    fn integral_suites_pass_on_default_grids() {
        let cfg = QuadratureConfig::default();
        let conv = summarize(&convolution_suite(&cfg));
        assert_eq!(conv.total, 256);
        assert_eq!(conv.failures, 0, "worst residual {}", conv.max_residual);
        let lap = summarize(&laplace_suite(&cfg));
        assert_eq!(lap.total, 144);
        assert_eq!(lap.failures, 0, "worst residual {}", lap.max_residual);
    }

    #[test]
    fn gamma_suite_includes_duplication_checks() {
        let reports = gamma_suite(4, 4, 10);
        // 4 pair families + pascal sweep = 800, plus 40 duplication checks
        assert_eq!(reports.len(), 840);
        assert!(reports.iter().all(|r| r.pass));
        assert!(reports.iter().any(|r| r.identity_id == "gamma/duplication"));
    }

    #[test]
    fn small_walk_suite_passes() {
        let grid =
            WalkGrid { level_max: 2, n_max: 8, probabilities: vec![rat(1, 2), rat(2, 5)] };
        let reports = walk_suite(&grid).unwrap();
        assert!(reports.iter().all(|r| r.pass));
        for id in [
            "walk/hitting_vs_position",
            "walk/position_split",
            "walk/passage_split",
            "walk/passage_split_weighted",
            "walk/negbinom_additivity",
        ] {
            assert!(reports.iter().any(|r| r.identity_id == id), "{id} missing");
        }
    }

    #[test]
    fn small_bridge_suite_passes() {
        let grid = BridgeGrid { r_max: 4, probabilities: vec![rat(1, 2), rat(1, 3)] };
        let reports = bridge_suite(&grid).unwrap();
        assert!(reports.iter().all(|r| r.pass));
        assert!(reports.iter().any(|r| r.identity_id == "walk/bridge_return"));
        assert!(reports.iter().any(|r| r.identity_id == "walk/bridge_first_passage"));
    }

    #[test]
    fn small_genfun_suite_passes() {
        let grid = GenfunGrid { order: 14, level_max: 2, probabilities: vec![rat(1, 3)] };
        let reports = genfun_suite(&grid).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        // pm: 5 position + 5 passage + 4 quotient; nd: 3 + 2 + 2
        assert_eq!(reports.len(), 21);
    }
}
