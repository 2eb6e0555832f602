//! Exhaustive path-enumeration oracle. Every length-n step sequence is
//! visited once and carries its exact rational weight, so the aggregated
//! laws are ground truth against which the closed forms are judged.
//! Feasible for n up to the mid-teens; the acceptance grid stops at 14.

use std::collections::BTreeMap;

use dslab_core::walks::{WalkKind, WalkParams};
use dslab_core::Rational;
use num_traits::Zero;

fn weight_table(params: &WalkParams<Rational>, n: u32) -> Vec<Rational> {
    // weight of a path with u up-steps out of n: p^u q^(n-u)
    (0..=n)
        .map(|u| {
            num_traits::pow::pow(params.up.clone(), u as usize)
                * num_traits::pow::pow(params.down.clone(), (n - u) as usize)
        })
        .collect()
}

fn step(kind: WalkKind, up: bool) -> i64 {
    match kind {
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

/// Law of the position after n steps.
pub fn enumerate_position(params: &WalkParams<Rational>, n: u32) -> BTreeMap<i64, Rational> {
    let weights = weight_table(params, n);
    let mut law: BTreeMap<i64, Rational> = BTreeMap::new();
    for path in 0u32..(1 << n) {
        let ups = path.count_ones();
        let last = match params.kind {
            WalkKind::PlusMinus => 2 * ups as i64 - n as i64,
            WalkKind::NonDecreasing => ups as i64,
        };
        *law.entry(last).or_insert_with(Rational::zero) += weights[ups as usize].clone();
    }
    law
}

/// Law of the first time the walk sits at level a, for times up to the
/// horizon; mass beyond it is simply absent from the map.
pub fn enumerate_first_passage(
    params: &WalkParams<Rational>,
    a: i64,
    horizon: u32,
) -> BTreeMap<u64, Rational> {
    let weights = weight_table(params, horizon);
    let mut law: BTreeMap<u64, Rational> = BTreeMap::new();
    for path in 0u32..(1 << horizon) {
        let mut pos = 0i64;
        for t in 0..horizon {
            pos += step(params.kind, path & (1 << t) != 0);
            if pos == a {
                // full-path weight: the enumerated continuations of this
                // prefix partition its weight exactly
                *law.entry(t as u64 + 1).or_insert_with(Rational::zero) +=
                    weights[path.count_ones() as usize].clone();
                break;
            }
        }
    }
    law
}

/// First-return law of the sign walk conditioned to be back at the origin
/// after 2r steps, keyed by k where the return happens at step 2k.
pub fn enumerate_bridge_return(params: &WalkParams<Rational>, r: u32) -> BTreeMap<u64, Rational> {
    assert_eq!(params.kind, WalkKind::PlusMinus, "bridges live on the sign walk");
    let n = 2 * r;
    let weights = weight_table(params, n);
    let mut pinned = Rational::zero();
    let mut law: BTreeMap<u64, Rational> = BTreeMap::new();
    for path in 0u32..(1 << n) {
        let mut pos = 0i64;
        let mut first_return = 0u64;
        for t in 0..n {
            pos += step(params.kind, path & (1 << t) != 0);
            if pos == 0 && first_return == 0 {
                first_return = t as u64 + 1;
            }
        }
        if pos == 0 {
            let w = weights[path.count_ones() as usize].clone();
            pinned += w.clone();
            *law.entry(first_return / 2).or_insert_with(Rational::zero) += w;
        }
    }
    assert!(!pinned.is_zero());
    law.into_iter().map(|(k, v)| (k, v / pinned.clone())).collect()
}
