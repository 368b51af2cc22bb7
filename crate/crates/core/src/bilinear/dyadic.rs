//! Dyadic (base `e`) decomposition of unit representatives by the size of
//! `|x|` relative to `q / N`.
//!
//! With `I = max(0, ceil(ln(N / 2)))` the sets are
//!
//! ```text
//! X_0^{+-} = { x : 0 < +-x <= q/N }
//! X_i^{+-} = { x : min(q/2, e^i q/N) >= +-x > e^{i-1} q/N },   1 <= i <= I
//! ```
//!
//! Members are all integers in range. Only units with representative in
//! `(-q/2, q/2]` enter the partial sums, so each unit is counted once.
//! A point sitting exactly on `q/N` belongs to `X_0`; for `i >= 2` the
//! thresholds are irrational and never hit.
//!
//! On `X_i` the interval sum satisfies `|gamma_x| <= c e^{-i} N` with
//! `c = e/2` from `|gamma_x| <= q / (2 <x>_q)`; [`GAMMA_DYADIC_CONSTANT`]
//! is the looser `e pi / 2`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use super::{gamma_error_bound, gamma_table, Interval, WeightVector};
use crate::error::{Error, Result};
use crate::modmath::{gcd, Modulus, RootTable, EXP_ERROR};
use crate::summation::{product_error, SumAccumulator, SumResult};

pub const GAMMA_DYADIC_CONSTANT: f64 = E * PI / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn apply(self, a: i64) -> i64 {
        match self {
            Sign::Plus => a,
            Sign::Minus => -a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSet {
    pub index: u32,
    pub sign: Sign,
    /// Sorted by magnitude.
    pub members: Vec<i64>,
}

impl DyadicSet {
    /// Members that are units with representative in `(-q/2, q/2]`.
    pub fn unit_members<'a>(&'a self, q: &'a Modulus) -> impl Iterator<Item = i64> + 'a {
        let n = q.get() as i64;
        self.members
            .iter()
            .copied()
            .filter(move |&x| 2 * x > -n && gcd(x.unsigned_abs(), n as u64) == 1)
    }
}

/// `I = max(0, ceil(ln(N/2)))`.
pub fn dyadic_count(n: u64) -> u32 {
    let v = (n as f64 / 2.0).ln().ceil();
    if v <= 0.0 {
        0
    } else {
        v as u32
    }
}

/// Index of the set containing magnitude `a` (`1 <= a <= q/2`).
fn level(a: u64, q: u64, n: u64, top: u32) -> u32 {
    if a as u128 * n as u128 <= q as u128 {
        return 0;
    }
    let base = q as f64 / n as f64;
    let mut i = 1;
    while i < top && a as f64 > E.powi(i as i32) * base {
        i += 1;
    }
    i
}

/// All `2(I + 1)` sets, ordered by index then `+` before `-`.
pub fn dyadic_partition(q: &Modulus, n: u64) -> Result<Vec<DyadicSet>> {
    let modulus = q.get();
    if n == 0 || n >= modulus {
        return Err(Error::InvalidInput(format!(
            "dyadic partition needs 1 <= N <= q - 1, got N = {n}, q = {modulus}"
        )));
    }
    let top = dyadic_count(n);
    let mut by_level: Vec<Vec<i64>> = vec![Vec::new(); top as usize + 1];
    for a in 1..=modulus / 2 {
        by_level[level(a, modulus, n, top) as usize].push(a as i64);
    }
    let mut out = Vec::with_capacity(2 * by_level.len());
    for (i, mags) in by_level.into_iter().enumerate() {
        for sign in [Sign::Plus, Sign::Minus] {
            out.push(DyadicSet {
                index: i as u32,
                sign,
                members: mags.iter().map(|&a| sign.apply(a)).collect(),
            });
        }
    }
    Ok(out)
}

/// The partial transformed sums
/// `S_i^{+-} = sum_{x in X_i^{+-}} (sum_m alpha_m e_q(m x^{-1})) gamma_x`,
/// one per dyadic set, in [`dyadic_partition`] order.
pub fn dyadic_partial_sums(a: &WeightVector, j: &Interval) -> Result<Vec<(DyadicSet, SumResult)>> {
    let q = a.modulus();
    q.ensure_same(j.modulus())?;
    let sets = dyadic_partition(q, j.len())?;
    let table = RootTable::new(q);
    let gam = gamma_table(j);
    let gam_err = gamma_error_bound(j.len());
    let inv = q.inverse_table();
    let modulus = q.get() as u128;
    let weights: Vec<(u64, Complex64)> = a.entries().collect();
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        let mut acc = SumAccumulator::new();
        for x in set.unit_members(q) {
            let xr = q.reduce(x) as usize;
            let y = inv[xr] as u128;
            let mut inner = SumAccumulator::new();
            for &(m, alpha) in &weights {
                let term = alpha * table.at((m as u128 * y % modulus) as u64);
                inner.add(
                    term,
                    alpha.norm() * EXP_ERROR + 2.0 * f64::EPSILON * term.norm(),
                );
            }
            let s = inner.finish();
            let g = gam[xr];
            acc.add(
                s.value * g,
                product_error(s.value, s.error_bound, g, gam_err),
            );
        }
        out.push((set, acc.finish()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{bilinear_kloosterman, gamma_sum, generated_weights, Method, WeightKind};

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn partition_examples() {
        let q = m(100);
        let sets = dyadic_partition(&q, 2).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].members, (1..=50).collect::<Vec<_>>());
        assert_eq!(sets[1].members, (1..=50).map(|a| -a).collect::<Vec<_>>());

        let sets = dyadic_partition(&q, 10).unwrap();
        assert_eq!(dyadic_count(10), 2);
        assert_eq!(sets.len(), 6);
        assert_eq!(sets[0].members, (1..=10).collect::<Vec<_>>());

        let q = m(101);
        let sets = dyadic_partition(&q, 10).unwrap();
        let total: usize = sets.iter().map(|s| s.members.len()).sum();
        assert_eq!(total, 100);

        assert!(dyadic_partition(&q, 0).is_err());
        assert!(dyadic_partition(&q, 101).is_err());
    }

    #[test]
    fn membership_follows_thresholds() {
        for (q, n) in [(1000u64, 37u64), (997, 200), (2003, 45), (50, 49)] {
            let md = m(q);
            let base = q as f64 / n as f64;
            for set in dyadic_partition(&md, n).unwrap() {
                for &x in &set.members {
                    let a = x.unsigned_abs() as f64;
                    assert_eq!(x > 0, set.sign == Sign::Plus);
                    assert!(2.0 * a <= q as f64);
                    if set.index == 0 {
                        assert!(a <= base);
                    } else {
                        assert!(a > E.powi(set.index as i32 - 1) * base);
                        assert!(
                            a <= E.powi(set.index as i32) * base || set.index == dyadic_count(n)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn units_covered_exactly_once() {
        for q in 2..=400u64 {
            let md = m(q);
            for n in [1, 2, 3, q / 2, q - 1] {
                if n == 0 || n >= q {
                    continue;
                }
                let mut hits = vec![0u32; q as usize];
                for set in dyadic_partition(&md, n).unwrap() {
                    for x in set.unit_members(&md) {
                        hits[md.reduce(x) as usize] += 1;
                    }
                }
                for x in 0..q {
                    let expected = u32::from(gcd(x, q) == 1);
                    assert_eq!(hits[x as usize], expected, "q={q} N={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn gamma_decays_across_levels() {
        for q in [101u64, 360, 1009] {
            let md = m(q);
            for n in [2u64, 9, 50, q / 2] {
                let j = Interval::new(&md, 3, n).unwrap();
                for set in dyadic_partition(&md, n).unwrap() {
                    let cap = GAMMA_DYADIC_CONSTANT * (-(set.index as f64)).exp() * n as f64;
                    for x in set.unit_members(&md) {
                        assert!(gamma_sum(&j, x).unwrap().norm() <= cap + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_sums_reassemble() {
        for q in [31u64, 100, 257, 1000] {
            let md = m(q);
            let a = generated_weights(&md, 20, WeightKind::Unit, q).unwrap();
            let j = Interval::new(&md, 5, q / 3).unwrap();
            let parts = dyadic_partial_sums(&a, &j).unwrap();
            let full = bilinear_kloosterman(&a, &j, Method::Transformed).unwrap();
            let total: Complex64 = parts.iter().map(|(_, r)| r.value).sum();
            let err: f64 = parts.iter().map(|(_, r)| r.error_bound).sum::<f64>() + full.error_bound;
            assert!((total - full.value).norm() <= err);
            let terms: u64 = parts.iter().map(|(_, r)| r.terms).sum();
            assert_eq!(terms, full.terms);
        }
    }
}
