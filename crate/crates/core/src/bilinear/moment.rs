//! The 2r-th moment identity behind the Hölder step:
//!
//! ```text
//! sum_{m in Z_q} | sum_{x in X} gamma_x e_q(m x^{-1}) |^{2r}
//!   = q * sum_{x_1..x_2r in X, x_1^{-1}+..+x_r^{-1} = x_{r+1}^{-1}+..+x_{2r}^{-1}}
//!         prod_{j<=r} gamma_{x_j} conj(gamma_{x_{r+j}})
//! ```
//!
//! The right side is computed either by enumerating all `|X|^{2r}` tuples or
//! by folding the distribution of r-fold inverse sums (`q * sum_s |D_r(s)|^2`).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modmath::{Modulus, RootTable};

/// Largest tuple count the exhaustive right-hand side will enumerate.
pub const EXHAUSTIVE_TUPLE_CAP: u128 = 100_000_000;
/// Largest `r * q * |X|` for the convolution right-hand side.
pub const CONVOLUTION_WORK_CAP: u128 = 1_000_000_000;
/// Auto mode enumerates tuples only up to this count.
const AUTO_EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MomentMethod {
    #[default]
    Auto,
    Exhaustive,
    Convolution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The path actually used for `rhs`.
    pub method: MomentMethod,
}

impl MomentCheck {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

pub fn moment_check(q: &Modulus, gamma: &BTreeMap<i64, Complex64>, r: u32) -> Result<MomentCheck> {
    moment_check_with(q, gamma, r, MomentMethod::Auto)
}

pub fn moment_check_with(
    q: &Modulus,
    gamma: &BTreeMap<i64, Complex64>,
    r: u32,
    method: MomentMethod,
) -> Result<MomentCheck> {
    if r == 0 {
        return Err(Error::InvalidInput("moment order r must be >= 1".into()));
    }
    // (inverse residue, gamma) per element of X
    let mut elems: Vec<(u64, Complex64)> = Vec::with_capacity(gamma.len());
    let mut seen = std::collections::BTreeSet::new();
    for (&x, &g) in gamma {
        let inv = q.inv(x)?;
        if !seen.insert(q.reduce(x)) {
            return Err(Error::InvalidInput(format!(
                "X contains {x} more than once modulo {}",
                q.get()
            )));
        }
        elems.push((inv, g));
    }

    let tuples = (elems.len() as u128)
        .checked_pow(2 * r)
        .unwrap_or(u128::MAX);
    let conv_work = r as u128 * q.get() as u128 * elems.len() as u128;
    let method = match method {
        MomentMethod::Auto if tuples <= AUTO_EXHAUSTIVE_LIMIT => MomentMethod::Exhaustive,
        MomentMethod::Auto => MomentMethod::Convolution,
        other => other,
    };
    let rhs = match method {
        MomentMethod::Exhaustive => {
            if tuples > EXHAUSTIVE_TUPLE_CAP {
                return Err(Error::ResourceLimit {
                    what: "exhaustive moment tuples (|X|^2r)",
                    requested: tuples,
                    cap: EXHAUSTIVE_TUPLE_CAP,
                });
            }
            rhs_exhaustive(q, &elems, r as usize)
        }
        _ => {
            if conv_work > CONVOLUTION_WORK_CAP {
                return Err(Error::ResourceLimit {
                    what: "moment convolution (r * q * |X|)",
                    requested: conv_work,
                    cap: CONVOLUTION_WORK_CAP,
                });
            }
            rhs_convolution(q, &elems, r as usize)
        }
    };
    Ok(MomentCheck {
        lhs: lhs(q, &elems, r),
        rhs,
        method,
    })
}

fn lhs(q: &Modulus, elems: &[(u64, Complex64)], r: u32) -> f64 {
    let table = RootTable::new(q);
    let modulus = q.get() as u128;
    (0..q.get())
        .map(|m| {
            let s: Complex64 = elems
                .iter()
                .map(|&(inv, g)| g * table.at((m as u128 * inv as u128 % modulus) as u64))
                .sum();
            s.norm_sqr().powi(r as i32)
        })
        .sum()
}

fn rhs_exhaustive(q: &Modulus, elems: &[(u64, Complex64)], r: usize) -> f64 {
    let k = elems.len();
    if k == 0 {
        return 0.0;
    }
    let modulus = q.get();
    let mut idx = vec![0usize; 2 * r];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut balance = 0u64;
        for j in 0..r {
            balance = (balance + elems[idx[j]].0) % modulus;
            balance = (balance + modulus - elems[idx[r + j]].0) % modulus;
        }
        if balance == 0 {
            let mut prod = Complex64::new(1.0, 0.0);
            for j in 0..r {
                prod *= elems[idx[j]].1 * elems[idx[r + j]].1.conj();
            }
            acc += prod;
        }
        let mut pos = 0;
        while pos < idx.len() {
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
    }
    q.get() as f64 * acc.re
}

fn rhs_convolution(q: &Modulus, elems: &[(u64, Complex64)], r: usize) -> f64 {
    let n = q.get() as usize;
    let zero = Complex64::new(0.0, 0.0);
    let mut dist = vec![zero; n];
    dist[0] = Complex64::new(1.0, 0.0);
    for _ in 0..r {
        let mut next = vec![zero; n];
        for (s, &d) in dist.iter().enumerate() {
            if d == zero {
                continue;
            }
            for &(inv, g) in elems {
                let t = (s + inv as usize) % n;
                next[t] += d * g;
            }
        }
        dist = next;
    }
    q.get() as f64 * dist.iter().map(|d| d.norm_sqr()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    fn ones(xs: &[i64]) -> BTreeMap<i64, Complex64> {
        xs.iter().map(|&x| (x, Complex64::new(1.0, 0.0))).collect()
    }

    #[test]
    fn examples() {
        let q5 = m(5);
        let c = moment_check(&q5, &ones(&[1]), 2).unwrap();
        assert!((c.lhs - 5.0).abs() < 1e-12 && (c.rhs - 5.0).abs() < 1e-12);

        let c = moment_check(&q5, &ones(&[1, 2]), 1).unwrap();
        assert!((c.lhs - 10.0).abs() < 1e-12 && (c.rhs - 10.0).abs() < 1e-12);

        let q7 = m(7);
        let c = moment_check_with(&q7, &ones(&[1, 2, 3]), 2, MomentMethod::Exhaustive).unwrap();
        assert!(c.relative_gap() < 1e-12);
        let d = moment_check_with(&q7, &ones(&[1, 2, 3]), 2, MomentMethod::Convolution).unwrap();
        assert!((c.rhs - d.rhs).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let q = m(10);
        assert!(matches!(
            moment_check(&q, &ones(&[2]), 1),
            Err(Error::NotAUnit { .. })
        ));
        assert!(matches!(
            moment_check(&q, &ones(&[1, 11]), 1),
            Err(Error::InvalidInput(_))
        ));
        assert!(moment_check(&q, &ones(&[1]), 0).is_err());
        let big: Vec<i64> = (1..1000).filter(|x| x % 2 == 1 && x % 5 != 0).collect();
        let q = m(1000);
        assert!(matches!(
            moment_check_with(&q, &ones(&big), 3, MomentMethod::Exhaustive),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn paths_agree_on_random_gamma() {
        for q in [11u64, 26, 97] {
            let md = m(q);
            let xs: BTreeMap<i64, Complex64> = md
                .units()
                .take(5)
                .enumerate()
                .map(|(i, x)| {
                    (
                        x as i64,
                        Complex64::new(1.0 + i as f64 * 0.3, -(i as f64) * 0.7),
                    )
                })
                .collect();
            for r in 1..=3 {
                let e = moment_check_with(&md, &xs, r, MomentMethod::Exhaustive).unwrap();
                let c = moment_check_with(&md, &xs, r, MomentMethod::Convolution).unwrap();
                assert!(e.relative_gap() < 1e-10);
                assert!(c.relative_gap() < 1e-10);
            }
        }
    }
}
