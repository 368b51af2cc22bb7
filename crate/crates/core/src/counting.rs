//! Exact solution counts for the congruences and equations that control the
//! moments of the bilinear forms:
//!
//! ```text
//! J_r(q;K): 1/x_1 + .. + 1/x_r = 1/x_{r+1} + .. + 1/x_{2r}  (mod q)
//! R_r(q;K):   x_1 ... x_r      =   x_{r+1} ... x_{2r}       (mod q)
//! ```
//!
//! with `1 <= x_i <= K` and `gcd(x_i, q) = 1`, and the same over the integers
//! (`J_r(K)`, `R_r(K)`, no coprimality condition). Everything is integer
//! arithmetic.
//!
//! The convolution path folds the distribution of r-fold sums (or products)
//! and returns `sum_s N(s)^2`. The exhaustive path enumerates `2r`-tuples and
//! is the oracle.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modmath::{gcd, Modulus};

/// Largest tuple count an exhaustive count will enumerate.
pub const EXHAUSTIVE_CAP: u128 = 100_000_000;
/// Largest modulus for the convolution path.
pub const CONVOLUTION_MAX_Q: u64 = 1_000_000;
/// Largest fold depth for the convolution path.
pub const CONVOLUTION_MAX_R: u32 = 4;
/// Largest `K^r` for the equations over the integers.
pub const EQUATION_CAP: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountMethod {
    #[default]
    Convolution,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountKind {
    Reciprocal,
    Product,
}

/// Distribution of r-fold sums of inverses (or r-fold products) of the
/// admissible `x <= K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub modulus: Modulus,
    pub counts: Vec<u128>,
    /// Number of admissible base elements `K'`.
    pub base_size: u64,
    pub depth: u32,
}

impl CountTable {
    pub fn reciprocal(q: &Modulus, k: u64, r: u32) -> Result<Self> {
        Self::build(q, k, r, CountKind::Reciprocal)
    }

    pub fn product(q: &Modulus, k: u64, r: u32) -> Result<Self> {
        Self::build(q, k, r, CountKind::Product)
    }

    pub fn build(q: &Modulus, k: u64, r: u32, kind: CountKind) -> Result<Self> {
        check_args(q, k, r)?;
        if q.get() > CONVOLUTION_MAX_Q {
            return Err(Error::ResourceLimit {
                what: "convolution modulus",
                requested: q.get() as u128,
                cap: CONVOLUTION_MAX_Q as u128,
            });
        }
        if r > CONVOLUTION_MAX_R {
            return Err(Error::ResourceLimit {
                what: "convolution depth r",
                requested: r as u128,
                cap: CONVOLUTION_MAX_R as u128,
            });
        }
        let n = q.get() as usize;
        let base: Vec<usize> = match kind {
            CountKind::Reciprocal => {
                let inv = q.inverse_table();
                admissible(q, k)
                    .map(|x| inv[x as usize % n] as usize)
                    .collect()
            }
            CountKind::Product => admissible(q, k).map(|x| x as usize).collect(),
        };
        let mut counts = vec![0u128; n];
        // depth 0: the empty sum is 0, the empty product is 1
        let start = match kind {
            CountKind::Reciprocal => 0,
            CountKind::Product => 1 % n,
        };
        counts[start] = 1;
        for _ in 0..r {
            let mut next = vec![0u128; n];
            for (s, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &b in &base {
                    let t = match kind {
                        CountKind::Reciprocal => (s + b) % n,
                        CountKind::Product => (s as u128 * b as u128 % n as u128) as usize,
                    };
                    next[t] += c;
                }
            }
            counts = next;
        }
        Ok(CountTable {
            modulus: q.clone(),
            counts,
            base_size: base.len() as u64,
            depth: r,
        })
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    /// `sum_s N(s)^2`.
    pub fn collision_count(&self) -> Result<u128> {
        collisions(self.counts.iter().copied())
    }
}

fn collisions(mut counts: impl Iterator<Item = u128>) -> Result<u128> {
    counts.try_fold(0u128, |acc, c| {
        c.checked_mul(c)
            .and_then(|sq| acc.checked_add(sq))
            .ok_or(Error::ResourceLimit {
                what: "collision count (u128 overflow)",
                requested: u128::MAX,
                cap: u128::MAX,
            })
    })
}

fn check_args(q: &Modulus, k: u64, r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidInput("r must be >= 1".into()));
    }
    if k == 0 || k > q.get() {
        return Err(Error::InvalidInput(format!(
            "need 1 <= K <= q, got K = {k}, q = {}",
            q.get()
        )));
    }
    Ok(())
}

/// `{x in [1, K] : gcd(x, q) = 1}`.
pub fn admissible(q: &Modulus, k: u64) -> impl Iterator<Item = u64> + '_ {
    let n = q.get();
    (1..=k).filter(move |&x| gcd(x, n) == 1)
}

pub fn jr_congruence(q: &Modulus, k: u64, r: u32, method: CountMethod) -> Result<u128> {
    congruence(q, k, r, method, CountKind::Reciprocal)
}

pub fn rr_congruence(q: &Modulus, k: u64, r: u32, method: CountMethod) -> Result<u128> {
    congruence(q, k, r, method, CountKind::Product)
}

pub fn congruence(
    q: &Modulus,
    k: u64,
    r: u32,
    method: CountMethod,
    kind: CountKind,
) -> Result<u128> {
    match method {
        CountMethod::Convolution => CountTable::build(q, k, r, kind)?.collision_count(),
        CountMethod::Exhaustive => exhaustive(q, k, r, kind),
    }
}

/// Enumerates all `2r`-tuples. Inverses come from a linear search so this path
/// shares nothing with the convolution tables.
fn exhaustive(q: &Modulus, k: u64, r: u32, kind: CountKind) -> Result<u128> {
    check_args(q, k, r)?;
    let n = q.get();
    let base: Vec<u64> = admissible(q, k)
        .map(|x| match kind {
            CountKind::Reciprocal => (1..n.max(2)).find(|&y| x * y % n == 1 % n).unwrap_or(0),
            CountKind::Product => x % n,
        })
        .collect();
    let len = 2 * r as usize;
    let tuples = (base.len() as u128)
        .checked_pow(len as u32)
        .unwrap_or(u128::MAX);
    if tuples > EXHAUSTIVE_CAP {
        return Err(Error::ResourceLimit {
            what: "exhaustive count tuples (K'^2r)",
            requested: tuples,
            cap: EXHAUSTIVE_CAP,
        });
    }
    if base.is_empty() {
        return Ok(0);
    }
    let r = r as usize;
    let mut idx = vec![0usize; len];
    let mut count = 0u128;
    loop {
        let (left, right) = match kind {
            CountKind::Reciprocal => (
                idx[..r].iter().map(|&i| base[i]).sum::<u64>() % n,
                idx[r..].iter().map(|&i| base[i]).sum::<u64>() % n,
            ),
            CountKind::Product => (
                idx[..r].iter().fold(1 % n, |p, &i| p * base[i] % n),
                idx[r..].iter().fold(1 % n, |p, &i| p * base[i] % n),
            ),
        };
        if left == right {
            count += 1;
        }
        let mut pos = 0;
        while pos < len {
            idx[pos] += 1;
            if idx[pos] < base.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == len {
            return Ok(count);
        }
    }
}

fn equation_cap(k: u64, r: u32) -> Result<()> {
    if r == 0 || k == 0 {
        return Err(Error::InvalidInput("need K >= 1 and r >= 1".into()));
    }
    let size = (k as u128).checked_pow(r).unwrap_or(u128::MAX);
    if size > EQUATION_CAP {
        return Err(Error::ResourceLimit {
            what: "equation value table (K^r)",
            requested: size,
            cap: EQUATION_CAP,
        });
    }
    Ok(())
}

/// Folds a value distribution `r` times with `step`, then returns `sum c^2`.
fn fold_equation(
    k: u64,
    r: u32,
    start: u128,
    step: impl Fn(u128, u64) -> Option<u128>,
) -> Result<u128> {
    let mut dist: HashMap<u128, u128> = HashMap::from([(start, 1)]);
    for _ in 0..r {
        let mut next: HashMap<u128, u128> = HashMap::with_capacity(dist.len() * k as usize);
        for (&v, &c) in &dist {
            for x in 1..=k {
                let w = step(v, x).ok_or(Error::ResourceLimit {
                    what: "exact equation value (u128 overflow)",
                    requested: u128::MAX,
                    cap: u128::MAX,
                })?;
                *next.entry(w).or_insert(0) += c;
            }
        }
        dist = next;
    }
    collisions(dist.into_values())
}

/// `J_r(K)` over the integers. Reciprocal sums are kept as numerators over
/// the common denominator `lcm(1..K)`.
pub fn jr_equation(k: u64, r: u32) -> Result<u128> {
    equation_cap(k, r)?;
    let mut den: u128 = 1;
    for x in 1..=k as u128 {
        let g = gcd_u128(den, x);
        den = (den / g).checked_mul(x).ok_or(Error::ResourceLimit {
            what: "common denominator lcm(1..K)",
            requested: k as u128,
            cap: u128::MAX,
        })?;
    }
    fold_equation(k, r, 0, |v, x| v.checked_add(den / x as u128))
}

/// `R_r(K)` over the integers.
pub fn rr_equation(k: u64, r: u32) -> Result<u128> {
    equation_cap(k, r)?;
    fold_equation(k, r, 1, |v, x| v.checked_mul(x as u128))
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicAverage {
    /// `(1/Q) sum_{Q <= q <= 2Q} count(q)`.
    pub mean: Ratio<u128>,
    pub per_q: BTreeMap<u64, u128>,
}

/// Counts over every `q` in `[Q, 2Q]` by the convolution path, in parallel.
pub fn dyadic_average(big_q: u64, k: u64, r: u32, kind: CountKind) -> Result<DyadicAverage> {
    if big_q == 0 || k > big_q {
        return Err(Error::InvalidInput(format!(
            "need 1 <= K <= Q, got K = {k}, Q = {big_q}"
        )));
    }
    let hi = big_q
        .checked_mul(2)
        .ok_or_else(|| Error::InvalidInput("2Q overflows".into()))?;
    let per_q = (big_q..=hi)
        .into_par_iter()
        .map(|q| {
            let m = Modulus::new(q)?;
            congruence(&m, k, r, CountMethod::Convolution, kind).map(|c| (q, c))
        })
        .collect::<Result<BTreeMap<u64, u128>>>()?;
    let total = per_q
        .values()
        .try_fold(0u128, |a, &c| a.checked_add(c))
        .ok_or(Error::ResourceLimit {
            what: "dyadic total (u128 overflow)",
            requested: u128::MAX,
            cap: u128::MAX,
        })?;
    Ok(DyadicAverage {
        mean: Ratio::new(total, big_q as u128),
        per_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    use CountMethod::{Convolution as Conv, Exhaustive as Exh};

    #[test]
    fn congruence_examples() {
        assert_eq!(jr_congruence(&m(7), 4, 1, Conv).unwrap(), 4);
        assert_eq!(jr_congruence(&m(5), 2, 2, Conv).unwrap(), 6);
        assert_eq!(jr_congruence(&m(5), 2, 2, Exh).unwrap(), 6);
        assert_eq!(
            jr_congruence(&m(5), 4, 2, Conv).unwrap(),
            jr_congruence(&m(5), 4, 2, Exh).unwrap()
        );
        assert_eq!(rr_congruence(&m(5), 2, 2, Conv).unwrap(), 6);
        assert_eq!(rr_congruence(&m(7), 3, 1, Exh).unwrap(), 3);
        assert_eq!(
            rr_congruence(&m(9), 4, 2, Conv).unwrap(),
            rr_congruence(&m(9), 4, 2, Exh).unwrap()
        );
    }

    #[test]
    fn equation_examples() {
        assert_eq!(jr_equation(3, 1).unwrap(), 3);
        assert_eq!(jr_equation(3, 2).unwrap(), 15);
        assert_eq!(jr_equation(1, 5).unwrap(), 1);
        assert_eq!(rr_equation(2, 2).unwrap(), 6);
        assert_eq!(rr_equation(2, 1).unwrap(), 2);
        // pair products of {1,2,3}: 1,2,2,3,3,4,6,6,9
        assert_eq!(rr_equation(3, 2).unwrap(), 15);
    }

    /// Brute-force over the integers with exact cross-multiplication.
    fn equation_oracle(k: u64, r: usize, product: bool) -> u128 {
        let len = 2 * r;
        let mut count = 0u128;
        let total = (k as usize).pow(len as u32);
        for code in 0..total {
            let mut c = code;
            let xs: Vec<u128> = (0..len)
                .map(|_| {
                    let x = (c % k as usize) as u128 + 1;
                    c /= k as usize;
                    x
                })
                .collect();
            let equal = if product {
                xs[..r].iter().product::<u128>() == xs[r..].iter().product::<u128>()
            } else {
                // a/b with a = sum of products of the other terms
                let frac = |part: &[u128]| {
                    let den: u128 = part.iter().product();
                    let num: u128 = part.iter().map(|x| den / x).sum();
                    (num, den)
                };
                let (a, b) = frac(&xs[..r]);
                let (c2, d) = frac(&xs[r..]);
                a * d == c2 * b
            };
            count += u128::from(equal);
        }
        count
    }

    #[test]
    fn equations_match_brute_force() {
        for k in 1..=6 {
            for r in 1..=3usize {
                if (k as usize).pow(2 * r as u32) > 2_000_000 {
                    continue;
                }
                assert_eq!(
                    jr_equation(k, r as u32).unwrap(),
                    equation_oracle(k, r, false),
                    "J k={k} r={r}"
                );
                assert_eq!(
                    rr_equation(k, r as u32).unwrap(),
                    equation_oracle(k, r, true),
                    "R k={k} r={r}"
                );
            }
        }
    }

    #[test]
    fn errors_and_caps() {
        assert!(matches!(
            jr_congruence(&m(5), 6, 1, Conv),
            Err(Error::InvalidInput(_))
        ));
        assert!(jr_congruence(&m(5), 0, 1, Conv).is_err());
        assert!(jr_congruence(&m(5), 2, 0, Conv).is_err());
        assert!(matches!(
            jr_congruence(&m(101), 100, 3, Exh),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(matches!(
            jr_congruence(&m(11), 5, 5, Conv),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(matches!(
            jr_equation(100, 5),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn table_totals() {
        for q in [2u64, 12, 31] {
            for k in 1..=q.min(8) {
                for r in 1..=3 {
                    for kind in [CountKind::Reciprocal, CountKind::Product] {
                        let t = CountTable::build(&m(q), k, r, kind).unwrap();
                        assert_eq!(t.total(), (t.base_size as u128).pow(r));
                    }
                }
            }
        }
    }

    #[test]
    fn dyadic_average_examples() {
        let avg = dyadic_average(10, 2, 1, CountKind::Reciprocal).unwrap();
        assert_eq!(avg.per_q.len(), 11);
        for (&q, &c) in &avg.per_q {
            assert_eq!(c, admissible(&m(q), 2).count() as u128);
        }
        // q = 10..20: odd q admit both 1 and 2, even q only 1
        assert_eq!(avg.mean, Ratio::new(6 + 5 * 2, 10));

        for kind in [CountKind::Reciprocal, CountKind::Product] {
            let avg = dyadic_average(16, 4, 2, kind).unwrap();
            let direct: u128 = (16..=32)
                .map(|q| congruence(&m(q), 4, 2, Exh, kind).unwrap())
                .sum();
            assert_eq!(avg.mean, Ratio::new(direct, 16));
        }
        assert!(dyadic_average(4, 5, 1, CountKind::Product).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_diagonal(q in 2u64..300, k_frac in 0.0f64..1.0, r in 1u32..=3) {
            let md = m(q);
            let k = ((k_frac * q as f64) as u64).clamp(1, q - 1);
            for kind in [CountKind::Reciprocal, CountKind::Product] {
                let a = congruence(&md, k, r, Conv, kind).unwrap();
                let b = congruence(&md, k + 1, r, Conv, kind).unwrap();
                prop_assert!(a <= b);
                let kp = admissible(&md, k).count() as u128;
                prop_assert!(a >= kp.pow(r));
                if r == 2 && kind == CountKind::Reciprocal {
                    prop_assert!(a + kp >= 2 * kp * kp);
                }
            }
        }
    }
}
