//! Modular arithmetic substrate.
//!
//! Everything here works on native `u64` moduli. [`Modulus`] caches its
//! factorization and totient at construction; the unit-group structure and
//! the inverse table are built on first use and memoized behind a
//! [`OnceLock`], so a `Modulus` can be cloned and shared across threads.
//!
//! Factorization is plain trial division. That is fine for the moduli this
//! crate is meant for, which are capped at [`MAX_MODULUS`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest modulus accepted by [`Modulus::new`].
pub const MAX_MODULUS: u64 = 10_000_000;

/// Absolute error budget of one [`unit_root`] evaluation.
///
/// The angle is formed from an exactly reduced numerator in `(-den/2, den/2]`
/// so `|angle| <= pi`; three roundings on the angle plus one in `sin_cos`
/// stay below `11 eps`.
pub const EXP_ERROR: f64 = 16.0 * f64::EPSILON;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Canonical factorization of `n` by trial division, primes ascending.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot factorize {n}: need n >= 2"
        )));
    }
    let mut n = n;
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while n.is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    let mut p = 3u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        p += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(out)
}

/// Inverse of `x` modulo `m` via the extended Euclidean algorithm, or `None`
/// when `gcd(x, m) > 1`.
fn inverse_raw(x: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (x as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

struct ModulusInner {
    q: u64,
    factors: Vec<(u64, u32)>,
    phi: u64,
    unit_group: OnceLock<UnitGroupStructure>,
    inverses: OnceLock<Vec<u64>>,
}

/// An integer modulus `q >= 2` with cached factorization and totient.
#[derive(Clone)]
pub struct Modulus {
    inner: Arc<ModulusInner>,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!(
                "modulus must be >= 2, got {q}"
            )));
        }
        if q > MAX_MODULUS {
            return Err(Error::InvalidInput(format!(
                "modulus {q} exceeds the supported maximum {MAX_MODULUS}"
            )));
        }
        let factors = factorize(q)?;
        let phi = factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product();
        Ok(Modulus {
            inner: Arc::new(ModulusInner {
                q,
                factors,
                phi,
                unit_group: OnceLock::new(),
                inverses: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn get(&self) -> u64 {
        self.inner.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.inner.factors
    }

    /// Order of the unit group.
    pub fn phi(&self) -> u64 {
        self.inner.phi
    }

    pub fn is_prime(&self) -> bool {
        matches!(self.inner.factors.as_slice(), [(_, 1)])
    }

    #[inline]
    pub fn reduce(&self, z: i64) -> u64 {
        z.rem_euclid(self.inner.q as i64) as u64
    }

    #[inline]
    pub fn reduce_wide(&self, z: i128) -> u64 {
        z.rem_euclid(self.inner.q as i128) as u64
    }

    pub fn is_unit(&self, x: i64) -> bool {
        gcd(self.reduce(x), self.inner.q) == 1
    }

    /// Units in increasing order of their least non-negative residue.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        let q = self.inner.q;
        (1..q).filter(move |&x| gcd(x, q) == 1)
    }

    pub fn inv(&self, x: i64) -> Result<u64> {
        let r = self.reduce(x);
        inverse_raw(r, self.inner.q).ok_or(Error::NotAUnit {
            value: x,
            modulus: self.inner.q,
            gcd: gcd(r, self.inner.q),
        })
    }

    /// Table of inverses indexed by residue; non-units map to 0.
    pub fn inverse_table(&self) -> &[u64] {
        self.inner.inverses.get_or_init(|| {
            let q = self.inner.q;
            (0..q).map(|x| inverse_raw(x, q).unwrap_or(0)).collect()
        })
    }

    pub fn unit_group(&self) -> &UnitGroupStructure {
        self.inner
            .unit_group
            .get_or_init(|| UnitGroupStructure::build(self))
    }

    pub fn ensure_same(&self, other: &Modulus) -> Result<()> {
        if self.get() == other.get() {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.get(),
                right: other.get(),
            })
        }
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.get() == other.get()
    }
}

impl Eq for Modulus {}

impl Hash for Modulus {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.get().hash(state)
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({})", self.get())
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

pub fn mod_inv(x: i64, q: &Modulus) -> Result<u64> {
    q.inv(x)
}

/// `exp(2 pi i num / den)` with the numerator reduced exactly first.
pub fn unit_root(num: i128, den: u64) -> Complex64 {
    let d = den as i128;
    let mut r = num.rem_euclid(d);
    if 2 * r > d {
        r -= d;
    }
    let angle = TAU * (r as f64 / den as f64);
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

/// The additive character `e_q(z) = exp(2 pi i z / q)`.
#[inline]
pub fn eq_exp(z: i64, q: &Modulus) -> Complex64 {
    unit_root(z as i128, q.get())
}

/// `sin(pi * num / den)`, folded into `[0, pi/2]` before evaluation so the
/// result has small relative error even near the zeros.
pub fn sin_pi_ratio(num: i128, den: u64) -> f64 {
    let d = den as i128;
    let mut t = num.rem_euclid(2 * d);
    let mut sign = 1.0;
    if t >= d {
        t -= d;
        sign = -1.0;
    }
    if 2 * t > d {
        t = d - t;
    }
    sign * (PI * (t as f64 / den as f64)).sin()
}

/// Distance from `u` to the nearest multiple of `q`.
pub fn dist_q(u: i64, q: &Modulus) -> u64 {
    let r = q.reduce(u);
    r.min(q.get() - r)
}

pub fn unit_group(q: &Modulus) -> &UnitGroupStructure {
    q.unit_group()
}

/// Table of `e_q(z)` for `z = 0..q`. Entries are produced by [`unit_root`],
/// so lookups are bit-identical to direct evaluation.
#[derive(Clone, Debug)]
pub struct RootTable {
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(q: &Modulus) -> Self {
        let n = q.get();
        RootTable {
            roots: (0..n).map(|z| unit_root(z as i128, n)).collect(),
        }
    }

    #[inline]
    pub fn at(&self, residue: u64) -> Complex64 {
        self.roots[residue as usize]
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// One prime-power factor of the unit group.
#[derive(Clone, Debug)]
pub struct UnitComponent {
    pub prime: u64,
    pub exponent: u32,
    pub modulus_part: u64,
    /// Generators as residues modulo `modulus_part`.
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// Residue modulo `modulus_part` -> packed exponent index, `u32::MAX` for
    /// non-units. Packing is mixed radix with the first generator fastest.
    log: Vec<u32>,
}

impl UnitComponent {
    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponents of `x` against this component's generators.
    pub fn exponents(&self, x: u64, out: &mut Vec<u64>) -> bool {
        let idx = self.log[(x % self.modulus_part) as usize];
        if idx == u32::MAX {
            return false;
        }
        let mut idx = idx as u64;
        for &ord in &self.orders {
            out.push(idx % ord);
            idx /= ord;
        }
        true
    }
}

/// Unit group of `Z_q` as a product of cyclic factors, one block of
/// generators per prime power dividing `q`.
///
/// Generators are the smallest valid ones: the least primitive root for an
/// odd prime power, `3` for `4`, and `{-1, 3}` for `2^e` with `e >= 3`.
#[derive(Clone, Debug)]
pub struct UnitGroupStructure {
    modulus: u64,
    pub components: Vec<UnitComponent>,
    /// Lift of each generator to a residue mod `q` (1 on the other factors).
    lifted: Vec<u64>,
    exponent: u64,
}

impl UnitGroupStructure {
    fn build(q: &Modulus) -> Self {
        let components: Vec<UnitComponent> = q
            .factors()
            .iter()
            .map(|&(p, e)| build_component(p, e))
            .collect();
        let n = q.get();
        let mut lifted = Vec::new();
        for c in &components {
            // CRT idempotent: 1 mod p^e, 0 mod the cofactor.
            let cof = n / c.modulus_part;
            let idem = if cof == 1 {
                1
            } else {
                mul_mod(
                    cof,
                    inverse_raw(cof % c.modulus_part, c.modulus_part).unwrap(),
                    n,
                )
            };
            let one_minus = (n + 1 - idem) % n;
            for &g in &c.generators {
                lifted.push((mul_mod(g, idem, n) + one_minus) % n);
            }
        }
        let exponent = components
            .iter()
            .flat_map(|c| c.orders.iter().copied())
            .fold(1, lcm);
        UnitGroupStructure {
            modulus: n,
            components,
            lifted,
            exponent,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Total number of generators across all components.
    pub fn rank(&self) -> usize {
        self.lifted.len()
    }

    pub fn orders(&self) -> impl Iterator<Item = u64> + '_ {
        self.components
            .iter()
            .flat_map(|c| c.orders.iter().copied())
    }

    pub fn lifted_generators(&self) -> &[u64] {
        &self.lifted
    }

    /// Least common multiple of all generator orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        self.components.iter().map(UnitComponent::size).product()
    }

    /// Exponent tuple of `x`, or `None` if `x` is not a unit.
    pub fn exponents(&self, x: u64) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(self.rank());
        self.exponents_into(x, &mut out).then_some(out)
    }

    pub fn exponents_into(&self, x: u64, out: &mut Vec<u64>) -> bool {
        out.clear();
        self.components.iter().all(|c| c.exponents(x, out))
    }

    /// Inverse of [`Self::exponents`]: the unit with the given exponent tuple.
    pub fn from_exponents(&self, exps: &[u64]) -> u64 {
        debug_assert_eq!(exps.len(), self.rank());
        self.lifted
            .iter()
            .zip(exps)
            .fold(1 % self.modulus, |acc, (&g, &k)| {
                mul_mod(acc, pow_mod(g, k, self.modulus), self.modulus)
            })
    }
}

fn build_component(p: u64, e: u32) -> UnitComponent {
    let pe = p.pow(e);
    let mut log = vec![u32::MAX; pe as usize];
    let (generators, orders) = if p == 2 {
        match e {
            1 => {
                log[1] = 0;
                (vec![], vec![])
            }
            2 => {
                log[1] = 0;
                log[3] = 1;
                (vec![3], vec![2])
            }
            _ => {
                let half = pe >> 2;
                let mut pow3 = 1u64;
                for b in 0..half {
                    log[pow3 as usize] = (2 * b) as u32;
                    log[(pe - pow3) as usize] = (2 * b + 1) as u32;
                    pow3 = pow3 * 3 % pe;
                }
                (vec![pe - 1, 3], vec![2, half])
            }
        }
    } else {
        let phi = pe / p * (p - 1);
        let g = least_primitive_root(p, e, phi);
        let mut cur = 1u64;
        for k in 0..phi {
            log[cur as usize] = k as u32;
            cur = mul_mod(cur, g, pe);
        }
        (vec![g], vec![phi])
    };
    UnitComponent {
        prime: p,
        exponent: e,
        modulus_part: pe,
        generators,
        orders,
        log,
    }
}

fn least_primitive_root(p: u64, e: u32, phi: u64) -> u64 {
    let pe = p.pow(e);
    let mut primes: Vec<u64> = if p > 2 {
        factorize(p - 1)
            .map(|f| f.into_iter().map(|(l, _)| l).collect())
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    if e >= 2 {
        primes.push(p);
    }
    (2..pe)
        .filter(|g| g % p != 0)
        .find(|&g| primes.iter().all(|&l| pow_mod(g, phi / l, pe) != 1))
        .expect("odd prime powers have primitive roots")
}
