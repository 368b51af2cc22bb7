//! Complete Kloosterman sums, Dirichlet characters and Gauss sums.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::dft;
use crate::error::{Error, Result};
use crate::modmath::{gcd, lcm, unit_root, Modulus, RootTable, EXP_ERROR};
use crate::summation::{SumAccumulator, SumResult};

/// `K_q(m, n) = sum over units x of e_q(m x + n x^{-1})`.
pub fn kloosterman(q: &Modulus, m: i64, n: i64) -> SumResult {
    kloosterman_with(q, None, m, n)
}

pub(crate) fn kloosterman_with(
    q: &Modulus,
    table: Option<&RootTable>,
    m: i64,
    n: i64,
) -> SumResult {
    let modulus = q.get();
    let (mr, nr) = (q.reduce(m) as u128, q.reduce(n) as u128);
    let inv = q.inverse_table();
    let mut acc = SumAccumulator::new();
    for x in q.units() {
        let z = ((mr * x as u128 + nr * inv[x as usize] as u128) % modulus as u128) as u64;
        let term = match table {
            Some(t) => t.at(z),
            None => unit_root(z as i128, modulus),
        };
        acc.add(term, EXP_ERROR);
    }
    acc.finish()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RowMethod {
    /// FFT above [`ROW_FFT_THRESHOLD`], direct otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// All `K_q(m, n)` for `m = 0..q` at a fixed `n`.
#[derive(Clone, Debug)]
pub struct KloostermanRow {
    pub values: Vec<Complex64>,
    /// Uniform per-entry error bound.
    pub error_bound: f64,
}

/// Threshold above which the FFT row is the default.
pub const ROW_FFT_THRESHOLD: u64 = 512;

pub fn kloosterman_row(q: &Modulus, n: i64, method: RowMethod) -> KloostermanRow {
    let use_fft = match method {
        RowMethod::Auto => q.get() > ROW_FFT_THRESHOLD,
        RowMethod::Direct => false,
        RowMethod::Fft => true,
    };
    if use_fft {
        // Row over m is the DFT of x -> e_q(n x^{-1}) supported on units.
        let modulus = q.get();
        let nr = q.reduce(n) as u128;
        let inv = q.inverse_table();
        let mut f = vec![Complex64::new(0.0, 0.0); modulus as usize];
        for x in q.units() {
            let z = (nr * inv[x as usize] as u128 % modulus as u128) as i128;
            f[x as usize] = unit_root(z, modulus);
        }
        let phi = q.phi() as f64;
        KloostermanRow {
            values: dft::positive_dft(&f),
            error_bound: dft::entry_error_bound(modulus as usize, phi.sqrt(), phi * EXP_ERROR),
        }
    } else {
        let table = RootTable::new(q);
        let mut err: f64 = 0.0;
        let values = (0..q.get() as i64)
            .map(|m| {
                let r = kloosterman_with(q, Some(&table), m, n);
                err = err.max(r.error_bound);
                r.value
            })
            .collect();
        KloostermanRow {
            values,
            error_bound: err,
        }
    }
}

/// Upper bound for `max |K_q(m, n)|` over units `m` and `1 <= n < q`.
///
/// For a unit `m` the substitution `x -> m^{-1} x` gives
/// `K_q(m, n) = K_q(1, mn)`, so one row suffices. The returned value already
/// includes the row's error bound.
pub fn max_abs_kloosterman(q: &Modulus) -> f64 {
    let row = kloosterman_row(q, 1, RowMethod::Auto);
    let max = row.values[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    max + row.error_bound
}

/// `|K_p(m, n)| / (2 sqrt p)` for prime `p` and units `m`, `n`.
pub fn weil_ratio(q: &Modulus, m: i64, n: i64) -> Result<f64> {
    if !q.is_prime() {
        return Err(Error::DomainRestriction(format!(
            "the 2 sqrt(p) normalization is only asserted for prime moduli, {} is composite",
            q.get()
        )));
    }
    if !q.is_unit(m) || !q.is_unit(n) {
        return Err(Error::DomainRestriction(format!(
            "m = {m} and n = {n} must both be units modulo {}",
            q.get()
        )));
    }
    Ok(kloosterman(q, m, n).abs() / (2.0 * (q.get() as f64).sqrt()))
}

/// A Dirichlet character modulo `q`, stored as exponents against the
/// generators of [`crate::modmath::UnitGroupStructure`]: the character sends
/// the j-th generator to `exp(2 pi i a_j / ord_j)`.
#[derive(Clone)]
pub struct DirichletCharacter {
    modulus: Modulus,
    exponents: Vec<u64>,
    conductor: u64,
    // a_j * (E / ord_j) mod E, with E the group exponent
    weights: Vec<u64>,
    period: u64,
}

impl DirichletCharacter {
    pub fn new(modulus: &Modulus, exponents: Vec<u64>) -> Result<Self> {
        let ug = modulus.unit_group();
        if exponents.len() != ug.rank() {
            return Err(Error::InvalidInput(format!(
                "character mod {} needs {} exponents, got {}",
                modulus.get(),
                ug.rank(),
                exponents.len()
            )));
        }
        for (a, ord) in exponents.iter().zip(ug.orders()) {
            if *a >= ord {
                return Err(Error::InvalidInput(format!(
                    "exponent {a} out of range for generator of order {ord}"
                )));
            }
        }
        let period = ug.exponent();
        let weights = exponents
            .iter()
            .zip(ug.orders())
            .map(|(&a, ord)| a * (period / ord) % period)
            .collect();
        let mut chi = DirichletCharacter {
            modulus: modulus.clone(),
            exponents,
            conductor: 0,
            weights,
            period,
        };
        chi.conductor = chi.compute_conductor();
        Ok(chi)
    }

    pub fn principal(modulus: &Modulus) -> Self {
        let rank = modulus.unit_group().rank();
        DirichletCharacter::new(modulus, vec![0; rank]).expect("zero exponents are valid")
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus.get()
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    /// Values are `period`-th roots of unity.
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn conj(&self) -> Self {
        let exps = self
            .exponents
            .iter()
            .zip(self.modulus.unit_group().orders())
            .map(|(&a, ord)| (ord - a) % ord)
            .collect();
        DirichletCharacter::new(&self.modulus, exps).expect("negated exponents stay in range")
    }

    /// `chi(x) = exp(2 pi i phase / period)`; `None` when `x` is not a unit.
    pub fn phase(&self, x: i64) -> Option<u64> {
        let mut buf = Vec::with_capacity(self.weights.len());
        self.modulus
            .unit_group()
            .exponents_into(self.modulus.reduce(x), &mut buf)
            .then(|| self.phase_from_exponents(&buf))
    }

    /// Phase for a unit whose exponent tuple is already known.
    #[inline]
    pub fn phase_from_exponents(&self, exps: &[u64]) -> u64 {
        let p = self.period as u128;
        (self
            .weights
            .iter()
            .zip(exps)
            .map(|(&w, &k)| w as u128 * k as u128 % p)
            .sum::<u128>()
            % p) as u64
    }

    pub fn eval(&self, x: i64) -> Complex64 {
        match self.phase(x) {
            Some(ph) => unit_root(ph as i128, self.period),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Smallest `d | q` such that `chi` is trivial on units `x = 1 mod d`,
    /// assembled prime power by prime power.
    fn compute_conductor(&self) -> u64 {
        let ug = self.modulus.unit_group();
        let mut conductor = 1u64;
        let mut offset = 0usize;
        let mut buf = Vec::new();
        for comp in &ug.components {
            let rank = comp.orders.len();
            let w = &self.weights[offset..offset + rank];
            let exps = &self.exponents[offset..offset + rank];
            offset += rank;
            if exps.iter().all(|&a| a == 0) {
                continue;
            }
            let pe = comp.modulus_part;
            let trivial_above = |pk: u64, buf: &mut Vec<u64>| {
                (0..pe / pk).all(|t| {
                    buf.clear();
                    comp.exponents(1 + t * pk, buf);
                    w.iter()
                        .zip(buf.iter())
                        .map(|(&wi, &k)| wi as u128 * k as u128)
                        .sum::<u128>()
                        % self.period as u128
                        == 0
                })
            };
            let mut pk = comp.prime;
            while pk < pe && !trivial_above(pk, &mut buf) {
                pk *= comp.prime;
            }
            conductor *= pk;
        }
        conductor
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl Hash for DirichletCharacter {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.modulus.hash(state);
        self.exponents.hash(state);
    }
}

impl PartialOrd for DirichletCharacter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DirichletCharacter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.modulus.get(), &self.exponents).cmp(&(other.modulus.get(), &other.exponents))
    }
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chi[q={}, exps={:?}, cond={}]",
            self.modulus.get(),
            self.exponents,
            self.conductor
        )
    }
}

/// Iterator over all characters mod `q`, exponent tuples in mixed-radix
/// order with the first exponent varying fastest.
pub struct Characters {
    modulus: Modulus,
    orders: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for Characters {
    type Item = DirichletCharacter;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = 0;
        while i < succ.len() {
            succ[i] += 1;
            if succ[i] < self.orders[i] {
                break;
            }
            succ[i] = 0;
            i += 1;
        }
        if i < succ.len() {
            self.next = Some(succ);
        }
        Some(DirichletCharacter::new(&self.modulus, current).expect("tuple within orders"))
    }
}

pub fn characters(q: &Modulus) -> Characters {
    let orders: Vec<u64> = q.unit_group().orders().collect();
    Characters {
        modulus: q.clone(),
        next: Some(vec![0; orders.len()]),
        orders,
    }
}

pub fn primitive_characters(q: &Modulus) -> impl Iterator<Item = DirichletCharacter> {
    characters(q).filter(DirichletCharacter::is_primitive)
}

pub fn char_eval(chi: &DirichletCharacter, x: i64) -> Complex64 {
    chi.eval(x)
}

/// `G_q(chi, n) = sum over units x of chi(x) e_q(n x)`, evaluated directly.
///
/// Each summand is a single root of unity of order `lcm(period, q)` with an
/// exactly computed phase.
pub fn gauss(q: &Modulus, chi: &DirichletCharacter, n: i64) -> Result<SumResult> {
    q.ensure_same(chi.modulus())?;
    let modulus = q.get();
    let den = lcm(chi.period(), modulus) as u128;
    let (scale_chi, scale_add) = (den / chi.period() as u128, den / modulus as u128);
    let nr = q.reduce(n) as u128;
    let ug = q.unit_group();
    let mut buf = Vec::with_capacity(ug.rank());
    let mut acc = SumAccumulator::new();
    for x in q.units() {
        ug.exponents_into(x, &mut buf);
        let ph = chi.phase_from_exponents(&buf) as u128;
        let add = nr * x as u128 % modulus as u128;
        let z = (ph * scale_chi + add * scale_add) % den;
        acc.add(unit_root(z as i128, den as u64), EXP_ERROR);
    }
    Ok(acc.finish())
}

/// Number of primitive characters mod `q`, from the multiplicative formula.
pub fn primitive_count(q: &Modulus) -> u64 {
    q.factors()
        .iter()
        .map(|&(p, e)| match e {
            1 => p - 2,
            _ => p.pow(e - 2) * (p - 1) * (p - 1),
        })
        .product()
}

/// True when `x` and `q` are coprime.
pub fn coprime(x: i64, q: &Modulus) -> bool {
    gcd(q.reduce(x), q.get()) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::eq_exp;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    /// Plain loop over every residue, no inverse table, no compensation.
    fn kloosterman_oracle(q: u64, a: i64, b: i64) -> Complex64 {
        let md = m(q);
        let mut s = Complex64::new(0.0, 0.0);
        for x in 1..q {
            if gcd(x, q) != 1 {
                continue;
            }
            let xi = (1..q).find(|y| (x * y) % q == 1).unwrap();
            s += eq_exp(a * x as i64 + b * xi as i64, &md);
        }
        s
    }

    #[test]
    fn kloosterman_examples() {
        let k = kloosterman(&m(3), 1, 1);
        assert!((k.value - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let k = kloosterman(&m(3), 1, 2);
        assert!((k.value - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let k = kloosterman(&m(5), 1, 1);
        let expected = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((k.value.re - expected).abs() < 1e-12);
        assert!((k.value.re - 0.381_966_0).abs() < 1e-7);
    }

    #[test]
    fn kloosterman_is_real_and_matches_oracle() {
        for q in 2..60u64 {
            let md = m(q);
            for a in -3..(q as i64 + 2) {
                for b in [0i64, 1, 2, 5, -7] {
                    let r = kloosterman(&md, a, b);
                    assert!(r.value.im.abs() <= r.error_bound, "q={q}");
                    assert!((r.value - kloosterman_oracle(q, a, b)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn symmetry_in_m_and_n() {
        for q in 2..=200u64 {
            let md = m(q);
            for a in 0..q as i64 {
                let b = (a * 7 + 3) % q as i64;
                let x = kloosterman(&md, a, b);
                let y = kloosterman(&md, b, a);
                assert!(x.agrees_with(&y));
            }
        }
    }

    #[test]
    fn row_examples_and_consistency() {
        let row = kloosterman_row(&m(3), 1, RowMethod::Fft);
        assert!((row.values[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let row = kloosterman_row(&m(5), 1, RowMethod::Fft);
        assert!((row.values[1].re - 0.381_966_0).abs() < 1e-7);
        let row = kloosterman_row(&m(4), 1, RowMethod::Direct);
        assert!(row.values[0].norm() < 1e-12);

        for q in (2..=512u64).step_by(7).chain([509, 510, 511, 512]) {
            let md = m(q);
            let tol = q as f64 * 2f64.powi(-45);
            for n in [1i64, 2, q as i64 - 1] {
                let fast = kloosterman_row(&md, n, RowMethod::Fft);
                let slow = kloosterman_row(&md, n, RowMethod::Direct);
                assert!(fast.error_bound <= tol);
                for a in 0..q as usize {
                    let direct = kloosterman(&md, a as i64, n).value;
                    assert!((fast.values[a] - direct).norm() <= tol, "q={q} n={n} m={a}");
                    assert_eq!(slow.values[a], direct);
                }
            }
        }
    }

    #[test]
    fn weil_ratio_examples() {
        let r = weil_ratio(&m(5), 1, 1).unwrap();
        assert!((r - 0.381_966_0 / (2.0 * 5f64.sqrt())).abs() < 1e-7);
        assert!((r - 0.0854).abs() < 1e-4);
        let r = weil_ratio(&m(3), 1, 2).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            weil_ratio(&m(4), 1, 1),
            Err(Error::DomainRestriction(_))
        ));
        assert!(matches!(
            weil_ratio(&m(5), 0, 1),
            Err(Error::DomainRestriction(_))
        ));
    }

    #[test]
    fn character_counts() {
        let q5 = m(5);
        assert_eq!(characters(&q5).count(), 4);
        assert_eq!(primitive_characters(&q5).count(), 3);
        let q3 = m(3);
        assert_eq!(characters(&q3).count(), 2);
        assert_eq!(primitive_characters(&q3).count(), 1);
        assert_eq!(characters(&m(8)).count(), 4);
        for q in 2..=300u64 {
            let md = m(q);
            let all: Vec<_> = characters(&md).collect();
            assert_eq!(all.len() as u64, md.phi());
            let prim = all.iter().filter(|c| c.is_primitive()).count() as u64;
            assert_eq!(prim, primitive_count(&md), "q={q}");
        }
    }

    /// Conductor by brute force over every divisor of q.
    fn conductor_oracle(chi: &DirichletCharacter) -> u64 {
        let q = chi.modulus().get();
        (1..=q)
            .filter(|d| q.is_multiple_of(*d))
            .find(|&d| {
                (1..q)
                    .filter(|&x| gcd(x, q) == 1 && x % d == 1 % d)
                    .all(|x| chi.phase(x as i64) == Some(0))
            })
            .unwrap()
    }

    #[test]
    fn conductor_matches_divisor_search() {
        for q in 2..=120u64 {
            for chi in characters(&m(q)) {
                assert_eq!(chi.conductor(), conductor_oracle(&chi), "{chi:?}");
            }
        }
    }

    #[test]
    fn character_values() {
        let q5 = m(5);
        let principal = DirichletCharacter::principal(&q5);
        assert_eq!(char_eval(&principal, 3), Complex64::new(1.0, 0.0));
        let quad = DirichletCharacter::new(&q5, vec![2]).unwrap();
        assert!((char_eval(&quad, 2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        for q in 2..=60u64 {
            let md = m(q);
            for chi in characters(&md) {
                assert_eq!(chi.eval(1), Complex64::new(1.0, 0.0));
                for x in 0..q as i64 {
                    if !md.is_unit(x) {
                        assert_eq!(chi.eval(x), Complex64::new(0.0, 0.0));
                        continue;
                    }
                    for y in 1..q as i64 {
                        let lhs = chi.eval(x * y);
                        let rhs = chi.eval(x) * chi.eval(y);
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
        assert!(DirichletCharacter::new(&q5, vec![4]).is_err());
        assert!(DirichletCharacter::new(&q5, vec![1, 1]).is_err());
    }

    #[test]
    fn character_orthogonality() {
        for q in 2..=200u64 {
            let md = m(q);
            let chars: Vec<_> = characters(&md).collect();
            let xs: Vec<i64> = (0..q as i64).step_by(((q / 12) as usize).max(1)).collect();
            for &x in &xs {
                for &y in &xs {
                    let s: Complex64 = chars.iter().map(|c| c.eval(x) * c.eval(y).conj()).sum();
                    let expected = if x == y && md.is_unit(x) {
                        md.phi() as f64
                    } else {
                        0.0
                    };
                    assert!(
                        (s - Complex64::new(expected, 0.0)).norm() < 1e-9,
                        "q={q} x={x} y={y}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_examples() {
        let q5 = m(5);
        let quad = DirichletCharacter::new(&q5, vec![2]).unwrap();
        let g = gauss(&q5, &quad, 1).unwrap();
        assert!((g.value - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let q3 = m(3);
        let nontrivial = DirichletCharacter::new(&q3, vec![1]).unwrap();
        let g = gauss(&q3, &nontrivial, 1).unwrap();
        assert!((g.value - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        let g = gauss(&q5, &DirichletCharacter::principal(&q5), 5).unwrap();
        assert!((g.value - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gauss_twisting_identity() {
        for q in 3..=150u64 {
            let md = m(q);
            for chi in primitive_characters(&md) {
                let g1 = gauss(&md, &chi, 1).unwrap();
                for n in md.units().take(6) {
                    let g = gauss(&md, &chi, n as i64).unwrap();
                    let twisted = g1.value * chi.eval(n as i64).conj();
                    assert!((g.value - twisted).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gauss_rejects_foreign_character() {
        let chi = DirichletCharacter::principal(&m(5));
        assert!(matches!(
            gauss(&m(7), &chi, 1),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn max_abs_kloosterman_small() {
        assert!((max_abs_kloosterman(&m(3)) - 2.0).abs() < 1e-12);
        for q in [7u64, 30, 97, 600] {
            let md = m(q);
            let bound = max_abs_kloosterman(&md);
            for a in md.units() {
                for b in 1..q as i64 {
                    assert!(kloosterman(&md, a as i64, b).abs() <= bound + 1e-12);
                }
            }
        }
    }
}
