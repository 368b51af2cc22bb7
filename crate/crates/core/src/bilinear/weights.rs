//! Weight containers and the seeded weight generators.
//!
//! Generators draw from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.3,
//! rand 0.8), which is fully specified and platform independent:
//!
//! * `const`: every weight is `1`.
//! * `pm1`: one `bool` draw per weight, `true -> +1`, `false -> -1`.
//! * `unit`: one `f64` draw `t` in `[0, 1)` per weight, giving `exp(2 pi i t)`.
//!
//! Per-modulus seeds for sweeps come from [`derive_seed`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsums::DirichletCharacter;
use crate::modmath::{gcd, Modulus};

/// `||.||_1`, `||.||_2`, `||.||_inf` and support size of a weight sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub support: u64,
}

impl Norms {
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Complex64>) -> Self {
        let mut n = Norms::default();
        let mut sq = 0.0;
        for v in values {
            let a = v.norm();
            n.l1 += a;
            sq += a * a;
            n.linf = n.linf.max(a);
            if a > 0.0 {
                n.support += 1;
            }
        }
        n.l2 = sq.sqrt();
        n
    }
}

/// Complex weights on units modulo `q`.
#[derive(Clone, Debug)]
pub struct WeightVector {
    modulus: Modulus,
    entries: BTreeMap<u64, Complex64>,
}

impl WeightVector {
    pub fn zero(modulus: &Modulus) -> Self {
        WeightVector {
            modulus: modulus.clone(),
            entries: BTreeMap::new(),
        }
    }

    /// Build from `(m, alpha_m)` pairs. Keys are reduced mod `q`; repeated
    /// keys accumulate. Non-units are rejected.
    pub fn new(
        modulus: &Modulus,
        entries: impl IntoIterator<Item = (i64, Complex64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, a) in entries {
            let r = modulus.reduce(m);
            let g = gcd(r, modulus.get());
            if g != 1 {
                return Err(Error::InvalidWeight(format!(
                    "weight at m = {m} is not supported on a unit modulo {} (gcd = {g})",
                    modulus.get()
                )));
            }
            *map.entry(r).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Ok(WeightVector {
            modulus: modulus.clone(),
            entries: map,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn get(&self, m: i64) -> Complex64 {
        self.entries
            .get(&self.modulus.reduce(m))
            .copied()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries
            .values()
            .all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn norms(&self) -> Norms {
        Norms::from_values(self.entries.values())
    }

    pub fn norm1(&self) -> f64 {
        self.norms().l1
    }

    pub fn norm2(&self) -> f64 {
        self.norms().l2
    }

    pub fn norm_inf(&self) -> f64 {
        self.norms().linf
    }

    pub fn add(&self, other: &WeightVector) -> Result<WeightVector> {
        self.modulus.ensure_same(&other.modulus)?;
        WeightVector::new(
            &self.modulus,
            self.entries()
                .chain(other.entries())
                .map(|(k, v)| (k as i64, v)),
        )
    }

    pub fn scale(&self, c: Complex64) -> WeightVector {
        WeightVector {
            modulus: self.modulus.clone(),
            entries: self.entries.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }

    /// Dense length-`q` copy, zero off the support.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.modulus.get() as usize];
        for (&k, &v) in &self.entries {
            out[k as usize] = v;
        }
        out
    }
}

/// Weights on primitive characters modulo `q`.
#[derive(Clone, Debug)]
pub struct CharWeightVector {
    modulus: Modulus,
    entries: BTreeMap<DirichletCharacter, Complex64>,
}

impl CharWeightVector {
    pub fn zero(modulus: &Modulus) -> Self {
        CharWeightVector {
            modulus: modulus.clone(),
            entries: BTreeMap::new(),
        }
    }

    // keys order by (q, exponents); the modulus caches never affect Ord
    #[allow(clippy::mutable_key_type)]
    pub fn new(
        modulus: &Modulus,
        entries: impl IntoIterator<Item = (DirichletCharacter, Complex64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (chi, w) in entries {
            modulus.ensure_same(chi.modulus())?;
            if !chi.is_primitive() {
                return Err(Error::InvalidWeight(format!(
                    "character {chi:?} is not primitive (conductor {} < {})",
                    chi.conductor(),
                    modulus.get()
                )));
            }
            *map.entry(chi).or_insert(Complex64::new(0.0, 0.0)) += w;
        }
        Ok(CharWeightVector {
            modulus: modulus.clone(),
            entries: map,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DirichletCharacter, Complex64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries
            .values()
            .all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn norms(&self) -> Norms {
        Norms::from_values(self.entries.values())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    #[default]
    Const,
    Pm1,
    Unit,
}

impl WeightKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightKind::Const => "const",
            WeightKind::Pm1 => "pm1",
            WeightKind::Unit => "unit",
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "const" => Ok(WeightKind::Const),
            "pm1" => Ok(WeightKind::Pm1),
            "unit" => Ok(WeightKind::Unit),
            other => Err(Error::InvalidInput(format!(
                "unknown weight kind '{other}' (expected const, pm1 or unit)"
            ))),
        }
    }
}

pub fn generate(kind: WeightKind, seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match kind {
            WeightKind::Const => Complex64::new(1.0, 0.0),
            WeightKind::Pm1 => {
                if rng.gen::<bool>() {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            WeightKind::Unit => {
                let t: f64 = rng.gen();
                let (s, c) = (std::f64::consts::TAU * t).sin_cos();
                Complex64::new(c, s)
            }
        })
        .collect()
}

/// Seed for modulus `q` within a sweep: `seed XOR (q * 0x9E3779B97F4A7C15)`
/// with wrapping multiplication.
pub fn derive_seed(seed: u64, q: u64) -> u64 {
    seed ^ q.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// The `count` smallest units modulo `q`.
pub fn first_units(q: &Modulus, count: usize) -> Vec<u64> {
    q.units().take(count).collect()
}

/// Weights of the given kind on the `count` smallest units.
pub fn generated_weights(
    q: &Modulus,
    count: usize,
    kind: WeightKind,
    seed: u64,
) -> Result<WeightVector> {
    let support = first_units(q, count);
    if support.len() < count {
        return Err(Error::InvalidInput(format!(
            "only {} units modulo {}, cannot place {count} weights",
            support.len(),
            q.get()
        )));
    }
    let values = generate(kind, seed, count);
    WeightVector::new(q, support.into_iter().map(|m| m as i64).zip(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsums::characters;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn rejects_non_units() {
        assert!(matches!(
            WeightVector::new(&m(10), [(4, Complex64::new(1.0, 0.0))]),
            Err(Error::InvalidWeight(_))
        ));
        let w = WeightVector::new(
            &m(10),
            [
                (13, Complex64::new(2.0, 0.0)),
                (3, Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.get(3), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn norms_examples() {
        let w = WeightVector::new(
            &m(7),
            [
                (1, Complex64::new(3.0, 4.0)),
                (2, Complex64::new(0.0, -1.0)),
                (3, Complex64::new(0.0, 0.0)),
            ],
        )
        .unwrap();
        let n = w.norms();
        assert_eq!(n.l1, 6.0);
        assert!((n.l2 - 26f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.linf, 5.0);
        assert_eq!(n.support, 2);
    }

    #[test]
    fn char_weights_reject_imprimitive() {
        let q = m(5);
        let principal = characters(&q).next().unwrap();
        assert!(matches!(
            CharWeightVector::new(&q, [(principal, Complex64::new(1.0, 0.0))]),
            Err(Error::InvalidWeight(_))
        ));
        let other = characters(&m(7)).nth(1).unwrap();
        assert!(matches!(
            CharWeightVector::new(&q, [(other, Complex64::new(1.0, 0.0))]),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn generators_are_reproducible() {
        for kind in [WeightKind::Const, WeightKind::Pm1, WeightKind::Unit] {
            let a = generate(kind, 42, 100);
            assert_eq!(a, generate(kind, 42, 100));
            for v in &a {
                assert!((v.norm() - 1.0).abs() < 1e-15);
            }
        }
        assert_ne!(
            generate(WeightKind::Pm1, 1, 64),
            generate(WeightKind::Pm1, 2, 64)
        );
        assert_eq!("pm1".parse::<WeightKind>().unwrap(), WeightKind::Pm1);
        assert!("gauss".parse::<WeightKind>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn norms_are_permutation_invariant(vals in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40), rot in 0usize..40) {
            let vals: Vec<Complex64> = vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let mut rotated = vals.clone();
            let k = rot % vals.len();
            rotated.rotate_left(k);
            let q = m(101);
            let a = WeightVector::new(&q, (1..).zip(vals.iter().copied())).unwrap().norms();
            let b = WeightVector::new(&q, (1..).zip(rotated.iter().copied())).unwrap().norms();
            proptest::prop_assert!((a.l1 - b.l1).abs() <= 1e-12 * a.l1.max(1.0));
            proptest::prop_assert!((a.l2 - b.l2).abs() <= 1e-12 * a.l2.max(1.0));
            proptest::prop_assert_eq!(a.linf, b.linf);
        }
    }
}
