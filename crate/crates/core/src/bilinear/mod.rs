//! Weighted bilinear forms with Kloosterman and Gauss sums.
//!
//! `S_q(A; J) = sum_m sum_{n in J} alpha_m K_q(m, n)` can be evaluated three
//! ways:
//!
//! * [`Method::Naive`] sums Kloosterman sums over the `(m, n)` grid. It is
//!   capped at [`NAIVE_CAP`] root evaluations and exists as an oracle.
//! * [`Method::Transformed`] swaps the order of summation:
//!   `S = sum_{x unit} (sum_m alpha_m e_q(m x^{-1})) gamma_x` with
//!   `gamma_x = sum_{n in J} e_q(n x)` in closed form.
//! * [`Method::Fast`] gets every inner `m`-sum from one length-`q` DFT of the
//!   weights and then reads it off at `x^{-1}`.
//!
//! All three report a rounding budget and agree within the sum of budgets.

mod dyadic;
mod moment;
mod weights;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::expsums::{gauss, kloosterman_with};
use crate::modmath::{pow_mod, sin_pi_ratio, unit_root, Modulus, RootTable, EXP_ERROR};
use crate::summation::{product_error, SumAccumulator, SumResult};

pub use dyadic::{
    dyadic_count, dyadic_partial_sums, dyadic_partition, DyadicSet, Sign, GAMMA_DYADIC_CONSTANT,
};
pub use moment::{
    moment_check, moment_check_with, MomentCheck, MomentMethod, CONVOLUTION_WORK_CAP,
    EXHAUSTIVE_TUPLE_CAP,
};
pub use weights::{
    derive_seed, first_units, generate, generated_weights, CharWeightVector, Norms, WeightKind,
    WeightVector,
};

/// Cap on `M * N * phi(q)` for the naive paths.
pub const NAIVE_CAP: u128 = 1_000_000_000;

/// The block `J = {L+1, ..., L+N}` inside `[1, q-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    modulus: Modulus,
    start: u64,
    len: u64,
}

impl Interval {
    /// `start` is `L`, `len` is `N`.
    pub fn new(modulus: &Modulus, start: u64, len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidInput("interval length N must be >= 1".into()));
        }
        match start.checked_add(len) {
            Some(end) if end < modulus.get() => Ok(Interval {
                modulus: modulus.clone(),
                start,
                len,
            }),
            _ => Err(Error::InvalidInput(format!(
                "interval {{{}, ..., {}}} does not fit in [1, {}]",
                start as u128 + 1,
                start as u128 + len as u128,
                modulus.get() - 1
            ))),
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.start + 1..=self.start + self.len
    }
}

/// Absolute error budget of [`gamma_sum`] for an interval of length `n`.
pub fn gamma_error_bound(n: u64) -> f64 {
    32.0 * f64::EPSILON * n as f64
}

/// `gamma_x = sum_{n in J} e_q(n x)` in closed form,
/// `e_{2q}((2L + N + 1) x) * sin(pi N x / q) / sin(pi x / q)`.
pub fn gamma_sum(j: &Interval, x: i64) -> Result<Complex64> {
    let q = j.modulus();
    let xr = q.reduce(x);
    if xr == 0 {
        return Err(Error::DomainRestriction(format!(
            "gamma_x is only defined for x not divisible by q = {}",
            q.get()
        )));
    }
    Ok(gamma_reduced(q.get(), j.start, j.len, xr))
}

#[inline]
fn gamma_reduced(q: u64, start: u64, len: u64, x: u64) -> Complex64 {
    let ratio = sin_pi_ratio(len as i128 * x as i128, q) / sin_pi_ratio(x as i128, q);
    let phase = unit_root((2 * start as i128 + len as i128 + 1) * x as i128, 2 * q);
    phase * ratio
}

/// `gamma_x` for every residue, with `gamma_0 = N`.
pub(crate) fn gamma_table(j: &Interval) -> Vec<Complex64> {
    let q = j.modulus().get();
    let mut out = Vec::with_capacity(q as usize);
    out.push(Complex64::new(j.len as f64, 0.0));
    out.extend((1..q).map(|x| gamma_reduced(q, j.start, j.len, x)));
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Transformed,
    #[default]
    Fast,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Transformed => "transformed",
            Method::Fast => "fast",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Method::Naive),
            "transformed" => Ok(Method::Transformed),
            "fast" => Ok(Method::Fast),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected naive, transformed or fast)"
            ))),
        }
    }
}

fn check_naive_cap(support: usize, n: u64, phi: u64) -> Result<()> {
    let work = support as u128 * n as u128 * phi as u128;
    if work > NAIVE_CAP {
        return Err(Error::ResourceLimit {
            what: "naive bilinear evaluation (M * N * phi(q))",
            requested: work,
            cap: NAIVE_CAP,
        });
    }
    Ok(())
}

/// `S_q(A; J)` by the requested method.
pub fn bilinear_kloosterman(a: &WeightVector, j: &Interval, method: Method) -> Result<SumResult> {
    a.modulus().ensure_same(j.modulus())?;
    if a.is_empty() {
        return Ok(SumResult::zero());
    }
    match method {
        Method::Naive => naive_kloosterman(a, j),
        Method::Transformed => transformed_generalized(a, j, 1),
        Method::Fast => fast_kloosterman(a, j),
    }
}

fn naive_kloosterman(a: &WeightVector, j: &Interval) -> Result<SumResult> {
    let q = a.modulus();
    check_naive_cap(a.len(), j.len(), q.phi())?;
    let table = RootTable::new(q);
    let mut acc = SumAccumulator::new();
    for (m, alpha) in a.entries() {
        for n in j.iter() {
            let k = kloosterman_with(q, Some(&table), m as i64, n as i64);
            acc.add(
                alpha * k.value,
                product_error(alpha, 0.0, k.value, k.error_bound),
            );
        }
    }
    Ok(acc.finish())
}

fn fast_kloosterman(a: &WeightVector, j: &Interval) -> Result<SumResult> {
    let q = a.modulus();
    let inner = dft::positive_dft(&a.dense());
    let inner_err = dft::entry_error_bound(q.get() as usize, a.norm2(), 0.0);
    let gam = gamma_table(j);
    let gam_err = gamma_error_bound(j.len());
    let inv = q.inverse_table();
    let mut acc = SumAccumulator::new();
    for x in q.units() {
        let s = inner[inv[x as usize] as usize];
        let g = gam[x as usize];
        acc.add(s * g, product_error(s, inner_err, g, gam_err));
    }
    Ok(acc.finish())
}

/// `sum_{x unit} (sum_m alpha_m e_q(m x^{-k})) gamma_x`.
fn transformed_generalized(a: &WeightVector, j: &Interval, k: u64) -> Result<SumResult> {
    let q = a.modulus();
    let modulus = q.get();
    let table = RootTable::new(q);
    let gam = gamma_table(j);
    let gam_err = gamma_error_bound(j.len());
    let inv = q.inverse_table();
    let weights: Vec<(u64, Complex64)> = a.entries().collect();
    let mut acc = SumAccumulator::new();
    for x in q.units() {
        let y = pow_mod(inv[x as usize], k, modulus) as u128;
        let mut inner = SumAccumulator::new();
        for &(m, alpha) in &weights {
            let z = (m as u128 * y % modulus as u128) as u64;
            let term = alpha * table.at(z);
            inner.add(
                term,
                alpha.norm() * EXP_ERROR + 2.0 * f64::EPSILON * term.norm(),
            );
        }
        let s = inner.finish();
        let g = gam[x as usize];
        acc.add(
            s.value * g,
            product_error(s.value, s.error_bound, g, gam_err),
        );
    }
    Ok(acc.finish())
}

/// `S_{k,q}(A; J)` with kernel `e_q(m x^{-k} + n x)`, via the transformed path.
pub fn bilinear_generalized(a: &WeightVector, j: &Interval, k: i64) -> Result<SumResult> {
    a.modulus().ensure_same(j.modulus())?;
    if k < 1 {
        return Err(Error::InvalidInput(format!("k must be >= 1, got {k}")));
    }
    if a.is_empty() {
        return Ok(SumResult::zero());
    }
    transformed_generalized(a, j, k as u64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GaussMethod {
    Naive,
    #[default]
    Transformed,
}

/// `T_q(W; J) = sum_chi sum_{n in J} omega_chi G_q(chi, n)`.
pub fn bilinear_gauss(
    w: &CharWeightVector,
    j: &Interval,
    method: GaussMethod,
) -> Result<SumResult> {
    let q = w.modulus();
    q.ensure_same(j.modulus())?;
    if w.is_empty() {
        return Ok(SumResult::zero());
    }
    match method {
        GaussMethod::Naive => {
            check_naive_cap(w.len(), j.len(), q.phi())?;
            let mut acc = SumAccumulator::new();
            for (chi, omega) in w.entries() {
                for n in j.iter() {
                    let g = gauss(q, chi, n as i64)?;
                    acc.add(
                        omega * g.value,
                        product_error(omega, 0.0, g.value, g.error_bound),
                    );
                }
            }
            Ok(acc.finish())
        }
        GaussMethod::Transformed => {
            let gam = gamma_table(j);
            let gam_err = gamma_error_bound(j.len());
            let ug = q.unit_group();
            let mut buf = Vec::with_capacity(ug.rank());
            let mut acc = SumAccumulator::new();
            for x in q.units() {
                ug.exponents_into(x, &mut buf);
                let mut inner = SumAccumulator::new();
                for (chi, omega) in w.entries() {
                    let term =
                        omega * unit_root(chi.phase_from_exponents(&buf) as i128, chi.period());
                    inner.add(
                        term,
                        omega.norm() * EXP_ERROR + 2.0 * f64::EPSILON * term.norm(),
                    );
                }
                let s = inner.finish();
                let g = gam[x as usize];
                acc.add(
                    s.value * g,
                    product_error(s.value, s.error_bound, g, gam_err),
                );
            }
            Ok(acc.finish())
        }
    }
}
