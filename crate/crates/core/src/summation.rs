//! Error-tracked complex summation.
//!
//! Every sum in the crate goes through [`SumAccumulator`], which performs
//! Neumaier-compensated addition on both components and keeps a running
//! rounding budget. The reported bound is
//!
//! ```text
//! error_bound = sum_i term_err_i + 2 * terms * eps * max_k |partial_k|
//! ```
//!
//! where `term_err_i` is the caller-supplied error of the i-th summand and the
//! second part is the first-order bound for recursive summation (doubled to
//! absorb higher-order terms). Compensation only makes the actual error
//! smaller.

use num_complex::Complex64;

/// A computed sum together with its rounding budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumResult {
    pub value: Complex64,
    pub error_bound: f64,
    pub terms: u64,
}

impl SumResult {
    pub fn zero() -> Self {
        SumResult {
            value: Complex64::new(0.0, 0.0),
            error_bound: 0.0,
            terms: 0,
        }
    }

    pub fn exact(value: Complex64) -> Self {
        SumResult {
            value,
            error_bound: 0.0,
            terms: 1,
        }
    }

    /// True when `self` and `other` can denote the same exact value.
    pub fn agrees_with(&self, other: &SumResult) -> bool {
        (self.value - other.value).norm() <= self.error_bound + other.error_bound
    }

    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    /// Multiply by an exactly known scalar.
    pub fn scale(&self, c: Complex64) -> SumResult {
        let v = self.value * c;
        SumResult {
            value: v,
            error_bound: self.error_bound * c.norm() + 2.0 * f64::EPSILON * v.norm(),
            terms: self.terms,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug, Default)]
pub struct SumAccumulator {
    re: Neumaier,
    im: Neumaier,
    terms: u64,
    max_partial: f64,
    term_error: f64,
}

impl SumAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a summand known to within `term_err` of its exact value.
    #[inline]
    pub fn add(&mut self, term: Complex64, term_err: f64) {
        self.re.add(term.re);
        self.im.add(term.im);
        self.terms += 1;
        self.term_error += term_err;
        let partial = self.re.sum.hypot(self.im.sum).max(term.norm());
        if partial > self.max_partial {
            self.max_partial = partial;
        }
    }

    /// Fold in a sub-result as a single summand.
    pub fn add_result(&mut self, r: &SumResult) {
        self.add(r.value, r.error_bound);
        self.terms += r.terms.saturating_sub(1);
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn finish(self) -> SumResult {
        if self.terms == 0 {
            return SumResult::zero();
        }
        let value = Complex64::new(self.re.value(), self.im.value());
        let rounding = 2.0 * self.terms as f64 * f64::EPSILON * self.max_partial.max(value.norm());
        SumResult {
            value,
            error_bound: self.term_error + rounding,
            terms: self.terms,
        }
    }
}

/// Error of the product `a * b` given the errors of each factor.
#[inline]
pub fn product_error(a: Complex64, a_err: f64, b: Complex64, b_err: f64) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    na * b_err + nb * a_err + a_err * b_err + 4.0 * f64::EPSILON * na * nb
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = SumAccumulator::new();
        acc.add(Complex64::new(1e16, 0.0), 0.0);
        for _ in 0..1000 {
            acc.add(Complex64::new(1.0, 0.0), 0.0);
        }
        acc.add(Complex64::new(-1e16, 0.0), 0.0);
        let r = acc.finish();
        assert_eq!(r.value.re, 1000.0);
        assert_eq!(r.terms, 1002);
    }

    #[test]
    fn bound_dominates_terms_eps_max_partial() {
        let mut acc = SumAccumulator::new();
        let mut max_partial: f64 = 0.0;
        let mut naive = Complex64::new(0.0, 0.0);
        for k in 0..5000 {
            let t = Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos());
            naive += t;
            max_partial = max_partial.max(naive.norm());
            acc.add(t, 0.0);
        }
        let r = acc.finish();
        assert!(r.error_bound >= r.terms as f64 * f64::EPSILON * max_partial * 0.99);
    }

    #[test]
    fn empty_is_exact_zero() {
        let r = SumAccumulator::new().finish();
        assert_eq!(r, SumResult::zero());
    }
}
