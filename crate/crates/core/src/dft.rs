//! Arbitrary-length DFT used by the fast evaluation paths.
//!
//! Transforms are delegated to `rustfft`, whose planner handles every length
//! (mixed radix, Rader and Bluestein as needed). The error bound attached to
//! each output entry is the usual norm-wise FFT estimate
//!
//! ```text
//! |err_k| <= 8 * (ceil(log2 n) + 2) * eps * sqrt(n) * ||x||_2 + sum_j |dx_j|
//! ```
//!
//! where `dx_j` is the error already present in the input.
//!
//! A shared planner picks different decompositions for the same length
//! depending on what it planned before, which changes the low bits of the
//! output. Each length is therefore planned once by a fresh planner and the
//! plan is cached, so results depend only on the input.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>;

fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Plans> = OnceLock::new();
    let plans = PLANS.get_or_init(Default::default);
    if let Some(p) = plans.lock().expect("plan cache poisoned").get(&n) {
        return Arc::clone(p);
    }
    let fresh = FftPlanner::new().plan_fft_inverse(n);
    Arc::clone(
        plans
            .lock()
            .expect("plan cache poisoned")
            .entry(n)
            .or_insert(fresh),
    )
}

/// `y_k = sum_j x_j exp(+2 pi i j k / n)`, unnormalized.
pub fn positive_dft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    if buf.len() <= 1 {
        return buf;
    }
    plan(buf.len()).process(&mut buf);
    buf
}

/// Per-entry error bound for [`positive_dft`] on an input of length `n`
/// with Euclidean norm `l2` and accumulated input error `input_err`.
pub fn entry_error_bound(n: usize, l2: f64, input_err: f64) -> f64 {
    if n <= 1 {
        return input_err;
    }
    let log2 = (usize::BITS - (n - 1).leading_zeros()) as f64;
    8.0 * (log2 + 2.0) * f64::EPSILON * (n as f64).sqrt() * l2 + input_err
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::unit_root;

    fn direct(input: &[Complex64]) -> Vec<Complex64> {
        let n = input.len();
        (0..n)
            .map(|k| {
                input
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| x * unit_root((j * k) as i128, n as u64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_for_awkward_lengths() {
        for n in [1usize, 2, 3, 7, 12, 97, 101, 256, 343, 1000, 1009] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let l2 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let bound = entry_error_bound(n, l2, 0.0) + n as f64 * 32.0 * f64::EPSILON * l2;
            let fast = positive_dft(&x);
            let slow = direct(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= bound, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn output_does_not_depend_on_planning_history() {
        let x: Vec<Complex64> = (0..288)
            .map(|j| Complex64::new((j as f64).sin(), 0.5))
            .collect();
        let first = positive_dft(&x);
        for n in [2usize, 9, 32, 96, 144, 576] {
            positive_dft(&vec![Complex64::new(1.0, 0.0); n]);
        }
        let fresh = FftPlanner::new().plan_fft_inverse(288);
        let mut buf = x.clone();
        fresh.process(&mut buf);
        assert_eq!(first, positive_dft(&x));
        assert_eq!(first, buf);
    }
}
