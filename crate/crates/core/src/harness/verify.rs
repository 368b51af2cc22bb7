//! A quick self-check over small parameters, run by `klsums verify`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::experiment::{run_experiment, Experiment};
use super::region::{improvement_region, RegionClass, REGION_VERTICES};
use crate::bilinear::{
    bilinear_kloosterman, dyadic_partial_sums, dyadic_partition, generated_weights, moment_check,
    Interval, Method, WeightKind,
};
use crate::counting::{congruence, CountKind, CountMethod};
use crate::error::Result;
use crate::expsums::{gauss, kloosterman, primitive_characters};
use crate::modmath::{gcd, Modulus};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn primes_up_to(n: u64) -> impl Iterator<Item = u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_verify() -> Vec<Check> {
    vec![
        check("twist identity", || {
            let mut worst = 0.0f64;
            for p in primes_up_to(31) {
                let q = Modulus::new(p)?;
                for m in 1..p as i64 {
                    for n in 1..p as i64 {
                        let d =
                            (kloosterman(&q, m * n, 1).value - kloosterman(&q, m, n).value).norm();
                        worst = worst.max(d);
                    }
                }
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:.3e}")))
        }),
        check("weil bound", || {
            let mut worst = 0.0f64;
            for p in primes_up_to(97) {
                let q = Modulus::new(p)?;
                for n in 1..p as i64 {
                    worst = worst.max(kloosterman(&q, 1, n).abs() / (2.0 * (p as f64).sqrt()));
                }
            }
            Ok((
                worst <= 1.0 + 1e-6,
                format!("max |K|/(2 sqrt p) {worst:.6}"),
            ))
        }),
        check("gauss modulus", || {
            let mut worst = 0.0f64;
            for qv in 3..=40u64 {
                let q = Modulus::new(qv)?;
                for chi in primitive_characters(&q) {
                    for n in q.units() {
                        let g = gauss(&q, &chi, n as i64)?;
                        worst = worst.max((g.abs() - (qv as f64).sqrt()).abs());
                    }
                }
            }
            Ok((worst <= 1e-8, format!("max ||G| - sqrt q| {worst:.3e}")))
        }),
        check("path equivalence", || {
            let mut ok = true;
            for (i, qv) in [3u64, 64, 101, 360, 997].into_iter().enumerate() {
                let q = Modulus::new(qv)?;
                let a =
                    generated_weights(&q, (q.phi() as usize).min(12), WeightKind::Unit, i as u64)?;
                let j = Interval::new(&q, 1, (qv / 3).max(1))?;
                let r: Vec<_> = [Method::Naive, Method::Transformed, Method::Fast]
                    .into_iter()
                    .map(|m| bilinear_kloosterman(&a, &j, m))
                    .collect::<Result<_>>()?;
                ok &= r[0].agrees_with(&r[1]) && r[0].agrees_with(&r[2]);
            }
            let exp = Experiment::kloosterman(3, None, 2, 0, WeightKind::Const, 0)
                .with_methods(vec![Method::Naive, Method::Transformed, Method::Fast]);
            let s = run_experiment(&exp)?[0].abs_sum;
            ok &= (s - 2.0).abs() < 1e-12;
            Ok((ok, "naive, transformed and fast agree".into()))
        }),
        check("moment identity", || {
            let mut worst = 0.0f64;
            for qv in [7u64, 13, 30] {
                let q = Modulus::new(qv)?;
                let gamma: BTreeMap<i64, Complex64> = q
                    .units()
                    .take(4)
                    .enumerate()
                    .map(|(i, x)| (x as i64, Complex64::new(1.0, i as f64)))
                    .collect();
                for r in 1..=2 {
                    worst = worst.max(moment_check(&q, &gamma, r)?.relative_gap());
                }
            }
            Ok((worst <= 1e-6, format!("max relative gap {worst:.3e}")))
        }),
        check("counting paths", || {
            let mut ok = true;
            for qv in [5u64, 12, 17] {
                let q = Modulus::new(qv)?;
                for k in 1..=qv.min(6) {
                    for kind in [CountKind::Reciprocal, CountKind::Product] {
                        let a = congruence(&q, k, 2, CountMethod::Convolution, kind)?;
                        let b = congruence(&q, k, 2, CountMethod::Exhaustive, kind)?;
                        ok &= a == b;
                    }
                }
            }
            let q5 = Modulus::new(5)?;
            ok &= congruence(&q5, 2, 2, CountMethod::Convolution, CountKind::Reciprocal)? == 6;
            Ok((ok, "convolution matches enumeration".into()))
        }),
        check("dyadic partition", || {
            let mut ok = true;
            for qv in [50u64, 101, 360] {
                let q = Modulus::new(qv)?;
                let n = qv / 4;
                let mut hits = vec![0u32; qv as usize];
                for set in dyadic_partition(&q, n)? {
                    for x in set.unit_members(&q) {
                        hits[q.reduce(x) as usize] += 1;
                    }
                }
                ok &= (0..qv).all(|x| hits[x as usize] == u32::from(gcd(x, qv) == 1));
                let a = generated_weights(&q, 8, WeightKind::Pm1, qv)?;
                let j = Interval::new(&q, 0, n)?;
                let parts = dyadic_partial_sums(&a, &j)?;
                let full = bilinear_kloosterman(&a, &j, Method::Transformed)?;
                let total: Complex64 = parts.iter().map(|(_, r)| r.value).sum();
                let err: f64 =
                    parts.iter().map(|(_, r)| r.error_bound).sum::<f64>() + full.error_bound;
                ok &= (total - full.value).norm() <= err;
            }
            Ok((ok, "units covered once, partial sums reassemble".into()))
        }),
        check("region geometry", || {
            let ok = REGION_VERTICES
                .iter()
                .all(|&(mu, nu)| improvement_region(mu, nu) == RegionClass::Boundary)
                && improvement_region(0.5, 0.5) == RegionClass::Interior
                && improvement_region(0.1, 0.1) == RegionClass::Outside;
            Ok((ok, "vertices on the boundary, (1/2, 1/2) inside".into()))
        }),
    ]
}
