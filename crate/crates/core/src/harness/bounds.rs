//! Upper bounds for the bilinear forms, with every `q^{o(1)}` factor and every
//! implied constant set to 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bilinear::Norms;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    /// `||A||_1 N max|K_q|`, or `||A||_1 N sqrt q` when no maximum is supplied.
    Trivial,
    /// `||A||_1 p`.
    Fkm,
    /// `(||A||_1 ||A||_2)^{1/2} M^{1/12} N^{7/12} p^{3/4}`, valid when
    /// `MN <= p^{3/2}` and `M <= N^2`.
    Bfkmm,
    /// `||A||_2 N^{1/2} p`.
    Shpzha,
    /// `||A||_inf min{MN p^{1/2}, Mp, M^{5/6} N^{7/12} p^{3/4}, M^{1/2} N^{1/2} p}`.
    Combined,
    /// As [`BoundName::Combined`], but the third term only counts when the
    /// side condition of [`BoundName::Bfkmm`] holds.
    CombinedCond,
    /// `(||A||_1 ||A||_2)^{1/2} (N^{1/8} q + N^{1/2} q^{3/4})`.
    Thm21,
    /// `||A||_1^{1-1/r} ||A||_2^{1/r} (q + N^{1/2} q^{1/2 + 1/(2r)}) q^eps`.
    Thm22,
    /// `(||W||_1 ||W||_2)^{1/2} (q + N^{1/2} q^{3/4})`.
    Thm23,
    /// Same shape as [`BoundName::Thm22`], for weights on characters.
    Thm24,
    /// `||A||_inf M^{3/4} (N^{1/8} q + N^{1/2} q^{3/4})`.
    Simple21,
}

impl BoundName {
    pub const ALL: [BoundName; 11] = [
        BoundName::Trivial,
        BoundName::Fkm,
        BoundName::Bfkmm,
        BoundName::Shpzha,
        BoundName::Combined,
        BoundName::CombinedCond,
        BoundName::Thm21,
        BoundName::Thm22,
        BoundName::Thm23,
        BoundName::Thm24,
        BoundName::Simple21,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::Trivial => "trivial",
            BoundName::Fkm => "fkm",
            BoundName::Bfkmm => "bfkmm",
            BoundName::Shpzha => "shpzha",
            BoundName::Combined => "combined",
            BoundName::CombinedCond => "combined_cond",
            BoundName::Thm21 => "thm21",
            BoundName::Thm22 => "thm22",
            BoundName::Thm23 => "thm23",
            BoundName::Thm24 => "thm24",
            BoundName::Simple21 => "simple21",
        }
    }

    /// Whether the formula takes `r` and `epsilon`.
    pub fn is_average(&self) -> bool {
        matches!(self, BoundName::Thm22 | BoundName::Thm24)
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown bound '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSpec {
    name: BoundName,
    average: Option<(u32, f64)>,
}

impl BoundSpec {
    /// A bound without parameters.
    pub fn new(name: BoundName) -> Result<Self> {
        if name.is_average() {
            return Err(Error::InvalidInput(format!(
                "bound {name} needs r and epsilon"
            )));
        }
        Ok(BoundSpec {
            name,
            average: None,
        })
    }

    /// `thm22` or `thm24` with `r >= 2` and `epsilon >= 0`.
    pub fn average(name: BoundName, r: u32, epsilon: f64) -> Result<Self> {
        if !name.is_average() {
            return Err(Error::InvalidInput(format!(
                "bound {name} takes no parameters"
            )));
        }
        if r < 2 {
            return Err(Error::InvalidInput(format!(
                "bound {name} needs r >= 2, got {r}"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bound {name} needs epsilon >= 0, got {epsilon}"
            )));
        }
        Ok(BoundSpec {
            name,
            average: Some((r, epsilon)),
        })
    }

    pub fn name(&self) -> BoundName {
        self.name
    }

    pub fn r(&self) -> Option<u32> {
        self.average.map(|(r, _)| r)
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.average.map(|(_, e)| e)
    }
}

/// Everything a bound formula can depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub q: u64,
    /// Support size `M`.
    pub m: u64,
    pub n: u64,
    pub norms: Norms,
    /// Pointwise maximum of the summand, for the trivial bound.
    pub max_abs: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// `MN <= p^{3/2} and M <= N^2`, reported for the bounds that involve it.
    pub condition: Option<bool>,
}

pub fn bfkmm_condition(q: u64, m: u64, n: u64) -> bool {
    let (q, m, n) = (q as f64, m as f64, n as f64);
    m * n <= q.powf(1.5) && m <= n * n
}

pub fn bound_value(spec: &BoundSpec, inputs: &BoundInputs) -> Result<BoundValue> {
    if inputs.q == 0 || inputs.n == 0 {
        return Err(Error::InvalidInput("bounds need q >= 1 and N >= 1".into()));
    }
    let q = inputs.q as f64;
    let m = inputs.m as f64;
    let n = inputs.n as f64;
    let Norms { l1, l2, linf, .. } = inputs.norms;
    let cond = bfkmm_condition(inputs.q, inputs.m, inputs.n);
    let plain = |value: f64| BoundValue {
        value,
        condition: None,
    };
    let with_cond = |value: f64| BoundValue {
        value,
        condition: Some(cond),
    };
    let thm21_shape = n.powf(0.125) * q + n.sqrt() * q.powf(0.75);
    let bfkmm_shape = m.powf(1.0 / 12.0) * n.powf(7.0 / 12.0) * q.powf(0.75);
    Ok(match spec.name {
        BoundName::Trivial => plain(l1 * n * inputs.max_abs.unwrap_or_else(|| q.sqrt())),
        BoundName::Fkm => plain(l1 * q),
        BoundName::Bfkmm => with_cond((l1 * l2).sqrt() * bfkmm_shape),
        BoundName::Shpzha => plain(l2 * n.sqrt() * q),
        BoundName::Combined | BoundName::CombinedCond => {
            let mut terms = vec![m * n * q.sqrt(), m * q, m.sqrt() * n.sqrt() * q];
            if spec.name == BoundName::Combined || cond {
                terms.push(m.powf(5.0 / 6.0) * n.powf(7.0 / 12.0) * q.powf(0.75));
            }
            with_cond(linf * terms.into_iter().fold(f64::INFINITY, f64::min))
        }
        BoundName::Thm21 => plain((l1 * l2).sqrt() * thm21_shape),
        BoundName::Simple21 => plain(linf * m.powf(0.75) * thm21_shape),
        BoundName::Thm23 => plain((l1 * l2).sqrt() * (q + n.sqrt() * q.powf(0.75))),
        BoundName::Thm22 | BoundName::Thm24 => {
            let (r, eps) = spec.average.ok_or_else(|| {
                Error::InvalidInput(format!("bound {} needs r and epsilon", spec.name))
            })?;
            let rf = r as f64;
            let weights = l1.powf(1.0 - 1.0 / rf) * l2.powf(1.0 / rf);
            plain(weights * (q + n.sqrt() * q.powf(0.5 + 0.5 / rf)) * q.powf(eps))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norms(l1: f64, l2: f64, linf: f64) -> Norms {
        Norms {
            l1,
            l2,
            linf,
            support: 0,
        }
    }

    fn inputs(q: u64, m: u64, n: u64, nm: Norms) -> BoundInputs {
        BoundInputs {
            q,
            m,
            n,
            norms: nm,
            max_abs: None,
        }
    }

    fn all_specs() -> Vec<BoundSpec> {
        BoundName::ALL
            .into_iter()
            .map(|b| {
                if b.is_average() {
                    BoundSpec::average(b, 3, 0.1).unwrap()
                } else {
                    BoundSpec::new(b).unwrap()
                }
            })
            .collect()
    }

    #[test]
    fn worked_examples() {
        let inp = inputs(10_000, 100, 100, norms(100.0, 10.0, 1.0));
        let v = bound_value(&BoundSpec::new(BoundName::Thm21).unwrap(), &inp)
            .unwrap()
            .value;
        let expected = 1000f64.sqrt() * (10f64.powf(0.25) * 1e4 + 1e4);
        assert!((v - expected).abs() < 1e-6 * expected);
        assert!((v - 8.786e5).abs() < 1e3);

        let v = bound_value(&BoundSpec::new(BoundName::Shpzha).unwrap(), &inp)
            .unwrap()
            .value;
        assert!((v - 1e6).abs() < 1e-6);

        let mut inp = inputs(3, 1, 1, norms(1.0, 1.0, 1.0));
        inp.max_abs = Some(2.0);
        let v = bound_value(&BoundSpec::new(BoundName::Trivial).unwrap(), &inp)
            .unwrap()
            .value;
        assert_eq!(v, 2.0);
    }

    #[test]
    fn parameters_checked() {
        assert!(BoundSpec::new(BoundName::Thm22).is_err());
        assert!(BoundSpec::average(BoundName::Thm22, 1, 0.1).is_err());
        assert!(BoundSpec::average(BoundName::Thm24, 2, -0.1).is_err());
        assert!(BoundSpec::average(BoundName::Thm21, 2, 0.1).is_err());
        assert!(BoundSpec::average(BoundName::Thm24, 2, 0.0).is_ok());
        assert_eq!(
            "combined_cond".parse::<BoundName>().unwrap(),
            BoundName::CombinedCond
        );
        assert!("thm25".parse::<BoundName>().is_err());
        let inp = inputs(10, 1, 0, norms(1.0, 1.0, 1.0));
        assert!(bound_value(&BoundSpec::new(BoundName::Fkm).unwrap(), &inp).is_err());
    }

    #[test]
    fn combined_side_condition() {
        // M = 1000 > N^2 = 100: the third term is dropped only by combined_cond
        let inp = inputs(10_007, 1000, 10, norms(1000.0, 1000f64.sqrt(), 1.0));
        let a = bound_value(&BoundSpec::new(BoundName::Combined).unwrap(), &inp).unwrap();
        let b = bound_value(&BoundSpec::new(BoundName::CombinedCond).unwrap(), &inp).unwrap();
        assert_eq!(a.condition, Some(false));
        assert!(a.value <= b.value);
        let inp = inputs(10_007, 50, 50, norms(50.0, 50f64.sqrt(), 1.0));
        let a = bound_value(&BoundSpec::new(BoundName::Combined).unwrap(), &inp).unwrap();
        let b = bound_value(&BoundSpec::new(BoundName::CombinedCond).unwrap(), &inp).unwrap();
        assert_eq!(a.condition, Some(true));
        assert_eq!(a.value, b.value);
    }

    proptest! {
        #[test]
        fn monotone_in_norms(
            q in 2u64..1_000_000, m in 1u64..1000, n in 1u64..1000,
            l1 in 0.0f64..1e4, l2 in 0.0f64..1e3, linf in 0.0f64..10.0,
            bump in 0.0f64..10.0, which in 0usize..3,
        ) {
            let base = norms(l1, l2, linf);
            let mut up = base;
            match which {
                0 => up.l1 += bump,
                1 => up.l2 += bump,
                _ => up.linf += bump,
            }
            for spec in all_specs() {
                let a = bound_value(&spec, &inputs(q, m, n, base)).unwrap().value;
                let b = bound_value(&spec, &inputs(q, m, n, up)).unwrap().value;
                prop_assert!(a <= b, "{} decreased", spec.name());
            }
        }
    }
}
