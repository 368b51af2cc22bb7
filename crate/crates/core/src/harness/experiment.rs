//! Seeded experiments: generate weights, evaluate the bilinear form by one or
//! more paths, cross-check them, and compare against every applicable bound.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_value, BoundInputs, BoundName, BoundSpec};
use crate::bilinear::{
    bilinear_gauss, bilinear_kloosterman, derive_seed, generate, generated_weights,
    CharWeightVector, GaussMethod, Interval, Method, Norms, WeightKind, WeightVector,
};
use crate::error::{Error, Result};
use crate::expsums::{max_abs_kloosterman, primitive_characters};
use crate::modmath::Modulus;
use crate::summation::SumResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Kloosterman,
    Gauss,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Kloosterman => "kloosterman",
            Family::Gauss => "gauss",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kloosterman" => Ok(Family::Kloosterman),
            "gauss" => Ok(Family::Gauss),
            other => Err(Error::InvalidInput(format!(
                "unknown family '{other}' (expected kloosterman or gauss)"
            ))),
        }
    }
}

/// One row of output: a single bound evaluated on a single instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub q: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub seed: u64,
    pub weight_kind: String,
    pub norm1: f64,
    pub norm2: f64,
    pub norm_inf: f64,
    pub abs_sum: f64,
    pub error_bound: f64,
    pub bound_name: String,
    pub bound_value: f64,
    pub ratio: f64,
    pub wall_time_seconds: f64,
}

/// Canonical order: by `q`, then bound name.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.q.cmp(&b.q).then_with(|| a.bound_name.cmp(&b.bound_name)));
}

pub fn ratio(abs_sum: f64, bound: f64) -> f64 {
    if abs_sum == 0.0 {
        0.0
    } else {
        abs_sum / bound
    }
}

/// Parameters of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub family: Family,
    pub q: u64,
    /// Support size. `None` means every unit (or every primitive character).
    pub m: Option<usize>,
    pub n: u64,
    pub l: u64,
    pub weight_kind: WeightKind,
    pub seed: u64,
    /// Evaluation paths; the first is reported, the rest are cross-checks.
    /// For the Gauss family `naive` selects the direct path and anything else
    /// the transformed one.
    pub methods: Vec<Method>,
    /// `(r, epsilon)` adds the average-over-moduli bound.
    pub average: Option<(u32, f64)>,
}

impl Experiment {
    pub fn kloosterman(
        q: u64,
        m: Option<usize>,
        n: u64,
        l: u64,
        weight_kind: WeightKind,
        seed: u64,
    ) -> Self {
        Experiment {
            family: Family::Kloosterman,
            q,
            m,
            n,
            l,
            weight_kind,
            seed,
            methods: vec![Method::Fast],
            average: None,
        }
    }

    pub fn gauss(
        q: u64,
        m: Option<usize>,
        n: u64,
        l: u64,
        weight_kind: WeightKind,
        seed: u64,
    ) -> Self {
        Experiment {
            family: Family::Gauss,
            ..Experiment::kloosterman(q, m, n, l, weight_kind, seed)
        }
    }

    pub fn with_methods(mut self, methods: Vec<Method>) -> Self {
        self.methods = methods;
        self
    }

    pub fn with_average(mut self, r: u32, epsilon: f64) -> Self {
        self.average = Some((r, epsilon));
        self
    }

    /// The bounds reported for this family.
    pub fn bound_specs(&self) -> Result<Vec<BoundSpec>> {
        let names: &[BoundName] = match self.family {
            Family::Kloosterman => &[
                BoundName::Trivial,
                BoundName::Fkm,
                BoundName::Bfkmm,
                BoundName::Shpzha,
                BoundName::Combined,
                BoundName::CombinedCond,
                BoundName::Thm21,
                BoundName::Simple21,
            ],
            Family::Gauss => &[BoundName::Trivial, BoundName::Thm23],
        };
        let mut specs: Vec<BoundSpec> = names
            .iter()
            .map(|&b| BoundSpec::new(b))
            .collect::<Result<_>>()?;
        if let Some((r, eps)) = self.average {
            specs.push(self.average_spec(r, eps)?);
        }
        Ok(specs)
    }

    fn average_spec(&self, r: u32, epsilon: f64) -> Result<BoundSpec> {
        let name = match self.family {
            Family::Kloosterman => BoundName::Thm22,
            Family::Gauss => BoundName::Thm24,
        };
        BoundSpec::average(name, r, epsilon)
    }
}

/// The evaluated form, before bounds are attached.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub sum: SumResult,
    pub norms: Norms,
    pub support: u64,
    /// Pointwise maximum used by the trivial bound.
    pub max_abs: f64,
    pub seconds: f64,
}

fn cross_check(results: &[(&'static str, SumResult)]) -> Result<SumResult> {
    let (first_name, first) = results[0];
    for &(name, r) in &results[1..] {
        if !first.agrees_with(&r) {
            return Err(Error::PathDisagreement {
                first: first_name,
                second: name,
                diff: (first.value - r.value).norm(),
                allowed: first.error_bound + r.error_bound,
            });
        }
    }
    Ok(first)
}

/// Evaluates `S_q(A; J)` by every method in `methods`.
pub fn evaluate_kloosterman(
    a: &WeightVector,
    j: &Interval,
    methods: &[Method],
) -> Result<Evaluation> {
    if methods.is_empty() {
        return Err(Error::InvalidInput(
            "at least one evaluation method is needed".into(),
        ));
    }
    let start = Instant::now();
    let results = methods
        .iter()
        .map(|&m| bilinear_kloosterman(a, j, m).map(|r| (m.as_str(), r)))
        .collect::<Result<Vec<_>>>()?;
    let sum = cross_check(&results)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Evaluation {
        sum,
        norms: a.norms(),
        support: a.len() as u64,
        max_abs: max_abs_kloosterman(a.modulus()),
        seconds,
    })
}

/// Evaluates `T_q(W; J)`. `|G_q(chi, n)| = sqrt q` for primitive `chi` and
/// unit `n`, and is at most `sqrt q` otherwise, so `sqrt q` is the maximum.
pub fn evaluate_gauss(
    w: &CharWeightVector,
    j: &Interval,
    methods: &[GaussMethod],
) -> Result<Evaluation> {
    if methods.is_empty() {
        return Err(Error::InvalidInput(
            "at least one evaluation method is needed".into(),
        ));
    }
    let start = Instant::now();
    let results = methods
        .iter()
        .map(|&m| {
            let name = match m {
                GaussMethod::Naive => "naive",
                GaussMethod::Transformed => "transformed",
            };
            bilinear_gauss(w, j, m).map(|r| (name, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let sum = cross_check(&results)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Evaluation {
        sum,
        norms: w.norms(),
        support: w.len() as u64,
        max_abs: (w.modulus().get() as f64).sqrt(),
        seconds,
    })
}

/// Weights of the given kind on the first `count` primitive characters.
pub fn generated_char_weights(
    q: &Modulus,
    count: Option<usize>,
    kind: WeightKind,
    seed: u64,
) -> Result<CharWeightVector> {
    let chars: Vec<_> = match count {
        Some(c) => primitive_characters(q).take(c).collect(),
        None => primitive_characters(q).collect(),
    };
    if let Some(c) = count {
        if chars.len() < c {
            return Err(Error::InvalidInput(format!(
                "only {} primitive characters modulo {}, cannot place {c} weights",
                chars.len(),
                q.get()
            )));
        }
    }
    let values = generate(kind, seed, chars.len());
    CharWeightVector::new(q, chars.into_iter().zip(values))
}

fn gauss_methods(methods: &[Method]) -> Vec<GaussMethod> {
    let mut out = Vec::new();
    for m in methods {
        let g = match m {
            Method::Naive => GaussMethod::Naive,
            _ => GaussMethod::Transformed,
        };
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Evaluates the instance and returns one record per applicable bound.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<ExperimentRecord>> {
    let q = Modulus::new(exp.q)?;
    let j = Interval::new(&q, exp.l, exp.n)?;
    let eval = match exp.family {
        Family::Kloosterman => {
            let count = exp.m.unwrap_or(q.phi() as usize);
            let a = generated_weights(&q, count, exp.weight_kind, exp.seed)?;
            evaluate_kloosterman(&a, &j, &exp.methods)?
        }
        Family::Gauss => {
            let w = generated_char_weights(&q, exp.m, exp.weight_kind, exp.seed)?;
            evaluate_gauss(&w, &j, &gauss_methods(&exp.methods))?
        }
    };
    records_for(exp, &eval)
}

/// Attaches every bound of `exp` to an evaluation.
pub fn records_for(exp: &Experiment, eval: &Evaluation) -> Result<Vec<ExperimentRecord>> {
    let inputs = BoundInputs {
        q: exp.q,
        m: eval.support,
        n: exp.n,
        norms: eval.norms,
        max_abs: Some(eval.max_abs),
    };
    let abs_sum = eval.sum.abs();
    let mut out = Vec::new();
    for spec in exp.bound_specs()? {
        let b = bound_value(&spec, &inputs)?;
        out.push(ExperimentRecord {
            q: exp.q,
            m: eval.support,
            n: exp.n,
            l: exp.l,
            seed: exp.seed,
            weight_kind: exp.weight_kind.to_string(),
            norm1: eval.norms.l1,
            norm2: eval.norms.l2,
            norm_inf: eval.norms.linf,
            abs_sum,
            error_bound: eval.sum.error_bound,
            bound_name: spec.name().to_string(),
            bound_value: b.value,
            ratio: ratio(abs_sum, b.value),
            wall_time_seconds: eval.seconds,
        });
    }
    sort_records(&mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub family: Family,
    pub big_q: u64,
    pub n: u64,
    pub l: u64,
    pub r: u32,
    pub epsilon: f64,
    pub weight_kind: WeightKind,
    pub seed: u64,
    /// Support size per modulus; `None` for full support.
    pub m: Option<usize>,
}

impl Sweep {
    /// The single-modulus experiment the sweep runs at `q`.
    pub fn experiment_at(&self, q: u64) -> Experiment {
        let base = match self.family {
            Family::Kloosterman => {
                Experiment::kloosterman(q, self.m, self.n, self.l, self.weight_kind, 0)
            }
            Family::Gauss => Experiment::gauss(q, self.m, self.n, self.l, self.weight_kind, 0),
        };
        let methods = match self.family {
            Family::Kloosterman => vec![Method::Fast, Method::Transformed],
            Family::Gauss => vec![Method::Transformed],
        };
        Experiment {
            seed: derive_seed(self.seed, q),
            ..base
        }
        .with_methods(methods)
        .with_average(self.r, self.epsilon)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// One record per modulus, against the average-over-moduli bound.
    pub records: Vec<ExperimentRecord>,
    /// `#{q : ratio > 1}`.
    pub exceptional_count: u64,
    /// `exceptional_count / #moduli`.
    pub exceptional_fraction: f64,
    /// `Q^{-2 r eps}`.
    pub reference_fraction: f64,
    /// `exceptional_count / Q^{1 - 2 r eps}`.
    pub normalized_count: f64,
}

/// Runs every `q` in `[Q, 2Q]` in parallel.
pub fn average_sweep(sweep: &Sweep) -> Result<SweepResult> {
    if sweep.big_q < 16 {
        return Err(Error::InvalidInput(format!(
            "sweeps need Q >= 16, got {}",
            sweep.big_q
        )));
    }
    let hi = sweep
        .big_q
        .checked_mul(2)
        .ok_or_else(|| Error::InvalidInput("2Q overflows".into()))?;
    let average = match sweep.family {
        Family::Kloosterman => BoundName::Thm22,
        Family::Gauss => BoundName::Thm24,
    };
    let mut records = (sweep.big_q..=hi)
        .into_par_iter()
        .map(|q| {
            let recs = run_experiment(&sweep.experiment_at(q))?;
            Ok(recs
                .into_iter()
                .filter(|r| r.bound_name == average.as_str())
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<Vec<ExperimentRecord>>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    sort_records(&mut records);
    let exceptional_count = records.iter().filter(|r| r.ratio > 1.0).count() as u64;
    let big_q = sweep.big_q as f64;
    let exponent = 2.0 * sweep.r as f64 * sweep.epsilon;
    Ok(SweepResult {
        exceptional_fraction: exceptional_count as f64 / records.len() as f64,
        reference_fraction: big_q.powf(-exponent),
        normalized_count: exceptional_count as f64 / big_q.powf(1.0 - exponent),
        exceptional_count,
        records,
    })
}
