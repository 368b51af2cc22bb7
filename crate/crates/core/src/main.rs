use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use klsums::bilinear::{Method, WeightKind};
use klsums::counting::{
    congruence, dyadic_average, jr_equation, rr_equation, CountKind, CountMethod,
};
use klsums::expsums::{gauss, kloosterman, max_abs_kloosterman, primitive_characters};
use klsums::harness::{
    average_sweep, emit_csv, exponents, improvement_region, load_config, records_to_string,
    region_slacks, run_experiment, run_verify, Experiment, ExperimentRecord, Family, RunPlan,
    Sweep,
};
use klsums::{Error, Modulus, Result};

#[derive(Parser)]
#[command(
    name = "klsums",
    version,
    about = "Kloosterman and Gauss sums, bilinear forms, and bound experiments"
)]
struct Cli {
    /// JSON run plan; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "Q")]
    big_q: Option<u64>,
    #[arg(long = "N")]
    big_n: Option<u64>,
    #[arg(long = "L")]
    l: Option<u64>,
    /// Support size (default: full support).
    #[arg(long = "M")]
    big_m: Option<usize>,
    /// const, pm1 or unit.
    #[arg(long)]
    weights: Option<WeightKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// naive, transformed or fast (bilinear); convolution or exhaustive (count).
    #[arg(long)]
    method: Option<String>,
    /// kloosterman or gauss.
    #[arg(long)]
    family: Option<Family>,
    /// Output path for CSV records.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// K_q(m, n).
    Kloosterman(Flags),
    /// Gauss sums of the primitive characters mod q at n; `--m i` picks the i-th.
    Gauss(Flags),
    /// One seeded bilinear experiment, one CSV row per bound.
    Bilinear(Flags),
    /// J_r / R_r counts: mod q with --q, over the integers without, averaged over [Q, 2Q] with --Q.
    Count {
        #[command(flatten)]
        flags: Flags,
        /// reciprocal or product.
        #[arg(long, default_value = "reciprocal")]
        kind: String,
    },
    /// Classify (mu, nu), given directly or as (log M, log N) / log q.
    Region {
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Average-over-moduli sweep on [Q, 2Q].
    Sweep(Flags),
    /// Quick invariant suite.
    Verify,
}

fn merge(mut plan: RunPlan, f: &Flags) -> Result<RunPlan> {
    if let Some(v) = f.q {
        plan.q = v;
    }
    if let Some(v) = f.m {
        plan.m = v;
    }
    if let Some(v) = f.n {
        plan.n = v;
    }
    if let Some(v) = f.k {
        plan.k = v;
    }
    if let Some(v) = f.r {
        plan.r = v;
    }
    if let Some(v) = f.epsilon {
        plan.epsilon = v;
    }
    if let Some(v) = f.big_q {
        plan.big_q = v;
    }
    if let Some(v) = f.big_n {
        plan.big_n = v;
    }
    if let Some(v) = f.l {
        plan.l = v;
    }
    if f.big_m.is_some() {
        plan.big_m = f.big_m;
    }
    if let Some(v) = f.weights {
        plan.weights = v;
    }
    if let Some(v) = f.seed {
        plan.seed = v;
    }
    if let Some(v) = f.family {
        plan.family = v;
    }
    if f.out.is_some() {
        plan.out = f.out.clone();
    }
    Ok(plan)
}

fn bilinear_method(f: &Flags, plan: &RunPlan) -> Result<Method> {
    match &f.method {
        Some(s) => s.parse(),
        None => Ok(plan.method),
    }
}

fn count_method(f: &Flags, plan: &RunPlan) -> Result<CountMethod> {
    match f.method.as_deref() {
        Some("convolution") => Ok(CountMethod::Convolution),
        Some("exhaustive") => Ok(CountMethod::Exhaustive),
        Some(other) => Err(Error::InvalidInput(format!(
            "unknown count method '{other}' (expected convolution or exhaustive)"
        ))),
        None => Ok(plan.count_method.into()),
    }
}

fn write_records(records: &[ExperimentRecord], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => emit_csv(records, path),
        None => {
            print!("{}", records_to_string(records));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunPlan::default(),
    };
    let empty = Flags::default();
    let flags = match &cli.command {
        Command::Kloosterman(f) | Command::Gauss(f) | Command::Bilinear(f) | Command::Sweep(f) => f,
        Command::Count { flags, .. } | Command::Region { flags, .. } => flags,
        Command::Verify => &empty,
    };
    let plan = merge(base, flags)?;

    match &cli.command {
        Command::Kloosterman(_) => {
            let q = Modulus::new(plan.q)?;
            let k = kloosterman(&q, plan.m, plan.n);
            let out = json!({
                "q": plan.q, "m": plan.m, "n": plan.n,
                "re": k.value.re, "im": k.value.im, "abs": k.abs(),
                "error_bound": k.error_bound,
                "max_abs": max_abs_kloosterman(&q),
            });
            println!("{out}");
        }
        Command::Gauss(_) => {
            let q = Modulus::new(plan.q)?;
            let chars: Vec<_> = primitive_characters(&q).collect();
            let selected: Vec<_> = match flags.m {
                Some(i) => {
                    let c = usize::try_from(i)
                        .ok()
                        .and_then(|i| chars.get(i))
                        .ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "character index {i} out of range (0..{})",
                                chars.len()
                            ))
                        })?;
                    vec![c.clone()]
                }
                None => chars,
            };
            for chi in selected {
                let g = gauss(&q, &chi, plan.n)?;
                let out = json!({
                    "q": plan.q, "n": plan.n, "exponents": chi.exponents(),
                    "conductor": chi.conductor(),
                    "re": g.value.re, "im": g.value.im, "abs": g.abs(),
                    "abs_over_sqrt_q": g.abs() / (plan.q as f64).sqrt(),
                    "error_bound": g.error_bound,
                });
                println!("{out}");
            }
        }
        Command::Bilinear(_) => {
            let method = bilinear_method(flags, &plan)?;
            let exp = Experiment {
                family: plan.family,
                q: plan.q,
                m: plan.big_m,
                n: plan.big_n,
                l: plan.l,
                weight_kind: plan.weights,
                seed: plan.seed,
                methods: vec![method],
                average: None,
            };
            write_records(&run_experiment(&exp)?, &plan.out)?;
        }
        Command::Count { kind, .. } => {
            let kind = match kind.as_str() {
                "reciprocal" => CountKind::Reciprocal,
                "product" => CountKind::Product,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown count kind '{other}' (expected reciprocal or product)"
                    )))
                }
            };
            let kind_name = format!("{kind:?}").to_lowercase();
            if flags.big_q.is_some() {
                let avg = dyadic_average(plan.big_q, plan.k, plan.r, kind)?;
                let per_q: serde_json::Map<String, serde_json::Value> = avg
                    .per_q
                    .iter()
                    .map(|(q, c)| (q.to_string(), json!(c.to_string())))
                    .collect();
                let out = json!({
                    "Q": plan.big_q, "K": plan.k, "r": plan.r, "kind": kind_name,
                    "mean": avg.mean.to_string(),
                    "mean_float": *avg.mean.numer() as f64 / *avg.mean.denom() as f64,
                    "per_q": per_q,
                });
                println!("{out}");
            } else if flags.q.is_some() {
                let q = Modulus::new(plan.q)?;
                let c = congruence(&q, plan.k, plan.r, count_method(flags, &plan)?, kind)?;
                let out = json!({"q": plan.q, "K": plan.k, "r": plan.r, "kind": kind_name, "count": c.to_string()});
                println!("{out}");
            } else {
                let c = match kind {
                    CountKind::Reciprocal => jr_equation(plan.k, plan.r)?,
                    CountKind::Product => rr_equation(plan.k, plan.r)?,
                };
                let out =
                    json!({"K": plan.k, "r": plan.r, "kind": kind_name, "count": c.to_string()});
                println!("{out}");
            }
        }
        Command::Region { mu, nu, .. } => {
            let (mu, nu) = match (mu, nu) {
                (Some(mu), Some(nu)) => (*mu, *nu),
                (None, None) => {
                    let m = plan.big_m.ok_or_else(|| {
                        Error::InvalidInput(
                            "region needs --mu and --nu, or --q, --M and --N".into(),
                        )
                    })?;
                    exponents(plan.q, m as u64, plan.big_n)
                }
                _ => return Err(Error::InvalidInput("give both --mu and --nu".into())),
            };
            let out = json!({
                "mu": mu, "nu": nu,
                "class": improvement_region(mu, nu).as_str(),
                "slacks": region_slacks(mu, nu),
            });
            println!("{out}");
        }
        Command::Sweep(_) => {
            let sweep = Sweep {
                family: plan.family,
                big_q: plan.big_q,
                n: plan.big_n,
                l: plan.l,
                r: plan.r,
                epsilon: plan.epsilon,
                weight_kind: plan.weights,
                seed: plan.seed,
                m: plan.big_m,
            };
            let res = average_sweep(&sweep)?;
            let summary = json!({
                "Q": plan.big_q, "N": plan.big_n, "r": plan.r, "epsilon": plan.epsilon,
                "family": plan.family.as_str(),
                "moduli": res.records.len(),
                "exceptional_count": res.exceptional_count,
                "exceptional_fraction": res.exceptional_fraction,
                "reference_fraction": res.reference_fraction,
                "normalized_count": res.normalized_count,
            });
            match &plan.out {
                Some(path) => {
                    emit_csv(&res.records, path)?;
                    println!("{summary}");
                }
                None => {
                    print!("{}", records_to_string(&res.records));
                    eprintln!("{summary}");
                }
            }
        }
        Command::Verify => {
            let checks = run_verify();
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Error::CheckFailed(format!("{failed} of {}", checks.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                json!({"error": e.category(), "message": e.to_string()})
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
