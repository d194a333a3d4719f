//! Fixed-size verification suites behind `quasispec verify <suite>`.

use quasispec_core::arithmetic::{diophantine_margin, fitted_sin_sum_constant, torus_norm, Frequency};
use quasispec_core::cocycle::{jensen_closed_form, jensen_integral};
use quasispec_core::finite::{interlacing_verify, omega0_margin};
use quasispec_core::models::StripModel;
use quasispec_core::spectral::{jl_constants, jl_ratio};
use quasispec_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::commands::{duality_outcome, le_params, report, thouless_check, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::json_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Interlacing,
    Thouless,
    Duality,
    Jl,
    Arithmetic,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Interlacing => "interlacing",
            Suite::Thouless => "thouless",
            Suite::Duality => "duality",
            Suite::Jl => "jl",
            Suite::Arithmetic => "arithmetic",
        }
    }
}

pub fn run(suite: Suite, cfg: &Config) -> Result<Outcome, CliError> {
    match suite {
        Suite::Interlacing => interlacing(cfg.run.seed, 100),
        Suite::Thouless => {
            let m = StripModel::type3(1.0, Frequency::golden())?;
            let energies: Vec<f64> = (0..20).map(|i| -2.5 + 5.0 * i as f64 / 19.0).collect();
            thouless_check(&m, &energies, 0.5, 2000, 16, &le_params(cfg), 1e-2)
        }
        Suite::Duality => duality_outcome(1.0, &Frequency::golden(), quasispec_core::DEFAULT_PHASE, 1000, 50, 400, 0.02),
        Suite::Jl => jl(cfg.run.seed, 50),
        Suite::Arithmetic => arithmetic(),
    }
}

/// Phases closer than this (relative to `λ`) to the complement of `Ω₀` are
/// redrawn: near-decoupled sites give eigenvalue pairs closer than double
/// precision can separate.
pub const OMEGA0_MARGIN: f64 = 1e-2;

/// Random Type-III instances with `ω ∈ Ω₀` and `2 ≤ N ≤ 12`.
pub fn interlacing(seed: u64, count: usize) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(count);
    let mut violations = 0usize;
    let mut rejected = 0usize;
    while results.len() < count {
        let lambda = rng.gen_range(0.3..3.0);
        let n = rng.gen_range(2..=12usize);
        let omega: f64 = rng.gen();
        let m = StripModel::type3(lambda, Frequency::golden())?;
        if omega0_margin(&m, omega, n) < OMEGA0_MARGIN {
            rejected += 1;
            continue;
        }
        let r = match interlacing_verify(&m, omega, n) {
            Err(Error::OutsideOmega0 { .. }) => {
                rejected += 1;
                continue;
            }
            other => other?,
        };
        violations += r.violations.len();
        results.push(json!({
            "lambda": lambda,
            "omega": omega,
            "n": n,
            "case": r.case.map(|c| format!("{c:?}")),
            "coupled": r.k,
            "violations": r.violations.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>(),
        }));
    }
    let mut margins = Map::new();
    margins.insert("violations".into(), json!(violations));
    margins.insert("rejected_phases".into(), json!(rejected));
    Ok(report(results, margins, violations == 0))
}

/// Random `(E, ε)` with `E ∈ T_δ` for the Type-III strip at `λ = 1`, `δ`
/// the distance to `[−1, 1]` and `ε` log-uniform in `(10⁻³δ, 0.9δ)`.
pub fn jl(seed: u64, count: usize) -> Result<Outcome, CliError> {
    let m = StripModel::type3(1.0, Frequency::golden())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let e: f64 = sign * rng.gen_range(1.05..3.0);
            let delta = e.abs() - 1.0;
            let eps = delta * 10f64.powf(rng.gen_range(-3.0..(0.9f64).log10()));
            (rng.gen::<f64>(), e, eps)
        })
        .collect();
    let reps = draws
        .par_iter()
        .map(|&(omega, e, eps)| Ok((omega, e, eps, jl_ratio(&m, omega, e, eps)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let (c1, c2) = jl_constants();
    let lower = reps.iter().map(|r| r.3.ratio / c1).fold(f64::INFINITY, f64::min);
    let upper = reps.iter().map(|r| c2 / r.3.ratio).fold(f64::INFINITY, f64::min);
    let results = reps
        .iter()
        .map(|(omega, e, eps, r)| json!({"omega": omega, "energy": e, "eps": eps, "length": r.length, "ratio": r.ratio, "inside": c1 < r.ratio && r.ratio < c2}))
        .collect();
    let mut margins = Map::new();
    margins.insert("min_ratio_over_lower".into(), json_f64(lower));
    margins.insert("min_upper_over_ratio".into(), json_f64(upper));
    Ok(report(results, margins, lower > 1.0 && upper > 1.0))
}

fn check(name: &str, value: f64, bound: f64, passed: bool) -> Value {
    json!({"check": name, "value": json_f64(value), "bound": bound, "passed": passed})
}

/// Continued fractions, convergent bounds, the sine-sum constant,
/// Poisson–Jensen quadrature and the Diophantine margin of the golden mean.
pub fn arithmetic() -> Result<Outcome, CliError> {
    let mut results = Vec::new();
    let mut margins = Map::new();

    let mut worst = f64::INFINITY;
    for alpha in [Frequency::golden().value(), std::f64::consts::FRAC_1_PI, 2f64.sqrt() - 1.0, std::f64::consts::E - 2.0] {
        let f = Frequency::new(alpha, 12)?;
        for n in 1..f.depth() - 1 {
            let q = f.q(n).expect("within depth") as f64;
            let q1 = f.q(n + 1).expect("within depth") as f64;
            let d = torus_norm(q * alpha);
            worst = worst.min((d * 2.0 * q1).min(1.0 / (d * q1)));
        }
    }
    results.push(check("convergent_bounds", worst, 1.0, worst >= 1.0 - 1e-12));
    margins.insert("convergent_bounds".into(), json_f64(worst));

    let golden = Frequency::golden();
    let c = [0.13, 0.37, 0.71].iter().map(|&x| fitted_sin_sum_constant(x, &golden, 3..=20)).collect::<Result<Vec<_>, _>>()?;
    let c = c.into_iter().fold(0.0, f64::max);
    results.push(check("sin_sum_constant", c, 2.0, c <= 2.0));
    margins.insert("sin_sum_constant".into(), json_f64(c));

    let mut jensen = 0.0f64;
    for lambda in [1.0, 2.0] {
        for eps in [0.1, 0.5] {
            jensen = jensen.max((jensen_integral(lambda, eps, 4096) - jensen_closed_form(lambda, eps)).abs());
        }
    }
    results.push(check("poisson_jensen", jensen, 1e-6, jensen <= 1e-6));
    margins.insert("poisson_jensen".into(), json_f64(jensen));

    let d = diophantine_margin(&golden, 0.3, 1.0, 10_000);
    results.push(check("diophantine_margin", d.margin, 1.0, d.margin >= 1.0));
    margins.insert("diophantine_margin".into(), json_f64(d.margin));

    let passed = results.iter().all(|r| r["passed"] == json!(true));
    Ok(report(results, margins, passed))
}
