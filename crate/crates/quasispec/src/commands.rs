//! The scan and check commands.

use std::time::Instant;

use quasispec_core::cocycle::{rotation_number, scalar_acceleration, strip_acceleration, GrowthParams, LeParams};
use quasispec_core::duality::{duality_ids_compare, u2_conjugate_check};
use quasispec_core::finite::{all_eigenvalues, build_restriction, eigenvector, equidistributed_phases, ids_with_phases, ipr};
use quasispec_core::models::{closed_form_le, ModelSpec, ScalarKind, ScalarMosaicModel, StripModel};
use quasispec_core::spectral::{classify, mobility_edges, thouless_report, ClassifyParams, ThoulessSpectrum};
use quasispec_core::C64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Config, ModelName};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, json_f64, Output, Report, Table};
use crate::suites::{self, Suite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    LeScan,
    IdsScan,
    MobilityEdge,
    Thouless,
    DualityCheck,
    Eig,
    Acceleration,
    Verify(Suite),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::LeScan => "le-scan".into(),
            Command::IdsScan => "ids-scan".into(),
            Command::MobilityEdge => "mobility-edge".into(),
            Command::Thouless => "thouless".into(),
            Command::DualityCheck => "duality-check".into(),
            Command::Eig => "eig".into(),
            Command::Acceleration => "acceleration".into(),
            Command::Verify(s) => format!("verify {}", s.name()),
        }
    }
}

/// Result of a command: what to write, and whether its checks passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub output: Output,
    pub passed: bool,
}

impl Outcome {
    fn table(t: Table) -> Self {
        Outcome { output: Output::Csv(t), passed: true }
    }
}

pub fn execute(cmd: Command, cfg: &Config) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut out = match cmd {
        Command::LeScan => le_scan(cfg),
        Command::IdsScan => ids_scan(cfg),
        Command::Eig => eig(cfg),
        Command::Acceleration => acceleration(cfg),
        Command::MobilityEdge => mobility_edge(cfg),
        Command::Thouless => thouless(cfg),
        Command::DualityCheck => duality_check(cfg),
        Command::Verify(s) => suites::run(s, cfg),
    }?;
    if let Output::Json(r) = &mut out.output {
        r.command = cmd.name();
        r.config_echo = serde_json::to_value(cfg).expect("config serializes");
        r.wall_time_s = start.elapsed().as_secs_f64();
        r.passed = out.passed;
    }
    Ok(out)
}

pub(crate) fn report(results: Vec<Value>, margins: Map<String, Value>, passed: bool) -> Outcome {
    let r = Report { command: String::new(), config_echo: Value::Null, results, margins, wall_time_s: 0.0, passed };
    Outcome { output: Output::Json(r), passed }
}

pub(crate) fn le_params(cfg: &Config) -> LeParams {
    LeParams { steps: cfg.run.steps, phases: cfg.run.le_phases, x0: cfg.phase(), seed: cfg.run.seed }
}

pub(crate) fn growth_params(cfg: &Config) -> GrowthParams {
    GrowthParams { n_min: (cfg.run.steps / 100).max(10), n_max: cfg.run.steps, checkpoints: 16 }
}

fn j_strip(model: &ModelSpec, what: &str) -> Result<StripModel, CliError> {
    match model {
        ModelSpec::Strip(s) if s.is_j_hop() => Ok(s.clone()),
        _ => Err(CliError::config(format!("{what} needs a strip model with hopping [[1,0],[0,0]]"))),
    }
}

fn le_scan(cfg: &Config) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?.points();
    let params = ClassifyParams {
        le: le_params(cfg),
        growth: growth_params(cfg),
        n: cfg.run.n.unwrap_or(1000),
        n_phases: cfg.run.n_phases.unwrap_or(4),
        spectrum_tol: 1e-2,
        accel_delta: cfg.run.delta,
    };
    let closed = matches!(&model, ModelSpec::Scalar(m) if m.kind == ScalarKind::TypeII);
    let samples = grid.par_iter().map(|&e| classify(&model, e, &params)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec![
        "energy",
        "le_numeric",
        "le_error",
        "le_closed_form",
        "abs_diff",
        "acceleration",
        "ids",
        "rotation",
        "growth_exponent",
        "in_spectrum",
        "classification",
    ]);
    for s in samples {
        let cf = closed.then(|| closed_form_le(s.energy, model.lambda()));
        t.push(vec![
            fmt_f64(s.energy),
            fmt_f64(s.le),
            fmt_f64(s.le_error),
            fmt_opt(cf),
            fmt_opt(cf.map(|c| (s.le - c).abs())),
            fmt_f64(s.acceleration),
            fmt_f64(s.ids),
            fmt_opt(s.rotation),
            fmt_f64(s.growth_exponent),
            s.in_spectrum.to_string(),
            s.classification.as_str().to_string(),
        ]);
    }
    Ok(Outcome::table(t))
}

fn ids_scan(cfg: &Config) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?.points();
    let n = cfg.run.n.unwrap_or(1000);
    let phases = equidistributed_phases(cfg.run.n_phases.unwrap_or(8));
    let strip = match &model {
        ModelSpec::Strip(s) if s.is_j_hop() => Some(s),
        _ => None,
    };
    let rows = grid
        .par_iter()
        .map(|&e| {
            let ids = ids_with_phases(&model, e, n, &phases)?;
            let rot = strip.map(|s| rotation_number(s, e, cfg.run.steps, cfg.phase())).transpose()?;
            Ok(vec![fmt_f64(e), fmt_f64(ids), fmt_opt(rot)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(vec!["energy", "ids", "rotation"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Outcome::table(t))
}

fn eig(cfg: &Config) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let n = cfg.run.n.unwrap_or(1000);
    let r = build_restriction(&model, cfg.phase(), n)?;
    let mut eigs = all_eigenvalues(&r, 1e-12)?;
    if let Some(g) = cfg.grid {
        eigs.retain(|&e| g.lo <= e && e <= g.hi);
    }
    let rows = eigs
        .par_iter()
        .map(|&e| {
            let v = eigenvector(&r, e)?;
            let center = v.iter().enumerate().max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr())).map(|(i, _)| i).unwrap_or(0);
            Ok((e, ipr(&v), center))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(vec!["index", "energy", "ipr", "center"]);
    for (i, (e, p, c)) in rows.into_iter().enumerate() {
        t.push(vec![i.to_string(), fmt_f64(e), fmt_f64(p), c.to_string()]);
    }
    Ok(Outcome::table(t))
}

fn acceleration(cfg: &Config) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?.points();
    let le = le_params(cfg);
    let delta = cfg.run.delta;
    let pairs: Vec<(f64, f64)> = grid.iter().flat_map(|&e| cfg.run.eps.iter().map(move |&y| (e, y))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(e, y)| {
            let a = match &model {
                ModelSpec::Scalar(m) => scalar_acceleration(m, e, y, delta, &le)?,
                ModelSpec::Strip(s) => strip_acceleration(s, e, y, delta, &le)?,
            };
            Ok(vec![fmt_f64(e), fmt_f64(y), fmt_f64(a.raw), fmt_f64(a.rounded), a.quantized.to_string()])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(vec!["energy", "eps", "raw", "rounded", "quantized"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Outcome::table(t))
}

/// Builds the Thouless spectrum with one worker per phase.
pub(crate) fn thouless_spectrum(model: &StripModel, n: usize, n_phases: usize) -> Result<ThoulessSpectrum, CliError> {
    let spec = ModelSpec::Strip(model.clone());
    let per_phase = equidistributed_phases(n_phases)
        .par_iter()
        .map(|&p| Ok(all_eigenvalues(&build_restriction(&spec, p, n)?, 1e-8)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ThoulessSpectrum { n, per_phase })
}

pub(crate) fn thouless_check(model: &StripModel, energies: &[f64], imag: f64, n: usize, n_phases: usize, le: &LeParams, tol: f64) -> Result<Outcome, CliError> {
    let spectrum = thouless_spectrum(model, n, n_phases)?;
    let reps = energies
        .par_iter()
        .map(|&e| Ok((e, thouless_report(model, &spectrum, C64::new(e, imag), le)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let worst = reps.iter().map(|(_, r)| r.residual).fold(0.0, f64::max);
    let results = reps
        .iter()
        .map(|(e, r)| json!({"energy": e, "imag": imag, "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual, "le_error": r.le_error}))
        .collect();
    let mut margins = Map::new();
    margins.insert("max_residual".into(), json_f64(worst));
    margins.insert("tolerance".into(), json_f64(tol));
    Ok(report(results, margins, worst <= tol))
}

fn thouless(cfg: &Config) -> Result<Outcome, CliError> {
    let model = j_strip(&cfg.model()?, "thouless")?;
    let grid = cfg.grid()?.points();
    let n = cfg.run.n.unwrap_or(2000);
    let n_phases = cfg.run.n_phases.unwrap_or(16);
    thouless_check(&model, &grid, cfg.run.imag, n, n_phases, &le_params(cfg), cfg.run.tolerance.unwrap_or(1e-2))
}

pub(crate) fn duality_outcome(lambda: f64, cfg_freq: &quasispec_core::arithmetic::Frequency, omega: f64, n: usize, n_phases: usize, grid_points: usize, tol: f64) -> Result<Outcome, CliError> {
    let chain = ScalarMosaicModel::new(ScalarKind::TypeII, lambda, cfg_freq.clone())?;
    let strip = StripModel::type3(lambda, cfg_freq.clone())?;
    let ids = duality_ids_compare(&chain, &strip, n, n_phases, grid_points)?;
    let conj = u2_conjugate_check(lambda, cfg_freq, omega, 50)?;
    let lo_gap = (ids.chain_range.0 - ids.strip_range.0).abs();
    let hi_gap = (ids.chain_range.1 - ids.strip_range.1).abs();
    let passed = ids.sup_distance <= tol && conj.passed;
    let results = vec![
        json!({
            "check": "ids",
            "n": n,
            "n_phases": n_phases,
            "sup_distance": ids.sup_distance,
            "chain_range": [ids.chain_range.0, ids.chain_range.1],
            "strip_range": [ids.strip_range.0, ids.strip_range.1],
            "chain_hits_lambda": [ids.chain_hits_lambda.0, ids.chain_hits_lambda.1],
            "strip_hits_lambda": [ids.strip_hits_lambda.0, ids.strip_hits_lambda.1],
        }),
        json!({"check": "u2_conjugation", "n": conj.n, "max_error": conj.max_error, "passed": conj.passed}),
    ];
    let mut margins = Map::new();
    margins.insert("ids_sup_distance".into(), json_f64(ids.sup_distance));
    margins.insert("ids_tolerance".into(), json_f64(tol));
    margins.insert("u2_max_error".into(), json_f64(conj.max_error));
    margins.insert("spectrum_min_gap".into(), json_f64(lo_gap));
    margins.insert("spectrum_max_gap".into(), json_f64(hi_gap));
    Ok(report(results, margins, passed))
}

fn duality_check(cfg: &Config) -> Result<Outcome, CliError> {
    let m = cfg.model_section()?;
    if !matches!(m.name, ModelName::Type2 | ModelName::Type3) {
        return Err(CliError::config("duality-check needs model type2 or type3"));
    }
    cfg.model()?;
    let points = cfg.grid.map(|g| g.count).unwrap_or(400);
    duality_outcome(
        m.lambda,
        &cfg.frequency()?,
        m.phase,
        cfg.run.n.unwrap_or(1000),
        cfg.run.n_phases.unwrap_or(50),
        points,
        cfg.run.tolerance.unwrap_or(0.02),
    )
}

fn mobility_edge(cfg: &Config) -> Result<Outcome, CliError> {
    let m = cfg.model_section()?;
    if !matches!(m.name, ModelName::Type2 | ModelName::Type3) {
        return Err(CliError::config("mobility-edge needs model type2 or type3"));
    }
    let model = cfg.model()?;
    let lambda = m.lambda;
    let (lo, hi) = cfg.grid.map(|g| (g.lo, g.hi)).unwrap_or((-lambda - 0.5, lambda + 0.5));
    let n = cfg.run.n.unwrap_or(4000);
    let tol = cfg.run.tolerance.unwrap_or(0.02);
    let edges = mobility_edges(&model, lo, hi, n, cfg.run.samples, &le_params(cfg), &growth_params(cfg))?;

    let predicted: Vec<(&str, f64)> =
        [("distance_minus_lambda", -lambda), ("distance_plus_lambda", lambda)].into_iter().filter(|&(_, e)| lo < e && e < hi).collect();
    let mut margins = Map::new();
    let mut passed = true;
    for &(key, p) in &predicted {
        let d = edges.iter().map(|e| (e.energy - p).abs()).fold(f64::INFINITY, f64::min);
        passed &= d <= tol;
        margins.insert(key.into(), json_f64(d));
    }
    let spurious = edges.iter().filter(|e| predicted.iter().all(|&(_, p)| (e.energy - p).abs() > tol)).count();
    passed &= spurious == 0;
    margins.insert("spurious_edges".into(), json!(spurious));
    margins.insert("tolerance".into(), json_f64(tol));
    let results = edges
        .iter()
        .map(|e| json!({"energy": e.energy, "uncertainty": e.uncertainty, "below": e.below.as_str(), "above": e.above.as_str()}))
        .collect();
    Ok(report(results, margins, passed))
}
