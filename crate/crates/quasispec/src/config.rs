//! Run configuration: a sectioned `key = value` file (TOML syntax).
//!
//! ```toml
//! [model]
//! name = "type3"        # mosaic | type2 | type3 | custom-strip
//! lambda = 1.0
//! alpha = "golden"      # or a number in (0, 1)
//! phase = 0.1371
//!
//! [grid]
//! lo = -3.0
//! hi = 3.0
//! count = 300
//!
//! [run]
//! steps = 100000
//! seed = 0
//! ```

use std::path::{Path, PathBuf};

use quasispec_core::arithmetic::Frequency;
use quasispec_core::models::{FourierTerm, ModelSpec, ScalarKind, ScalarMosaicModel, StripModel};
use quasispec_core::{Mat2C, C64, DEFAULT_PHASE};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Orbit length over which the default phase is checked against `T0`.
const PHASE_CHECK_RUN: i64 = 1_000_000;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelSection>,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Mosaic,
    Type2,
    Type3,
    CustomStrip,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Alpha {
    Named(String),
    Value(f64),
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::Named("golden".into())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: ModelName,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub alpha: Alpha,
    #[serde(default = "default_phase")]
    pub phase: f64,
    /// Real rank-one hopping of a custom strip.
    pub hop: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub fourier: Vec<FourierSection>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FourierSection {
    pub k: i32,
    pub re: [[f64; 2]; 2],
    #[serde(default)]
    pub im: [[f64; 2]; 2],
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSection {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Cocycle steps per phase.
    #[serde(default = "default_steps")]
    pub steps: u64,
    /// Starting phases in each Lyapunov average.
    #[serde(default = "default_le_phases")]
    pub le_phases: usize,
    /// Restriction size; each command has its own default.
    pub n: Option<usize>,
    /// Phases in IDS and spectrum averages.
    pub n_phases: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// `Im z` for the Thouless check.
    #[serde(default = "default_imag")]
    pub imag: f64,
    /// Imaginary phase shifts for acceleration scans.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Finite-difference half-width for accelerations.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Eigenvalues sampled before bisecting for mobility edges.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Pass threshold of the check-style commands.
    pub tolerance: Option<f64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            steps: default_steps(),
            le_phases: default_le_phases(),
            n: None,
            n_phases: None,
            seed: 0,
            imag: default_imag(),
            eps: default_eps(),
            delta: default_delta(),
            samples: default_samples(),
            tolerance: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

fn default_lambda() -> f64 {
    1.0
}
fn default_phase() -> f64 {
    DEFAULT_PHASE
}
fn default_steps() -> u64 {
    100_000
}
fn default_le_phases() -> usize {
    8
}
fn default_imag() -> f64 {
    0.5
}
fn default_eps() -> Vec<f64> {
    (1..=9).map(|i| 0.05 * i as f64).collect()
}
fn default_delta() -> f64 {
    0.02
}
fn default_samples() -> usize {
    16
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            if g.count < 2 {
                return Err(CliError::config("grid.count must be at least 2"));
            }
            if !(g.lo.is_finite() && g.hi.is_finite() && g.lo < g.hi) {
                return Err(CliError::config("grid needs finite lo < hi"));
            }
        }
        let r = &self.run;
        if r.steps < 1000 {
            return Err(CliError::config("run.steps must be at least 1000"));
        }
        if r.le_phases == 0 || r.n == Some(0) || r.n_phases == Some(0) || r.samples < 2 {
            return Err(CliError::config("run lengths must be positive (samples >= 2)"));
        }
        if !(r.imag > 0.0) || !(r.delta > 0.0) {
            return Err(CliError::config("run.imag and run.delta must be positive"));
        }
        if r.eps.is_empty() || r.eps.iter().any(|e| !e.is_finite()) {
            return Err(CliError::config("run.eps must be a non-empty list of finite values"));
        }
        if let Some(m) = &self.model {
            if !(m.lambda > 0.0 && m.lambda.is_finite()) {
                return Err(CliError::config("model.lambda must be positive"));
            }
            if !m.phase.is_finite() {
                return Err(CliError::config("model.phase must be finite"));
            }
            let custom = m.name == ModelName::CustomStrip;
            if custom && (m.hop.is_none() || m.fourier.is_empty()) {
                return Err(CliError::config("custom-strip needs model.hop and at least one [[model.fourier]] term"));
            }
            if !custom && (m.hop.is_some() || !m.fourier.is_empty()) {
                return Err(CliError::config("model.hop and model.fourier apply to custom-strip only"));
            }
        }
        Ok(())
    }

    pub fn model_section(&self) -> Result<&ModelSection, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::config("missing [model] section"))
    }

    pub fn grid(&self) -> Result<GridSection, CliError> {
        self.grid.ok_or_else(|| CliError::config("missing [grid] section"))
    }

    pub fn frequency(&self) -> Result<Frequency, CliError> {
        match &self.model_section()?.alpha {
            Alpha::Named(s) if s == "golden" => Ok(Frequency::golden()),
            Alpha::Named(s) => Err(CliError::config(format!("model.alpha: unknown name {s:?}"))),
            Alpha::Value(a) => Frequency::new(*a, 40).map_err(|e| CliError::config(format!("model.alpha: {e}"))),
        }
    }

    /// Builds the configured operator and checks that the phase avoids the
    /// singular set of Type-II chains.
    pub fn model(&self) -> Result<ModelSpec, CliError> {
        let m = self.model_section()?;
        let freq = self.frequency()?;
        let bad = |e: quasispec_core::Error| CliError::config(format!("model: {e}"));
        let spec = match m.name {
            ModelName::Mosaic => ModelSpec::Scalar(ScalarMosaicModel::new(ScalarKind::Mosaic, m.lambda, freq).map_err(bad)?),
            ModelName::Type2 => {
                let s = ScalarMosaicModel::new(ScalarKind::TypeII, m.lambda, freq).map_err(bad)?;
                let run = (self.run.steps as i64).clamp(1, PHASE_CHECK_RUN);
                s.check_phase(m.phase, run).map_err(bad)?;
                ModelSpec::Scalar(s)
            }
            ModelName::Type3 => ModelSpec::Strip(StripModel::type3(m.lambda, freq).map_err(bad)?),
            ModelName::CustomStrip => {
                let h = m.hop.expect("validated");
                let hop = Mat2C::real(h[0][0], h[0][1], h[1][0], h[1][1]);
                let terms = m
                    .fourier
                    .iter()
                    .map(|t| {
                        let c = |i: usize, j: usize| C64::new(t.re[i][j], t.im[i][j]);
                        FourierTerm { k: t.k, coeff: Mat2C::new(c(0, 0), c(0, 1), c(1, 0), c(1, 1)) }
                    })
                    .collect();
                ModelSpec::Strip(StripModel::custom(hop, terms, freq, m.lambda).map_err(bad)?)
            }
        };
        Ok(spec)
    }

    pub fn phase(&self) -> f64 {
        self.model.as_ref().map(|m| m.phase).unwrap_or(DEFAULT_PHASE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = Config::parse("[model]\nname = \"type2\"\n").unwrap();
        let m = c.model_section().unwrap();
        assert_eq!(m.lambda, 1.0);
        assert_eq!(m.phase, DEFAULT_PHASE);
        assert_eq!(c.frequency().unwrap(), Frequency::golden());
        assert!(matches!(c.model().unwrap(), ModelSpec::Scalar(_)));
    }

    #[test]
    fn grid_points_hit_both_ends() {
        let g = GridSection { lo: -3.0, hi: 3.0, count: 7 };
        let p = g.points();
        assert_eq!(p.len(), 7);
        assert_eq!(p[0], -3.0);
        assert_eq!(p[6], 3.0);
        assert!((p[3]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[grid]\nlo = 0.0\nhi = 1.0\ncount = 1\n",
            "[grid]\nlo = 1.0\nhi = 0.0\ncount = 5\n",
            "[model]\nname = \"type4\"\n",
            "[model]\nname = \"type2\"\nlambda = -1.0\n",
            "[model]\nname = \"type2\"\nbogus = 3\n",
            "[run]\nsteps = 10\n",
            "[model]\nname = \"custom-strip\"\n",
            "[model]\nname = \"type3\"\nhop = [[1.0, 0.0], [0.0, 0.0]]\n",
            "[model\nname = 1",
        ] {
            assert!(matches!(Config::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Config::parse("[model]\nname = \"type2\"\nlambda = \"x\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn numeric_alpha() {
        let c = Config::parse("[model]\nname = \"type3\"\nalpha = 0.7548776662466927\n").unwrap();
        assert!((c.frequency().unwrap().value() - 0.7548776662466927).abs() < 1e-16);
        let c = Config::parse("[model]\nname = \"type3\"\nalpha = \"silver\"\n").unwrap();
        assert!(c.frequency().is_err());
    }

    #[test]
    fn custom_strip() {
        let text = r#"
[model]
name = "custom-strip"
lambda = 1.0
hop = [[1.0, 0.0], [0.0, 0.0]]

[[model.fourier]]
k = 1
re = [[0.5, 0.5], [-0.5, -0.5]]

[[model.fourier]]
k = -1
re = [[0.5, -0.5], [0.5, -0.5]]
"#;
        let c = Config::parse(text).unwrap();
        let ModelSpec::Strip(s) = c.model().unwrap() else { panic!() };
        let t3 = StripModel::type3(1.0, Frequency::golden()).unwrap();
        for w in [0.0, 0.13, 0.71] {
            assert!(s.potential_at(w).max_diff(&t3.potential_at(w)) < 1e-14);
        }
    }

    #[test]
    fn type2_phase_on_singular_set_is_rejected() {
        let c = Config::parse("[model]\nname = \"type2\"\nphase = 0.25\n").unwrap();
        assert!(matches!(c.model(), Err(CliError::Config(_))));
    }
}
