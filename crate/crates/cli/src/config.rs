//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! dimension = 2
//! epsilon = 0.25
//! seed = 7
//! mode = "perturbation"
//! nu = 1.0
//! lambda = 1.0
//! t_end = 20.0
//!
//! [grid]
//! L = 16
//! N = 256
//!
//! [perturbation]
//! h3_norm = 0.0
//! ```
//!
//! Every key except `epsilon` has a default; unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use boussinesq_core::data::{Amplitude, MAX_EPSILON_3D};
use boussinesq_core::sim::{Mode, SimConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "defaults::dimension")]
    pub dimension: usize,
    pub epsilon: f64,
    /// Integrability exponent of the 3D data.
    #[serde(default = "defaults::p_exponent")]
    pub p_exponent: f64,
    /// Fixed peak value replacing the ε-dependent amplitude law.
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,

    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "defaults::one")]
    pub nu: f64,
    #[serde(default = "defaults::one")]
    pub lambda: f64,
    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default = "defaults::dt_max")]
    pub dt_max: f64,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
    #[serde(default = "defaults::stride")]
    pub stride: usize,
    #[serde(default)]
    pub guards: Guards,

    #[serde(default)]
    pub condition: ConditionConfig,
    #[serde(default)]
    pub linear: LinearConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Box scale: side `2πL`. Default `⌈4/ε⌉`.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Points per horizontal axis. Default `16L` in 2D.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Points on the vertical axis in 3D.
    #[serde(rename = "N3")]
    pub n3: Option<usize>,
    pub dealias: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub h3_norm: f64,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig { h3_norm: 0.0, radius: defaults::radius() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Full,
    #[default]
    Perturbation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guards {
    /// Abort once the `H³` norm exceeds this multiple of its reference.
    #[serde(default = "defaults::guard")]
    pub h3_factor: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { h3_factor: defaults::guard() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    #[serde(default = "defaults::one")]
    pub c: f64,
    #[serde(default = "defaults::one")]
    pub delta: f64,
    #[serde(default = "defaults::young")]
    pub young_constant: f64,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        ConditionConfig { c: 1.0, delta: 1.0, young_constant: defaults::young() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    pub t_max: Option<f64>,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig { samples: defaults::samples(), tol: defaults::tol(), t_max: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "defaults::lp")]
    pub lp: Vec<f64>,
    /// `(s, p, r)` triples; `inf` is accepted for `p` and `r`.
    #[serde(default = "defaults::besov")]
    pub besov: Vec<[f64; 3]>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { lp: defaults::lp(), besov: defaults::besov() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Snapshots are written at the first sample at or after each time.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Time at which the energy identity is sampled.
    #[serde(default = "defaults::verify_t")]
    pub t: f64,
    /// Snapshot spacing of the coarse identity check; the fine one halves it.
    #[serde(default = "defaults::verify_dt")]
    pub dt: f64,
    #[serde(default = "defaults::identity_tol")]
    pub identity_tol: f64,
    #[serde(default = "defaults::pairs")]
    pub pairs: usize,
    /// Relative change of the measured constants under grid refinement.
    #[serde(default = "defaults::stability")]
    pub stability: f64,
    /// Count the smallness condition among the checks.
    #[serde(default)]
    pub require_condition: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            t: defaults::verify_t(),
            dt: defaults::verify_dt(),
            identity_tol: defaults::identity_tol(),
            pairs: defaults::pairs(),
            stability: defaults::stability(),
            require_condition: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub nu: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    /// Also run the perturbation system for every point.
    #[serde(default)]
    pub simulate: bool,
    /// Use the closed-form upper bounds for `E₀`, `F₀`.
    #[serde(default)]
    pub upper_bound: bool,
}

mod defaults {
    pub fn dimension() -> usize {
        2
    }
    pub fn p_exponent() -> f64 {
        2.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn cfl() -> f64 {
        0.4
    }
    pub fn dt_max() -> f64 {
        0.05
    }
    pub fn t_end() -> f64 {
        20.0
    }
    pub fn stride() -> usize {
        4
    }
    pub fn guard() -> f64 {
        1e6
    }
    pub fn radius() -> f64 {
        2.0
    }
    pub fn young() -> f64 {
        boussinesq_core::diagnostics::YOUNG_CONSTANT
    }
    pub fn samples() -> usize {
        201
    }
    pub fn tol() -> f64 {
        1e-8
    }
    pub fn lp() -> Vec<f64> {
        vec![2.0, 4.0]
    }
    pub fn besov() -> Vec<[f64; 3]> {
        vec![[3.0, 2.0, 2.0], [0.0, f64::INFINITY, 1.0]]
    }
    pub fn verify_t() -> f64 {
        0.5
    }
    pub fn verify_dt() -> f64 {
        4e-3
    }
    pub fn identity_tol() -> f64 {
        1e-6
    }
    pub fn pairs() -> usize {
        20
    }
    pub fn stability() -> f64 {
        0.2
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            bail!("dimension must be 2 or 3, got {}", self.dimension);
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            bail!("epsilon must lie in (0, 1/2], got {}", self.epsilon);
        }
        if self.dimension == 3 && self.epsilon > MAX_EPSILON_3D {
            bail!("3D data needs epsilon <= {MAX_EPSILON_3D}, got {}", self.epsilon);
        }
        if let Some(a) = self.amplitude {
            if !(a > 0.0 && a.is_finite()) {
                bail!("amplitude must be positive, got {a}");
            }
        }
        if !(self.perturbation.h3_norm >= 0.0) || !(self.perturbation.radius > 0.0) {
            bail!("perturbation needs h3_norm >= 0 and radius > 0");
        }
        if !(self.condition.c > 0.0 && self.condition.delta > 0.0 && self.condition.young_constant > 0.0) {
            bail!("condition constants must be positive");
        }
        if self.linear.samples < 2 {
            bail!("linear.samples must be at least 2");
        }
        if !(self.verify.dt > 0.0 && self.verify.t >= 0.0) || self.verify.pairs == 0 {
            bail!("verify needs dt > 0, t >= 0 and at least one pair");
        }
        if self.output.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            bail!("snapshot times must be non-negative");
        }
        self.sim().validate()?;
        Ok(())
    }

    pub fn amplitude(&self) -> Amplitude {
        self.amplitude.map_or(Amplitude::Law, Amplitude::Fixed)
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            nu: self.nu,
            lambda: self.lambda,
            cfl: self.cfl,
            dt_max: self.dt_max,
            t_end: self.t_end,
            stride: self.stride,
            mode: match self.mode {
                ModeName::Full => Mode::Full,
                ModeName::Perturbation => Mode::Perturbation,
            },
            guard: self.guards.h3_factor,
            nonlinear: true,
        }
    }

    /// Copy with `ε`, `ν`, `λ` replaced and the grid reset to its defaults.
    pub fn at_point(&self, epsilon: f64, nu: f64, lambda: f64) -> Result<Self> {
        let mut c = self.clone();
        c.epsilon = epsilon;
        c.nu = nu;
        c.lambda = lambda;
        c.grid = GridConfig { dealias: self.grid.dealias, ..Default::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn sweep_points(&self) -> Vec<(f64, f64, f64)> {
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let mut pts = Vec::new();
        for e in or(&self.sweep.epsilon, self.epsilon) {
            for n in or(&self.sweep.nu, self.nu) {
                for l in or(&self.sweep.lambda, self.lambda) {
                    pts.push((e, n, l));
                }
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = Config::parse("epsilon = 0.25").unwrap();
        assert_eq!(c.dimension, 2);
        assert_eq!(c.mode, ModeName::Perturbation);
        assert_eq!(c.sim().guard, 1e6);
        assert_eq!(c.report.besov[1][1], f64::INFINITY);
        assert_eq!(c.sweep_points(), vec![(0.25, 1.0, 1.0)]);
    }

    #[test]
    fn grid_keys_use_capitals() {
        let c = Config::parse("epsilon = 0.25\n[grid]\nL = 16\nN = 128\n").unwrap();
        assert_eq!(c.grid.l, Some(16.0));
        assert_eq!(c.grid.n, Some(128));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("epsilon = 0.25\nbogus = 1").is_err());
        assert!(Config::parse("epsilon = 0.7").is_err());
        assert!(Config::parse("epsilon = 0.25\ndimension = 3").is_err());
        assert!(Config::parse("epsilon = 0.25\nnu = -1").is_err());
        assert!(Config::parse("epsilon = 0.25\nmode = \"sideways\"").is_err());
    }

    #[test]
    fn sweep_is_a_cartesian_product() {
        let c = Config::parse("epsilon = 0.25\n[sweep]\nepsilon = [0.3, 0.25]\nnu = [1, 2]\n").unwrap();
        let p = c.sweep_points();
        assert_eq!(p.len(), 4);
        assert_eq!(p[3], (0.25, 2.0, 1.0));
    }
}
