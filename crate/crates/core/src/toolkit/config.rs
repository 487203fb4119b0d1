//! TOML experiment description and its translation into an
//! [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ToolkitError;
use crate::engines::{Engine, EngineError, ExperimentConfig, RotationKind, Variant};
use crate::environment::{EnvironmentModel, ErrorModel, PointerBasis};
use crate::observer::ObserverModel;
use crate::probe::{ProbeModel, RadialProfile, TabulatedProfile, LAMBDA_0};
use crate::qcore::C64;

/// A complex number written as `0.3`, `[0.3, 0.4]` or `{ re = 0.3, im = 0.4 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl ComplexInput {
    pub fn value(&self) -> C64 {
        match *self {
            ComplexInput::Real(re) => C64::new(re, 0.0),
            ComplexInput::Pair([re, im]) | ComplexInput::Parts { re, im } => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexInput {
    fn from(z: C64) -> Self {
        if z.im == 0.0 {
            ComplexInput::Real(z.re)
        } else {
            ComplexInput::Pair([z.re, z.im])
        }
    }
}

fn default_dim() -> usize {
    2
}

fn default_true() -> bool {
    true
}

fn default_lambda_0() -> f64 {
    LAMBDA_0
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Overlap of the two post-measurement states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<ComplexInput>,
    /// Mode weights and overlaps; replace `d` by their weighted mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Modes>,
    #[serde(default = "default_true")]
    pub pointer_reset: bool,
    #[serde(default)]
    pub jitter_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modes {
    pub c: Vec<ComplexInput>,
    pub d: Vec<ComplexInput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_down: Option<f64>,
    /// Two-column `(r, density)` tables; relative paths resolve against the
    /// config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_table: Option<PathBuf>,
    pub r_max: f64,
    #[serde(default)]
    pub phi_f: f64,
    #[serde(default = "default_lambda_0")]
    pub lambda_0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_prime: Option<ComplexInput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSection {
    pub p_err_up: f64,
    pub p_err_down: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub tau: f64,
    #[serde(default)]
    pub t_meas: f64,
    #[serde(default)]
    pub pointer_basis: PointerBasis,
    /// Measurement times for the decoherence profile in reports.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profile_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Replicate campaigns for a power estimate; 0 skips it.
    #[serde(default)]
    pub replicates: u64,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { alpha: default_alpha(), replicates: 0 }
    }
}

/// Top-level experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub engine: Engine,
    pub n_trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rotation: RotationKind,
    #[serde(default)]
    pub variant: Variant,
    pub observer: ObserverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentSection>,
    #[serde(default)]
    pub report: ReportSection,
    /// Directory used to resolve relative table paths; not part of the file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn cfg_err(path: &str, message: impl Into<String>) -> ToolkitError {
    ToolkitError::Config { path: path.into(), message: message.into() }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ToolkitError> {
        let de = toml::Deserializer::parse(text).map_err(|e| cfg_err("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            cfg_err(if path == "." { "<document>" } else { &path }, inner.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ToolkitError> {
        let text = std::fs::read_to_string(path).map_err(|e| ToolkitError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let mut c = Self::from_toml(&text)?;
        c.base_dir = path.parent().map(Path::to_path_buf);
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn profile(&self, which: &str, sigma: Option<f64>, table: &Option<PathBuf>, analytic: fn(f64) -> RadialProfile) -> Result<RadialProfile, ToolkitError> {
        match (sigma, table) {
            (Some(_), Some(_)) => Err(cfg_err(&format!("probe.{which}_table"), format!("give either sigma_{which} or {which}_table, not both"))),
            (Some(s), None) => Ok(analytic(s)),
            (None, Some(t)) => {
                let path = self.resolve(t);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| cfg_err(&format!("probe.{which}_table"), format!("{}: {e}", path.display())))?;
                let tab = TabulatedProfile::parse(&text).map_err(|e| cfg_err(&format!("probe.{which}_table"), e.to_string()))?;
                Ok(RadialProfile::Table(tab))
            }
            (None, None) => Err(cfg_err(&format!("probe.sigma_{which}"), "missing radial profile")),
        }
    }

    /// Validate and build the runnable configuration.
    pub fn build(&self) -> Result<ExperimentConfig, ToolkitError> {
        let o = &self.observer;
        let observer = match (&o.d, &o.modes) {
            (Some(_), Some(_)) => return Err(cfg_err("observer.modes", "give either d or modes, not both")),
            (Some(d), None) => ObserverModel::new(o.dim, d.value()).map_err(|e| cfg_err("observer.d", e.to_string()))?,
            (None, Some(m)) => {
                let c: Vec<C64> = m.c.iter().map(ComplexInput::value).collect();
                let d: Vec<C64> = m.d.iter().map(ComplexInput::value).collect();
                ObserverModel::from_modes(o.dim, &c, &d).map_err(|e| cfg_err("observer.modes", e.to_string()))?
            }
            (None, None) => return Err(cfg_err("observer.d", "missing overlap")),
        };
        let mut cfg = ExperimentConfig::new(self.engine, observer).with_trials(self.n_trials).with_seed(self.seed);
        cfg.rotation = self.rotation;
        cfg.variant = self.variant;
        cfg.pointer_reset = o.pointer_reset;
        cfg.jitter_sigma = o.jitter_sigma;

        if let Some(p) = &self.probe {
            let up = self.profile("up", p.sigma_up, &p.up_table, |sigma| RadialProfile::HalfGaussian { sigma })?;
            let down = self.profile("down", p.sigma_down, &p.down_table, |sigma| RadialProfile::Maxwell { sigma })?;
            let mut m = ProbeModel::with_profiles(up, down, p.r_max, p.phi_f, p.lambda_0).map_err(|e| cfg_err("probe", e.to_string()))?;
            if let Some(dp) = &p.d_prime {
                m = m.with_d_prime(dp.value()).map_err(|e| cfg_err("probe.d_prime", e.to_string()))?;
            }
            cfg.probe = Some(m);
        }
        if let Some(e) = &self.error {
            cfg.error = Some(ErrorModel::new(e.p_err_up, e.p_err_down).map_err(|x| cfg_err("error", x.to_string()))?);
        }
        if let Some(e) = &self.environment {
            cfg.environment = Some(EnvironmentModel::new(e.tau, e.t_meas).map_err(|x| cfg_err("environment", x.to_string()))?);
            if e.profile_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(cfg_err("environment.profile_times", "times must be finite and non-negative"));
            }
        }
        if !(self.report.alpha > 0.0 && self.report.alpha < 1.0) {
            return Err(cfg_err("report.alpha", "must lie in (0, 1)"));
        }
        cfg.validate().map_err(|e| match e {
            EngineError::Config { field, message } => cfg_err(&field, message),
            other => cfg_err("<config>", other.to_string()),
        })?;
        Ok(cfg)
    }
}
