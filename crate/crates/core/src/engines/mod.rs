//! The full protocol under collapse and unitary semantics, per-trial
//! records, closed-form predictions and campaign aggregation.

mod campaign;
mod protocol;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use campaign::{run_campaign, run_campaign_sequential, run_trials, CampaignResult};
pub use protocol::Protocol;

use crate::environment::{analytic_p, EnvError, EnvironmentModel, ErrorModel};
use crate::gates::{GateError, RotationParams};
use crate::observer::{InferredPath, ObserverModel};
use crate::probe::{ProbeError, ProbeEvent, ProbeModel};
use crate::qcore::{QError, RandomStream, C64};

/// Largest allowed gap between a trial's closed-form probability and the
/// projector expectation on the simulated state.
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Collapse,
    Unitary,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Collapse => "collapse",
            Engine::Unitary => "unitary",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationKind {
    #[default]
    Standard,
    Corrected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// CNOT copy followed by the observer measurement.
    #[default]
    Entangled,
    /// Second qubit set from the photon position instead of a CNOT.
    Conditional,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("invariant violated in trial {trial}: {detail}")]
    Invariant { trial: u64, detail: String },

    #[error("campaign produced no qualified trials")]
    NoQualified,

    #[error(transparent)]
    Algebra(#[from] QError),

    #[error(transparent)]
    Probe(#[from] ProbeError),

    #[error(transparent)]
    Environment(#[from] EnvError),

    #[error(transparent)]
    Gate(#[from] GateError),
}

fn config_err(field: &str, message: impl Into<String>) -> EngineError {
    EngineError::Config { field: field.into(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub observer: ObserverModel,
    pub probe: Option<ProbeModel>,
    pub error: Option<ErrorModel>,
    pub environment: Option<EnvironmentModel>,
    pub rotation: RotationKind,
    pub variant: Variant,
    pub n_trials: u64,
    pub seed: u64,
    /// Return the observer to its pointer state between trials.
    pub pointer_reset: bool,
    /// Standard deviation of the per-trial phase on `post₁` when the pointer
    /// is not reset.
    pub jitter_sigma: f64,
}

impl ExperimentConfig {
    pub fn new(engine: Engine, observer: ObserverModel) -> Self {
        ExperimentConfig {
            engine,
            observer,
            probe: None,
            error: None,
            environment: None,
            rotation: RotationKind::Standard,
            variant: Variant::Entangled,
            n_trials: 1000,
            seed: 0,
            pointer_reset: true,
            jitter_sigma: 0.0,
        }
    }

    pub fn with_trials(mut self, n: u64) -> Self {
        self.n_trials = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_probe(mut self, probe: ProbeModel) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn with_error(mut self, err: ErrorModel) -> Self {
        self.error = Some(err);
        self
    }

    pub fn with_environment(mut self, env: EnvironmentModel) -> Self {
        self.environment = Some(env);
        self
    }

    pub fn with_rotation(mut self, rotation: RotationKind) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// Disable the pointer reset, with per-trial phase noise `sigma`.
    pub fn with_unstable_pointer(mut self, sigma: f64) -> Self {
        self.pointer_reset = false;
        self.jitter_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n_trials == 0 {
            return Err(config_err("n_trials", "must be at least 1"));
        }
        if self.rotation == RotationKind::Corrected && self.error.is_none() {
            return Err(config_err("rotation", "corrected rotation requires an error model"));
        }
        if self.variant == Variant::Conditional && self.probe.is_none() {
            return Err(config_err("variant", "conditional preparation requires a probe"));
        }
        if self.probe.is_some() && self.error.is_some() {
            return Err(config_err("error", "combining a probe with misidentification errors is not supported"));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(config_err("observer.jitter_sigma", "must be finite and non-negative"));
        }
        if let Some(p) = &self.probe {
            p.clone().validated()?;
        }
        if let Some(e) = &self.error {
            e.validated()?;
        }
        if let Some(e) = &self.environment {
            e.validated()?;
        }
        self.rotation_params()?;
        Ok(())
    }

    pub fn rotation_params(&self) -> Result<RotationParams, EngineError> {
        match (self.rotation, &self.error) {
            (RotationKind::Standard, _) => Ok(RotationParams::standard()),
            (RotationKind::Corrected, Some(e)) => Ok(RotationParams::corrected(e.p_err_up, e.p_err_down)?),
            (RotationKind::Corrected, None) => Err(config_err("rotation", "corrected rotation requires an error model")),
        }
    }

    /// Residual coherence `e^{−t/τ}` at the measurement time, 1 without an
    /// environment.
    pub fn coherence(&self) -> f64 {
        self.environment.map_or(1.0, |e| e.coherence_at_measurement())
    }

    /// Mean of `e^{iθ}` over the pointer phase noise.
    pub fn jitter_factor(&self) -> f64 {
        if self.pointer_reset {
            1.0
        } else {
            (-0.5 * self.jitter_sigma * self.jitter_sigma).exp()
        }
    }

    /// Whether per-trial pointer noise is active.
    pub fn jitter_active(&self) -> bool {
        !self.pointer_reset && self.jitter_sigma > 0.0
    }

    /// Hex SHA-256 of the canonical JSON form of every field.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub engine: Engine,
    /// Branch selected by the collapse of the first qubit.
    pub observer_outcome: Option<u8>,
    /// Value written to the second qubit by the observer, after errors.
    pub recorded: Option<u8>,
    pub probe_event: Option<ProbeEvent>,
    pub inferred_path: Option<InferredPath>,
    pub qualifies: bool,
    pub final_q2: u8,
    pub p_theory: f64,
    /// Observer overlap in effect for this trial.
    pub overlap: C64,
}

pub fn run_collapse_trial(cfg: &ExperimentConfig, rng: &mut RandomStream) -> Result<TrialRecord, EngineError> {
    if cfg.engine != Engine::Collapse {
        return Err(config_err("engine", "run_collapse_trial needs the collapse engine"));
    }
    Protocol::new(cfg)?.trial(0, rng)
}

pub fn run_unitary_trial(cfg: &ExperimentConfig, rng: &mut RandomStream) -> Result<TrialRecord, EngineError> {
    if cfg.engine != Engine::Unitary {
        return Err(config_err("engine", "run_unitary_trial needs the unitary engine"));
    }
    Protocol::new(cfg)?.trial(0, rng)
}

pub fn run_conditional_trial(cfg: &ExperimentConfig, rng: &mut RandomStream) -> Result<TrialRecord, EngineError> {
    if cfg.variant != Variant::Conditional {
        return Err(config_err("variant", "run_conditional_trial needs the conditional variant"));
    }
    Protocol::new(cfg)?.trial(0, rng)
}

/// `p(q2 = 0)` for a single probe event with rotation weight `a` and
/// coherence `lambda`.
pub fn probed_probability(
    engine: Engine,
    variant: Variant,
    ev: &ProbeEvent,
    path: InferredPath,
    d_prime: C64,
    a: f64,
    lambda: f64,
) -> f64 {
    let (pf, pfp) = (ev.f.norm_sqr(), ev.f_prime.norm_sqr());
    match variant {
        Variant::Conditional => match path {
            InferredPath::Up => pfp * (1.0 - a),
            InferredPath::Down | InferredPath::Indeterminate => pf * a + pfp,
        },
        Variant::Entangled => {
            let base = pf * a + pfp * (1.0 - a);
            match engine {
                Engine::Collapse => base,
                Engine::Unitary if ev.lambda.is_infinite() => base,
                Engine::Unitary => base + 2.0 * (a * (1.0 - a)).sqrt() * lambda * (ev.f.conj() * ev.f_prime * d_prime).re,
            }
        }
    }
}

/// Closed-form `p(q2 = 0)` among counted trials.
///
/// Without a probe this is the usual analytic value. With a probe it is the
/// qualified-region average of the per-event probability under the branch
/// mixture `½(g_down + g_up)`, by adaptive quadrature.
pub fn closed_form(cfg: &ExperimentConfig) -> Result<f64, EngineError> {
    cfg.validate()?;
    let a = cfg.rotation_params()?.alpha_sqr();
    let lambda = cfg.coherence();
    let d = cfg.observer.overlap() * cfg.jitter_factor();
    match &cfg.probe {
        None => Ok(analytic_p(cfg.engine, d, cfg.error.as_ref(), a, lambda)),
        Some(probe) => {
            let d_prime = probe.d_prime.unwrap_or(d);
            let avg = probe.qualified_average(0.5, 0.5, |ev| {
                let path = if ev.f_prime.norm() > ev.f.norm() { InferredPath::Up } else { InferredPath::Down };
                probed_probability(cfg.engine, cfg.variant, ev, path, d_prime, a, lambda)
            });
            avg.ok_or(EngineError::NoQualified)
        }
    }
}
