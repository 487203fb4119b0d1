//! Config ingestion, presets, reports, parameter sweeps and the recoil
//! calculator behind the command-line driver.

mod config;
mod presets;
mod recoil;
mod report;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    ComplexInput, ConfigFile, EnvironmentSection, ErrorSection, Modes, ObserverSection, ProbeSection, ReportSection,
};
pub use presets::{preset, preset_names, PRESETS};
pub use recoil::{recoil_momentum, yb_scenario, RecoilInput, RecoilResult, AMU_KG, EV_J, YB171_AMU};
pub use report::{run, run_config, sizing_notes, RunReport, SizingNote};
pub use sweep::{parse_sweep_csv, sweep, sweep_csv, SweepParam, SweepRow};

use crate::engines::EngineError;
use crate::statistics::StatsError;

#[derive(Debug, Error)]
pub enum ToolkitError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("unknown sweep parameter {0:?}")]
    UnknownParameter(String),

    #[error("recoil input: {0}")]
    Recoil(String),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Stats(#[from] StatsError),

    #[error("table: {0}")]
    Table(String),
}

impl ToolkitError {
    /// Process exit code: 2 for bad input, 3 for a violated invariant, 1
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolkitError::Config { .. }
            | ToolkitError::UnknownPreset(_)
            | ToolkitError::UnknownParameter(_)
            | ToolkitError::Recoil(_)
            | ToolkitError::Engine(EngineError::Config { .. }) => 2,
            ToolkitError::Engine(EngineError::Invariant { .. }) => 3,
            ToolkitError::Stats(StatsError::Engine(EngineError::Invariant { .. })) => 3,
            _ => 1,
        }
    }
}
