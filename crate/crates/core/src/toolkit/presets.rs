use super::config::*;
use super::ToolkitError;
use crate::engines::{Engine, RotationKind, Variant};
use crate::environment::PointerBasis;
use crate::probe::LAMBDA_0;

/// Built-in scenario names, in listing order.
pub const PRESETS: &[(&str, &str)] = &[
    ("copenhagen-baseline", "collapse engine, D = 0.1, no probe"),
    ("unitary-D0.1", "unitary engine, D = 0.1, four times the required trials"),
    ("probed-Λ4.6", "weak probe with Λ₀ = 4.6 and back-action D′ = 0.5"),
    ("conditional-extension", "second qubit prepared from the photon position"),
    ("decoherence-profile", "unitary engine, D = 0.2, dephasing with τ = 1"),
    ("error-asymmetric", "collapse engine, p_err = (0.02, 0.05), corrected rotation"),
    ("gate-calibration", "unitary engine, D = 1, gate systematics"),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

fn observer(d: f64) -> ObserverSection {
    ObserverSection { dim: 2, d: Some(ComplexInput::Real(d)), modes: None, pointer_reset: true, jitter_sigma: 0.0 }
}

fn base(engine: Engine, d: f64, n_trials: u64) -> ConfigFile {
    ConfigFile {
        engine,
        n_trials,
        seed: 20240611,
        rotation: RotationKind::Standard,
        variant: Variant::Entangled,
        observer: observer(d),
        probe: None,
        error: None,
        environment: None,
        report: ReportSection::default(),
        base_dir: None,
    }
}

fn probe(d_prime: Option<f64>) -> ProbeSection {
    ProbeSection {
        sigma_up: Some(1.0),
        sigma_down: Some(3.0),
        up_table: None,
        down_table: None,
        r_max: 10.0,
        phi_f: 0.0,
        lambda_0: LAMBDA_0,
        d_prime: d_prime.map(ComplexInput::Real),
    }
}

/// The named scenario as an editable config.
pub fn preset(name: &str) -> Result<ConfigFile, ToolkitError> {
    Ok(match name {
        "copenhagen-baseline" => base(Engine::Collapse, 0.1, 100_000),
        "unitary-D0.1" => base(Engine::Unitary, 0.1, 1600),
        "probed-Λ4.6" | "probed-lambda4.6" => {
            let mut c = base(Engine::Unitary, 0.5, 200_000);
            c.probe = Some(probe(Some(0.5)));
            c
        }
        "conditional-extension" => {
            let mut c = base(Engine::Unitary, 0.5, 100_000);
            c.variant = Variant::Conditional;
            c.probe = Some(probe(None));
            c
        }
        "decoherence-profile" => {
            let mut c = base(Engine::Unitary, 0.2, 100_000);
            c.environment = Some(EnvironmentSection {
                tau: 1.0,
                t_meas: 1.0,
                pointer_basis: PointerBasis::Computational,
                profile_times: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            });
            c
        }
        "error-asymmetric" => {
            let mut c = base(Engine::Collapse, 0.2, 100_000);
            c.error = Some(ErrorSection { p_err_up: 0.02, p_err_down: 0.05 });
            c.rotation = RotationKind::Corrected;
            c
        }
        "gate-calibration" => base(Engine::Unitary, 1.0, 10_000),
        other => return Err(ToolkitError::UnknownPreset(other.to_string())),
    })
}
