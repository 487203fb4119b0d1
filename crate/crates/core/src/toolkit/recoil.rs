//! Momentum kick on the quantum dot from an ion that loses part of its
//! energy passing through it.

use serde::{Deserialize, Serialize};

use super::ToolkitError;

/// Unified atomic mass unit in kilograms.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Electronvolt in joules.
pub const EV_J: f64 = 1.602_176_634e-19;
/// Atomic mass of ¹⁷¹Yb in atomic mass units.
pub const YB171_AMU: f64 = 170.936_331;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoilInput {
    /// Ion mass, kg.
    pub m_ion: f64,
    /// Initial ion kinetic energy, J.
    pub e_initial: f64,
    /// Fraction of the energy the ion keeps after passing.
    pub f: f64,
    /// Total quantum-dot mass, kg.
    pub m_qd: f64,
}

impl RecoilInput {
    /// Build from masses in atomic mass units and the energy in eV.
    pub fn from_atomic_units(m_ion_amu: f64, e_initial_ev: f64, f: f64, m_qd_amu: f64) -> Self {
        RecoilInput { m_ion: m_ion_amu * AMU_KG, e_initial: e_initial_ev * EV_J, f, m_qd: m_qd_amu * AMU_KG }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoilResult {
    /// kg·m/s
    pub momentum: f64,
    /// m/s
    pub velocity: f64,
}

/// `p = √(2 m E (1 − f))`, `v = p / M`.
pub fn recoil_momentum(input: &RecoilInput) -> Result<RecoilResult, ToolkitError> {
    let RecoilInput { m_ion, e_initial, f, m_qd } = *input;
    for (name, v) in [("m_ion", m_ion), ("e_initial", e_initial), ("m_qd", m_qd)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ToolkitError::Recoil(format!("{name} must be positive, got {v}")));
        }
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(ToolkitError::Recoil(format!("f must lie in [0, 1], got {f}")));
    }
    let momentum = (2.0 * m_ion * e_initial * (1.0 - f)).sqrt();
    Ok(RecoilResult { momentum, velocity: momentum / m_qd })
}

/// The worked scenario: one ¹⁷¹Yb ion at 10⁻⁴ eV keeping 1% of its energy,
/// against a dot of `atoms` Yb-mass atoms.
pub fn yb_scenario(atoms: f64) -> RecoilInput {
    RecoilInput::from_atomic_units(YB171_AMU, 1e-4, 0.01, atoms * YB171_AMU)
}
