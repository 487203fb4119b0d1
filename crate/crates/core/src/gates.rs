//! Fixed circuit elements: Hadamard, CNOT, the two-qubit interference
//! rotation, its error-corrected variant and the second-qubit projector.
//!
//! Two-qubit operators use the ordering `|q1 q2⟩`, i.e. flat index
//! `2·q1 + q2`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{Operator, ProjectiveMeasurement, C64, ALG_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("error probabilities ({p_up}, {p_down}) must be non-negative with p_up + p_down < 1")]
    InvalidErrorRates { p_up: f64, p_down: f64 },

    #[error("|alpha_rot|^2 = {0} lies outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("|alpha|^2 + |beta|^2 = {0}, expected 1")]
    NotNormalized(f64),
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn op(dims: Vec<usize>, rows: &[f64]) -> Operator {
    Operator::new(dims, rows.iter().map(|&x| re(x)).collect()).expect("static gate is well-formed")
}

pub fn hadamard() -> Operator {
    let h = FRAC_1_SQRT_2;
    op(vec![2], &[h, h, h, -h])
}

pub fn pauli_x() -> Operator {
    op(vec![2], &[0.0, 1.0, 1.0, 0.0])
}

/// CNOT with the first qubit as control.
pub fn cnot() -> Operator {
    #[rustfmt::skip]
    let m = [
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    ];
    op(vec![2, 2], &m)
}

/// Coefficients of the generalized rotation
/// `|00⟩ → α|00⟩ + β|11⟩`, `|11⟩ → β|00⟩ − α|11⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub alpha: C64,
    pub beta: C64,
}

impl RotationParams {
    pub fn new(alpha: C64, beta: C64) -> Result<Self, GateError> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > ALG_TOL {
            return Err(GateError::NotNormalized(n));
        }
        Ok(RotationParams { alpha, beta })
    }

    /// Balanced rotation with `α = β = 1/√2`.
    pub fn standard() -> Self {
        RotationParams { alpha: re(FRAC_1_SQRT_2), beta: re(FRAC_1_SQRT_2) }
    }

    /// Weights chosen from asymmetric misidentification rates, both
    /// coefficients real and non-negative:
    /// `|α|² = ½ (1 − 2 p_down) / (1 − p_up − p_down)`.
    pub fn corrected(p_up: f64, p_down: f64) -> Result<Self, GateError> {
        let ok = p_up.is_finite() && p_down.is_finite() && p_up >= 0.0 && p_down >= 0.0 && p_up + p_down < 1.0;
        if !ok {
            return Err(GateError::InvalidErrorRates { p_up, p_down });
        }
        let a2 = 0.5 * (1.0 - 2.0 * p_down) / (1.0 - p_up - p_down);
        if !(0.0..=1.0).contains(&a2) {
            return Err(GateError::AlphaOutOfRange(a2));
        }
        Ok(RotationParams { alpha: re(a2.sqrt()), beta: re((1.0 - a2).sqrt()) })
    }

    /// `|α|²`.
    pub fn alpha_sqr(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn operator(&self) -> Operator {
        let (a, b) = (self.alpha, self.beta);
        let (z, o) = (re(0.0), re(1.0));
        // columns are images of |00⟩, |01⟩, |10⟩, |11⟩
        #[rustfmt::skip]
        let m = vec![
            a, z, z, b,
            z, o, z, z,
            z, z, o, z,
            b, z, z, -a,
        ];
        Operator::new(vec![2, 2], m).expect("rotation is well-formed")
    }
}

/// `|00⟩ → (|00⟩+|11⟩)/√2`, `|11⟩ → (|00⟩−|11⟩)/√2`, identity on `|01⟩`, `|10⟩`.
pub fn rotation_r() -> Operator {
    RotationParams::standard().operator()
}

pub fn corrected_rotation(p_up: f64, p_down: f64) -> Result<Operator, GateError> {
    Ok(RotationParams::corrected(p_up, p_down)?.operator())
}

/// `|00⟩⟨00| + |10⟩⟨10|`.
pub fn projector_q2_0() -> Operator {
    #[rustfmt::skip]
    let m = [
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
    ];
    op(vec![2, 2], &m)
}

/// Complement of [`projector_q2_0`].
pub fn projector_q2_1() -> Operator {
    #[rustfmt::skip]
    let m = [
        0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ];
    op(vec![2, 2], &m)
}

/// Measurement of the second qubit expressed on the two-qubit register.
pub fn second_qubit_measurement(q1: usize, q2: usize) -> ProjectiveMeasurement {
    ProjectiveMeasurement::new(vec![projector_q2_0(), projector_q2_1()], vec![q1, q2])
        .expect("second-qubit projectors are complete")
}
