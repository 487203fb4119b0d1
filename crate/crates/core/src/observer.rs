//! The unconscious observer: an internal register whose two post-measurement
//! states overlap by a configurable complex `D`, the entangling interaction
//! that writes the first qubit's value into it, and the verification verdict
//! produced by the weak probe.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{Operator, QError, StateVector, ALG_TOL, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("observer dimension must be at least 2, got {0}")]
    DimTooSmall(usize),

    #[error("overlap magnitude {0} exceeds 1")]
    OverlapTooLarge(f64),

    #[error("mode coefficient lists must be non-empty, of equal length, with non-zero total weight")]
    BadModes,

    #[error(transparent)]
    Algebra(#[from] QError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObserverModel {
    dim: usize,
    pre_state: StateVector,
    post_state_0: StateVector,
    post_state_1: StateVector,
    d: C64,
}

fn basis_pair(dim: usize, d: C64) -> Result<(StateVector, StateVector), ObserverError> {
    let mag = d.norm();
    if !mag.is_finite() || mag > 1.0 + ALG_TOL {
        return Err(ObserverError::OverlapTooLarge(mag));
    }
    let e0 = StateVector::basis(vec![dim], 0)?;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = d;
    amps[1] = C64::new((1.0 - d.norm_sqr()).max(0.0).sqrt(), 0.0);
    let p1 = StateVector::normalized(vec![dim], amps)?;
    Ok((e0, p1))
}

/// Build an observer of dimension `dim` whose post states overlap by `d`.
pub fn make_observer(dim: usize, d: C64) -> Result<ObserverModel, ObserverError> {
    ObserverModel::new(dim, d)
}

impl ObserverModel {
    /// `pre = post₀ = e₀`, `post₁ = D e₀ + √(1−|D|²) e₁`.
    pub fn new(dim: usize, d: C64) -> Result<Self, ObserverError> {
        if dim < 2 {
            return Err(ObserverError::DimTooSmall(dim));
        }
        let (post_state_0, post_state_1) = basis_pair(dim, d)?;
        let d = post_state_0.inner(&post_state_1)?;
        Ok(ObserverModel { dim, pre_state: post_state_0.clone(), post_state_0, post_state_1, d })
    }

    /// Effective single-mode observer from well-eigenmode coefficients:
    /// `D = Σ|Cᵢ|² Dᵢ / Σ|Cᵢ|²`.
    ///
    /// This is the narrow-mode approximation, not an exact reduction.
    pub fn from_modes(dim: usize, c: &[C64], d: &[C64]) -> Result<Self, ObserverError> {
        if c.is_empty() || c.len() != d.len() {
            return Err(ObserverError::BadModes);
        }
        let w: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        if w <= 0.0 || !w.is_finite() {
            return Err(ObserverError::BadModes);
        }
        let eff: C64 = c.iter().zip(d).map(|(ci, di)| ci.norm_sqr() * di).sum::<C64>() / w;
        Self::new(dim, eff)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pre_state(&self) -> &StateVector {
        &self.pre_state
    }

    pub fn post_state(&self, branch: usize) -> &StateVector {
        if branch == 0 {
            &self.post_state_0
        } else {
            &self.post_state_1
        }
    }

    /// Cached overlap `⟨post₀|post₁⟩`.
    pub fn overlap(&self) -> C64 {
        self.d
    }

    /// Restore the pointer state between trials.
    pub fn pointer_reset(&self) -> ObserverModel {
        let mut out = self.clone();
        out.pre_state = StateVector::basis(vec![self.dim], 0).expect("dim >= 2");
        out
    }

    /// Same observer with `post₁` rotated by a global phase `θ`, so that the
    /// overlap becomes `D e^{iθ}`. Models an unstable pointer.
    pub fn with_phase_jitter(&self, theta: f64) -> ObserverModel {
        let ph = C64::from_polar(1.0, theta);
        let amps = self.post_state_1.amps().iter().map(|z| z * ph).collect();
        let post_state_1 = StateVector::new(vec![self.dim], amps).expect("phase keeps the norm");
        ObserverModel { d: self.d * ph, post_state_1, ..self.clone() }
    }

    /// `|b⟩ ⊗ pre → |b⟩ ⊗ post_b`, acting on `qubit ⊗ observer`.
    pub fn interaction_unitary(&self) -> Operator {
        let u0 = Operator::mapping(&self.pre_state, &self.post_state_0).expect("same dims");
        let u1 = Operator::mapping(&self.pre_state, &self.post_state_1).expect("same dims");
        Operator::controlled(&[u0, u1]).expect("blocks share dims")
    }

    /// Controlled update `post_b → post'_b` after which the two branch
    /// states overlap by `d_prime`. Used for probe back-action.
    pub fn backaction_unitary(&self, d_prime: C64) -> Result<Operator, ObserverError> {
        let (q0, q1) = basis_pair(self.dim, d_prime)?;
        let u0 = Operator::mapping(&self.post_state_0, &q0)?;
        let u1 = Operator::mapping(&self.post_state_1, &q1)?;
        Ok(Operator::controlled(&[u0, u1])?)
    }
}

impl Serialize for ObserverModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ObserverModel", 2)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("d", &self.d)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferredPath {
    Up,
    Down,
    Indeterminate,
}

/// Verdict on whether a probe event certifies the observer as a measuring
/// device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub lambda: f64,
    pub qualifies: bool,
    pub inferred_path: InferredPath,
}

impl VerificationOutcome {
    /// `qualifies ⇔ Λ > Λ₀`; the path is the dominant branch when qualified.
    pub fn from_amplitudes(f: C64, f_prime: C64, lambda: f64, lambda_0: f64) -> Self {
        let qualifies = lambda > lambda_0;
        let inferred_path = if !qualifies {
            InferredPath::Indeterminate
        } else if f_prime.norm() > f.norm() {
            InferredPath::Up
        } else {
            InferredPath::Down
        };
        VerificationOutcome { lambda, qualifies, inferred_path }
    }
}
