//! Environment-induced dephasing in the computational pointer basis and the
//! observer misidentification model.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engines::Engine;
use crate::qcore::{DensityMatrix, Operator, QError, C64};
use crate::statistics::{required_trials, RequiredTrials};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("tau must be positive and finite, got {0}")]
    BadTau(f64),

    #[error("time must be non-negative and finite, got {0}")]
    BadTime(f64),

    #[error("error probability {name} = {value} outside [0, 0.5)")]
    BadErrorRate { name: &'static str, value: f64 },

    #[error("time grid is empty")]
    EmptyTimes,

    #[error(transparent)]
    Algebra(#[from] QError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointerBasis {
    #[default]
    Computational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentModel {
    pub tau: f64,
    pub t_meas: f64,
    #[serde(default)]
    pub pointer_basis: PointerBasis,
}

impl EnvironmentModel {
    pub fn new(tau: f64, t_meas: f64) -> Result<Self, EnvError> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(EnvError::BadTau(tau));
        }
        check_time(t_meas)?;
        Ok(EnvironmentModel { tau, t_meas, pointer_basis: PointerBasis::Computational })
    }

    pub fn validated(self) -> Result<Self, EnvError> {
        Self::new(self.tau, self.t_meas)
    }

    /// Coherence factor `e^{−t/τ}`.
    pub fn coherence(&self, t: f64) -> f64 {
        (-t / self.tau).exp()
    }

    /// Coherence factor at the configured measurement time.
    pub fn coherence_at_measurement(&self) -> f64 {
        self.coherence(self.t_meas)
    }
}

fn check_time(t: f64) -> Result<(), EnvError> {
    if t.is_finite() && t >= 0.0 || t == f64::INFINITY {
        Ok(())
    } else {
        Err(EnvError::BadTime(t))
    }
}

/// Misidentification probabilities of the observer, conditional on the true
/// value of the first qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// `|0⟩` recorded as `|1⟩`.
    pub p_err_up: f64,
    /// `|1⟩` recorded as `|0⟩`.
    pub p_err_down: f64,
}

/// Rates above this are outside the small-error regime of the analysis.
pub const ERROR_REGIME_WARN: f64 = 0.1;

impl ErrorModel {
    pub fn new(p_err_up: f64, p_err_down: f64) -> Result<Self, EnvError> {
        for (name, value) in [("p_err_up", p_err_up), ("p_err_down", p_err_down)] {
            if !(0.0..0.5).contains(&value) {
                return Err(EnvError::BadErrorRate { name, value });
            }
        }
        Ok(ErrorModel { p_err_up, p_err_down })
    }

    pub fn symmetric(p: f64) -> Result<Self, EnvError> {
        Self::new(p, p)
    }

    pub fn validated(self) -> Result<Self, EnvError> {
        Self::new(self.p_err_up, self.p_err_down)
    }

    pub fn warnings(&self) -> Vec<String> {
        [("p_err_up", self.p_err_up), ("p_err_down", self.p_err_down)]
            .into_iter()
            .filter(|(_, v)| *v > ERROR_REGIME_WARN)
            .map(|(n, v)| format!("{n} = {v} exceeds {ERROR_REGIME_WARN}; first-order error analysis may not apply"))
            .collect()
    }

    /// Coherent misidentification on `(q1, q2)` applied after the copy:
    /// `|00⟩ → √(1−u)|00⟩ + √u|01⟩`, `|11⟩ → √(1−d)|11⟩ + √d|10⟩`,
    /// completed to a rotation on each `q1` block.
    pub fn misidentification_unitary(&self) -> Operator {
        let (u, d) = (self.p_err_up, self.p_err_down);
        let (cu, su) = ((1.0 - u).sqrt(), u.sqrt());
        let (cd, sd) = ((1.0 - d).sqrt(), d.sqrt());
        let z = 0.0;
        #[rustfmt::skip]
        let m = [
            cu, -su, z,   z,
            su,  cu, z,   z,
            z,   z,  cd,  sd,
            z,   z,  -sd, cd,
        ];
        Operator::new(vec![2, 2], m.iter().map(|&x| C64::new(x, 0.0)).collect()).expect("block rotation is unitary")
    }
}

/// Scale every computational-basis coherence by `e^{−t/τ}`.
pub fn dephase(rho: &DensityMatrix, t: f64, env: &EnvironmentModel) -> Result<DensityMatrix, EnvError> {
    let all: Vec<usize> = (0..rho.dims().len()).collect();
    dephase_subsystems(rho, &all, t, env)
}

/// Dephase only coherences between different digits on `subsystems`.
pub fn dephase_subsystems(
    rho: &DensityMatrix,
    subsystems: &[usize],
    t: f64,
    env: &EnvironmentModel,
) -> Result<DensityMatrix, EnvError> {
    check_time(t)?;
    Ok(rho.scale_coherences(subsystems, env.coherence(t))?)
}

/// `½(1 + Re(D) e^{−t/τ})`.
pub fn rho00_at(d: C64, t: f64, env: &EnvironmentModel) -> f64 {
    0.5 * (1.0 + d.re * env.coherence(t))
}

/// Trials needed at measurement time `t`, `1/(ρ₀₀(t) − ½)²`.
pub fn required_n_at(d: C64, t: f64, env: &EnvironmentModel) -> RequiredTrials {
    required_trials(rho00_at(d, t, env) - 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub rho00: f64,
    pub required_n: RequiredTrials,
}

/// `ρ₀₀` and required trial count over a grid of measurement times.
pub fn time_profile(d: C64, env: &EnvironmentModel, times: &[f64]) -> Result<Vec<ProfilePoint>, EnvError> {
    if times.is_empty() {
        return Err(EnvError::EmptyTimes);
    }
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            Ok(ProfilePoint { t, rho00: rho00_at(d, t, env), required_n: required_n_at(d, t, env) })
        })
        .collect()
}

/// The collapse prediction over the same grid: `½` throughout.
pub fn collapse_reference(times: &[f64]) -> Vec<ProfilePoint> {
    times.iter().map(|&t| ProfilePoint { t, rho00: 0.5, required_n: RequiredTrials::Unbounded }).collect()
}

/// Closed form with the balanced rotation.
pub fn analytic_p_with_errors(engine: Engine, d: C64, err: &ErrorModel) -> f64 {
    analytic_p(engine, d, Some(err), 0.5, 1.0)
}

/// `p(q2 = 0)` without a probe for rotation weight `A = |α|²` and residual
/// coherence `λ`:
///
/// collapse `½[1 + A(d − u)]`;
/// unitary adds `√((1−u)(1−d)) √(A(1−A)) λ Re D`.
pub fn analytic_p(engine: Engine, d: C64, err: Option<&ErrorModel>, alpha_sqr: f64, lambda: f64) -> f64 {
    let (u, dn) = err.map_or((0.0, 0.0), |e| (e.p_err_up, e.p_err_down));
    let base = 0.5 * (1.0 + alpha_sqr * (dn - u));
    match engine {
        Engine::Collapse => base,
        Engine::Unitary => {
            base + ((1.0 - u) * (1.0 - dn)).sqrt() * (alpha_sqr * (1.0 - alpha_sqr)).sqrt() * lambda * d.re
        }
    }
}

/// Record bit as seen by a faulty observer.
pub fn inject_error<R: Rng + ?Sized>(bit: u8, err: &ErrorModel, rng: &mut R) -> u8 {
    flip_with(bit, err.p_err_up, err.p_err_down, rng)
}

/// As [`inject_error`] without the rate bounds, for stress tests.
pub fn flip_with<R: Rng + ?Sized>(bit: u8, p_up: f64, p_down: f64, rng: &mut R) -> u8 {
    let p = if bit == 0 { p_up } else { p_down };
    let u: f64 = rng.random();
    if u < p {
        1 - bit
    } else {
        bit
    }
}

/// Systematic gate error read off a run with the observer removed (`D = 1`),
/// where ideal gates give `p = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalibration {
    pub deviation: f64,
    pub stderr: f64,
}

pub fn gate_calibration(p_hat: f64, n: u64) -> GateCalibration {
    let n = n.max(1) as f64;
    GateCalibration { deviation: 1.0 - p_hat, stderr: (p_hat * (1.0 - p_hat) / n).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply, RandomStream, StateVector};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn env() -> EnvironmentModel {
        EnvironmentModel::new(1.0, 0.0).unwrap()
    }

    fn eq29(d: C64) -> DensityMatrix {
        // ½ [[1, D], [D*, 1]] on the {|00⟩, |11⟩} block
        DensityMatrix::new(vec![2], vec![c(0.5, 0.0), 0.5 * d, 0.5 * d.conj(), c(0.5, 0.0)]).unwrap()
    }

    #[test]
    fn dephase_limits() {
        let rho = eq29(c(0.4, 0.0));
        assert_eq!(dephase(&rho, 0.0, &env()).unwrap(), rho);
        let one = dephase(&rho, 1.0, &env()).unwrap();
        assert!((one.entry(0, 1) - c(0.2 * (-1f64).exp(), 0.0)).norm() < 1e-15);
        assert_eq!(one.entry(0, 0), rho.entry(0, 0));
        let inf = dephase(&rho, f64::INFINITY, &env()).unwrap();
        assert_eq!(inf.entries(), &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        inf.validate().unwrap();
        assert!(dephase(&rho, -1.0, &env()).is_err());
    }

    #[test]
    fn rho00_values() {
        let e = env();
        assert!((rho00_at(c(0.2, 0.0), 0.0, &e) - 0.6).abs() < 1e-15);
        assert!((rho00_at(c(0.2, 0.0), 2f64.ln(), &e) - 0.55).abs() < 1e-15);
        assert_eq!(rho00_at(c(0.7, 0.1), f64::INFINITY, &e), 0.5);
        assert!((rho00_at(c(0.3, 0.0), 0.0, &e) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn required_n_values() {
        let e = env();
        assert_eq!(required_n_at(c(0.1, 0.0), 0.0, &e), RequiredTrials::Finite(400));
        assert_eq!(required_n_at(c(0.1, 0.0), f64::INFINITY, &e), RequiredTrials::Unbounded);
        // 400·e² = 2955.6
        assert_eq!(required_n_at(c(0.1, 0.0), 1.0, &e), RequiredTrials::Finite(2956));
    }

    #[test]
    fn profile_is_monotone() {
        let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.3).collect();
        let prof = time_profile(c(0.2, 0.0), &env(), &times).unwrap();
        for w in prof.windows(2) {
            assert!((w[1].rho00 - 0.5).abs() < (w[0].rho00 - 0.5).abs());
            assert!(w[1].required_n >= w[0].required_n);
        }
        assert!(collapse_reference(&times).iter().all(|p| p.rho00 == 0.5));
        assert_eq!(time_profile(c(0.2, 0.0), &env(), &[]).unwrap_err(), EnvError::EmptyTimes);
    }

    #[test]
    fn symmetric_errors_leave_collapse_at_half() {
        for k in 0..5 {
            let p = 0.01 * k as f64;
            let e = ErrorModel::symmetric(p).unwrap();
            assert_eq!(analytic_p_with_errors(Engine::Collapse, c(0.3, 0.0), &e), 0.5);
        }
        let e = ErrorModel::new(0.0, 0.0).unwrap();
        assert!((analytic_p_with_errors(Engine::Unitary, c(0.1, 0.0), &e) - 0.55).abs() < 1e-15);
        let e = ErrorModel::symmetric(0.01).unwrap();
        assert!((analytic_p_with_errors(Engine::Unitary, c(0.1, 0.0), &e) - 0.55).abs() <= 0.02);
    }

    #[test]
    fn misidentification_unitary_is_unitary_and_flips() {
        let e = ErrorModel::new(0.2, 0.3).unwrap();
        let u = e.misidentification_unitary();
        assert!(u.is_unitary());
        let s = apply(&u, &StateVector::basis(vec![2, 2], 0).unwrap(), &[0, 1]).unwrap();
        assert!((s.amps()[1].norm_sqr() - 0.2).abs() < 1e-15);
        let s = apply(&u, &StateVector::basis(vec![2, 2], 3).unwrap(), &[0, 1]).unwrap();
        assert!((s.amps()[2].norm_sqr() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn error_model_bounds_and_warnings() {
        assert!(ErrorModel::new(0.5, 0.0).is_err());
        assert!(ErrorModel::new(-0.01, 0.0).is_err());
        assert!(ErrorModel::new(0.05, 0.02).unwrap().warnings().is_empty());
        assert_eq!(ErrorModel::new(0.2, 0.02).unwrap().warnings().len(), 1);
        assert!(EnvironmentModel::new(0.0, 1.0).is_err());
    }

    #[test]
    fn injection_rates() {
        let mut rng = RandomStream::from_seed(4);
        assert!((0..1000).all(|_| flip_with(0, 0.0, 0.5, &mut rng) == 0));
        assert!((0..1000).all(|_| flip_with(0, 1.0, 0.0, &mut rng) == 1));
        let e = ErrorModel::new(0.05, 0.0).unwrap();
        let n = 100_000;
        let flips = (0..n).filter(|_| inject_error(0, &e, &mut rng) == 1).count() as f64;
        let sigma = (0.05f64 * 0.95 / n as f64).sqrt();
        assert!((flips / n as f64 - 0.05).abs() < 4.0 * sigma);
    }
}
