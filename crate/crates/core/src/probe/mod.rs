//! Weak-measurement verification: a photon scattered by the observer lands
//! at radius `r`, and the two radial densities of the up and down branches
//! fix the conditional branch amplitudes `F(r)` (down) and `F′(r)` (up).

mod profile;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profile::{RadialProfile, TabulatedProfile};

use crate::observer::{InferredPath, VerificationOutcome};
use crate::qcore::C64;
use crate::quadrature::{integrate, intervals_where};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("radial spread must be positive and finite, got {0}")]
    BadSigma(f64),

    #[error("r_max must be positive and finite, got {0}")]
    BadRmax(f64),

    #[error("lambda_0 must be at least 2, got {0}")]
    BadThreshold(f64),

    #[error("up and down profiles are identical, so no event can qualify")]
    Indistinguishable,

    #[error("radius {r} outside [0, {r_max}]")]
    OutOfRange { r: f64, r_max: f64 },

    #[error("branch weights must be non-negative and sum to 1, got ({0}, {1})")]
    BadWeights(f64, f64),

    #[error("|D'| = {0} exceeds 1")]
    BadOverlap(f64),

    #[error("radial table: {0}")]
    BadTable(String),
}

/// Default qualification threshold on `Λ`.
pub const LAMBDA_0: f64 = 4.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub up: RadialProfile,
    pub down: RadialProfile,
    pub r_max: f64,
    /// Constant phase of `F*·F′`.
    pub phi_f: f64,
    pub lambda_0: f64,
    /// Observer overlap after the photon has scattered; `None` keeps `D`.
    pub d_prime: Option<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeEvent {
    pub r: f64,
    pub f: C64,
    pub f_prime: C64,
    pub lambda: f64,
    pub qualifies: bool,
}

impl ProbeModel {
    /// Gaussian up branch and annular down branch.
    pub fn new(sigma_up: f64, sigma_down: f64, r_max: f64, phi_f: f64, lambda_0: f64) -> Result<Self, ProbeError> {
        Self::with_profiles(
            RadialProfile::HalfGaussian { sigma: sigma_up },
            RadialProfile::Maxwell { sigma: sigma_down },
            r_max,
            phi_f,
            lambda_0,
        )
    }

    pub fn with_profiles(
        mut up: RadialProfile,
        mut down: RadialProfile,
        r_max: f64,
        phi_f: f64,
        lambda_0: f64,
    ) -> Result<Self, ProbeError> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(ProbeError::BadRmax(r_max));
        }
        if !(lambda_0 >= 2.0 && lambda_0.is_finite()) {
            return Err(ProbeError::BadThreshold(lambda_0));
        }
        if !phi_f.is_finite() {
            return Err(ProbeError::BadThreshold(phi_f));
        }
        up.validate(r_max)?;
        down.validate(r_max)?;
        if up == down {
            return Err(ProbeError::Indistinguishable);
        }
        Ok(ProbeModel { up, down, r_max, phi_f, lambda_0, d_prime: None })
    }

    pub fn with_d_prime(mut self, d_prime: C64) -> Result<Self, ProbeError> {
        if !(d_prime.norm() <= 1.0 + 1e-12) {
            return Err(ProbeError::BadOverlap(d_prime.norm()));
        }
        self.d_prime = Some(d_prime);
        Ok(self)
    }

    /// Re-run validation, e.g. after deserialization or field edits.
    pub fn validated(self) -> Result<Self, ProbeError> {
        let d_prime = self.d_prime;
        let m = Self::with_profiles(self.up, self.down, self.r_max, self.phi_f, self.lambda_0)?;
        match d_prime {
            Some(d) => m.with_d_prime(d),
            None => Ok(m),
        }
    }

    pub fn g_up(&self, r: f64) -> f64 {
        self.up.pdf(r, self.r_max)
    }

    pub fn g_down(&self, r: f64) -> f64 {
        self.down.pdf(r, self.r_max)
    }

    fn amplitudes_unchecked(&self, r: f64) -> (C64, C64) {
        let (gd, gu) = (self.g_down(r), self.g_up(r));
        let s = gd + gu;
        let (pd, pu) = if s > 0.0 { (gd / s, gu / s) } else { (0.5, 0.5) };
        (C64::new(pd.sqrt(), 0.0), C64::from_polar(pu.sqrt(), self.phi_f))
    }

    /// `(F, F′)` with `|F|² = g_down/(g_down+g_up)` and `arg(F*F′) = φ_F`.
    /// Both densities vanishing gives `|F| = |F′| = 1/√2`.
    pub fn amplitudes_at(&self, r: f64) -> Result<(C64, C64), ProbeError> {
        if !(0.0..=self.r_max).contains(&r) {
            return Err(ProbeError::OutOfRange { r, r_max: self.r_max });
        }
        Ok(self.amplitudes_unchecked(r))
    }

    pub fn event_at(&self, r: f64) -> Result<ProbeEvent, ProbeError> {
        let (f, f_prime) = self.amplitudes_at(r)?;
        let lambda = discriminability(f, f_prime);
        Ok(ProbeEvent { r, f, f_prime, lambda, qualifies: lambda > self.lambda_0 })
    }

    /// Draw `r` from `w_down·g_down + w_up·g_up`.
    pub fn sample_impact<R: Rng + ?Sized>(&self, w_down: f64, w_up: f64, rng: &mut R) -> Result<ProbeEvent, ProbeError> {
        if !(w_down >= 0.0 && w_up >= 0.0) || ((w_down + w_up) - 1.0).abs() > 1e-9 {
            return Err(ProbeError::BadWeights(w_down, w_up));
        }
        let down = rng.random::<f64>() < w_down;
        let r = if down { self.down.sample(self.r_max, rng) } else { self.up.sample(self.r_max, rng) };
        self.event_at(r)
    }

    pub fn verification(&self, ev: &ProbeEvent) -> VerificationOutcome {
        VerificationOutcome::from_amplitudes(ev.f, ev.f_prime, ev.lambda, self.lambda_0)
    }

    /// Qualified radii `{r : Λ(r) > Λ₀}` as disjoint intervals.
    pub fn qualified_intervals(&self) -> Vec<(f64, f64)> {
        let pred = |r: f64| discriminability_of(self.amplitudes_unchecked(r)) > self.lambda_0;
        intervals_where(&pred, 0.0, self.r_max, 4096)
    }

    /// Mixture mass of the qualified region.
    pub fn qualified_mass(&self, w_down: f64, w_up: f64) -> f64 {
        let m = |r: f64| w_down * self.g_down(r) + w_up * self.g_up(r);
        self.qualified_intervals().iter().map(|&(a, b)| integrate(&m, a, b, 1e-12)).sum()
    }

    /// `∫_Q m·h / ∫_Q m` with `m` the branch mixture and `Q` the qualified
    /// region; `h` receives the event at each radius. `None` if `Q` is empty.
    pub fn qualified_average(&self, w_down: f64, w_up: f64, h: impl Fn(&ProbeEvent) -> f64) -> Option<f64> {
        let m = |r: f64| w_down * self.g_down(r) + w_up * self.g_up(r);
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.qualified_intervals() {
            num += integrate(
                &|r: f64| {
                    let (f, f_prime) = self.amplitudes_unchecked(r);
                    let ev = ProbeEvent { r, f, f_prime, lambda: discriminability(f, f_prime), qualifies: true };
                    m(r) * h(&ev)
                },
                a,
                b,
                1e-11,
            );
            den += integrate(&m, a, b, 1e-12);
        }
        (den > 0.0).then(|| num / den)
    }
}

fn discriminability_of((f, fp): (C64, C64)) -> f64 {
    discriminability(f, fp)
}

/// `Λ = 1/|F·F′|`, `+∞` when either amplitude vanishes.
pub fn discriminability(f: C64, f_prime: C64) -> f64 {
    let prod = (f * f_prime).norm();
    if prod == 0.0 {
        f64::INFINITY
    } else {
        1.0 / prod
    }
}

/// Amplitude ratio `k` with `k + 1/k = Λ₀`: the ratio gate `|F′|/|F| ≥ k`
/// (or its mirror) selects the same events as `Λ ≥ Λ₀`.
pub fn ratio_threshold(lambda_0: f64) -> f64 {
    0.5 * (lambda_0 + (lambda_0 * lambda_0 - 4.0).max(0.0).sqrt())
}

/// `Λ` reached when the amplitude ratio equals `k`.
pub fn lambda_for_ratio(k: f64) -> f64 {
    k + 1.0 / k
}

/// Amplitude-ratio gate: up when `|F′| ≥ k|F|`, down when `|F| ≥ k|F′|`.
pub fn ratio_gate(ev: &ProbeEvent, k: f64) -> InferredPath {
    let (a, b) = (ev.f.norm(), ev.f_prime.norm());
    if b >= k * a {
        InferredPath::Up
    } else if a >= k * b {
        InferredPath::Down
    } else {
        InferredPath::Indeterminate
    }
}

/// Probability of finding the second qubit in `|0⟩` after a probe event on
/// the balanced entangled state, `½ + Re(F*·F′·D′)`.
///
/// Equal amplitudes give `½(1 + Re D′)`, the unprobed value, and the
/// deviation from `½` never exceeds `|D′|/Λ`.
pub fn attenuated_probability(d_prime: C64, ev: &ProbeEvent) -> f64 {
    if ev.lambda.is_infinite() {
        return 0.5;
    }
    (0.5 + (ev.f.conj() * ev.f_prime * d_prime).re).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::RandomStream;

    fn model() -> ProbeModel {
        ProbeModel::new(1.0, 2.5, 10.0, 0.0, LAMBDA_0).unwrap()
    }

    #[test]
    fn amplitudes_are_normalized_everywhere() {
        let m = model();
        for k in 0..=1000 {
            let r = 10.0 * k as f64 / 1000.0;
            let (f, fp) = m.amplitudes_at(r).unwrap();
            assert!((f.norm_sqr() + fp.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(discriminability(f, fp) >= 2.0 - 1e-12);
        }
        assert!(matches!(m.amplitudes_at(10.5), Err(ProbeError::OutOfRange { .. })));
        assert!(m.amplitudes_at(-0.1).is_err());
    }

    #[test]
    fn symmetric_point_and_ninety_five_percent() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((discriminability(C64::new(h, 0.0), C64::new(h, 0.0)) - 2.0).abs() < 1e-12);
        let f = C64::new(0.05f64.sqrt(), 0.0);
        let fp = C64::new(0.95f64.sqrt(), 0.0);
        let lam = discriminability(f, fp);
        assert!((lam - 1.0 / (0.95f64 * 0.05).sqrt()).abs() < 1e-9);
        assert!((lam - 4.588).abs() < 1e-3);
        assert_eq!(discriminability(C64::new(0.0, 0.0), C64::new(1.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn phase_of_product() {
        let m = ProbeModel::new(1.0, 2.0, 8.0, 0.7, LAMBDA_0).unwrap();
        let (f, fp) = m.amplitudes_at(1.3).unwrap();
        assert!(((f.conj() * fp).arg() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn ratio_threshold_inverts_lambda() {
        for lam in [2.0, 3.0, 4.6, 10.0] {
            assert!((lambda_for_ratio(ratio_threshold(lam)) - lam).abs() < 1e-12);
        }
        assert!((lambda_for_ratio(19f64.sqrt()) - 20.0 / 19f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn attenuated_limits() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let even = ProbeEvent { r: 0.0, f: C64::new(h, 0.0), f_prime: C64::new(h, 0.0), lambda: 2.0, qualifies: false };
        for d in [0.0, 0.3, -0.5, 1.0] {
            let p = attenuated_probability(C64::new(d, 0.2), &even);
            assert!((p - 0.5 * (1.0 + d)).abs() < 1e-12);
        }
        let sure = ProbeEvent { r: 0.0, f: C64::new(0.0, 0.0), f_prime: C64::new(1.0, 0.0), lambda: f64::INFINITY, qualifies: true };
        assert_eq!(attenuated_probability(C64::new(1.0, 0.0), &sure), 0.5);
        let ev = model().event_at(0.8).unwrap();
        assert_eq!(attenuated_probability(C64::new(0.0, 0.0), &ev), 0.5);
    }

    #[test]
    fn bad_models_rejected() {
        assert!(matches!(ProbeModel::new(0.0, 1.0, 5.0, 0.0, 4.6), Err(ProbeError::BadSigma(_))));
        assert!(matches!(ProbeModel::new(1.0, 1.0, 5.0, 0.0, 1.5), Err(ProbeError::BadThreshold(_))));
        let g = RadialProfile::HalfGaussian { sigma: 1.0 };
        assert_eq!(ProbeModel::with_profiles(g.clone(), g, 5.0, 0.0, 4.6).unwrap_err(), ProbeError::Indistinguishable);
        let mut rng = RandomStream::from_seed(0);
        assert!(matches!(model().sample_impact(-0.5, 1.5, &mut rng), Err(ProbeError::BadWeights(..))));
    }

    #[test]
    fn qualification_rate_matches_quadrature() {
        let m = model();
        let mass = m.qualified_mass(0.5, 0.5);
        let mut rng = RandomStream::from_seed(21);
        let n = 100_000;
        let hits = (0..n).filter(|_| m.sample_impact(0.5, 0.5, &mut rng).unwrap().qualifies).count();
        let sigma = (mass * (1.0 - mass) / n as f64).sqrt();
        assert!(((hits as f64 / n as f64) - mass).abs() < 4.0 * sigma, "{hits} vs {mass}");
    }
}
