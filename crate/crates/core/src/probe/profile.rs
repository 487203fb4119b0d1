use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::ProbeError;

/// Radial photon-impact density on `[0, r_max]`, normalized there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `∝ exp(−r²/2σ²)`, concentrated near the centre.
    HalfGaussian { sigma: f64 },
    /// `∝ r² exp(−r²/2σ²)`, annular.
    Maxwell { sigma: f64 },
    /// Piecewise-linear interpolation of tabulated `(r, density)` points.
    Table(TabulatedProfile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    r: Vec<f64>,
    density: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl TabulatedProfile {
    /// Normalizes by the trapezoidal rule.
    pub fn new(r: Vec<f64>, density: Vec<f64>) -> Result<Self, ProbeError> {
        if r.len() < 2 || r.len() != density.len() {
            return Err(ProbeError::BadTable("need at least two (r, density) rows".into()));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().any(|x| !x.is_finite()) {
            return Err(ProbeError::BadTable("radii must be non-negative and strictly increasing".into()));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(ProbeError::BadTable("densities must be finite and non-negative".into()));
        }
        let mut cumulative = vec![0.0];
        for k in 1..r.len() {
            let seg = 0.5 * (density[k] + density[k - 1]) * (r[k] - r[k - 1]);
            cumulative.push(cumulative[k - 1] + seg);
        }
        let total = *cumulative.last().unwrap();
        if total <= 0.0 {
            return Err(ProbeError::BadTable("density integrates to zero".into()));
        }
        let density = density.iter().map(|d| d / total).collect();
        cumulative.iter_mut().for_each(|c| *c /= total);
        Ok(TabulatedProfile { r, density, cumulative })
    }

    /// Parse whitespace/comma separated two-column text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ProbeError> {
        let mut r = Vec::new();
        let mut d = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|_| ProbeError::BadTable(format!("line {}: cannot parse {s:?}", lineno + 1)));
            if cols.len() != 2 {
                return Err(ProbeError::BadTable(format!("line {}: expected 2 columns, found {}", lineno + 1, cols.len())));
            }
            r.push(parse(cols[0])?);
            d.push(parse(cols[1])?);
        }
        Self::new(r, d)
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    fn ensure_cumulative(&mut self) {
        if self.cumulative.len() != self.r.len() {
            *self = TabulatedProfile::new(self.r.clone(), self.density.clone()).expect("table was validated");
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.r_range();
        if x < lo || x > hi {
            return 0.0;
        }
        let k = self.r.partition_point(|&ri| ri <= x).clamp(1, self.r.len() - 1);
        let t = (x - self.r[k - 1]) / (self.r[k] - self.r[k - 1]);
        self.density[k - 1] + t * (self.density[k] - self.density[k - 1])
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c <= u).clamp(1, self.r.len() - 1);
        let (x0, x1) = (self.r[k - 1], self.r[k]);
        let d0 = self.density[k - 1];
        let slope = (self.density[k] - d0) / (x1 - x0);
        let target = u - self.cumulative[k - 1];
        // solve d0·t + slope·t²/2 = target in the cancellation-free form
        let disc = (d0 * d0 + 2.0 * slope * target).max(0.0);
        let denom = d0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
        (x0 + t).clamp(x0, x1)
    }
}

impl RadialProfile {
    pub(crate) fn validate(&mut self, r_max: f64) -> Result<(), ProbeError> {
        match self {
            RadialProfile::HalfGaussian { sigma } | RadialProfile::Maxwell { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(ProbeError::BadSigma(*sigma));
                }
            }
            RadialProfile::Table(t) => {
                t.ensure_cumulative();
                let (_, hi) = t.r_range();
                if hi > r_max * (1.0 + 1e-12) {
                    return Err(ProbeError::BadTable(format!("table extends to r = {hi} beyond r_max = {r_max}")));
                }
            }
        }
        Ok(())
    }

    /// Normalized density at `r`, truncated to `[0, r_max]`.
    pub fn pdf(&self, r: f64, r_max: f64) -> f64 {
        if !(0.0..=r_max).contains(&r) {
            return 0.0;
        }
        match self {
            RadialProfile::HalfGaussian { sigma } => {
                let z = sigma * (PI / 2.0).sqrt() * erf(r_max / (sigma * 2f64.sqrt()));
                (-r * r / (2.0 * sigma * sigma)).exp() / z
            }
            RadialProfile::Maxwell { sigma } => {
                let s = *sigma;
                let q = r_max / s;
                let z = s.powi(3) * ((PI / 2.0).sqrt() * erf(q / 2f64.sqrt()) - q * (-q * q / 2.0).exp());
                r * r * (-r * r / (2.0 * s * s)).exp() / z
            }
            RadialProfile::Table(t) => t.pdf(r),
        }
    }

    /// Draw a radius from the truncated density.
    pub fn sample<R: Rng + ?Sized>(&self, r_max: f64, rng: &mut R) -> f64 {
        match self {
            RadialProfile::HalfGaussian { sigma } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let r = (sigma * z).abs();
                if r <= r_max {
                    return r;
                }
            },
            RadialProfile::Maxwell { sigma } => loop {
                let (x, y, z): (f64, f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
                let r = sigma * (x * x + y * y + z * z).sqrt();
                if r <= r_max {
                    return r;
                }
            },
            RadialProfile::Table(t) => t.inverse_cdf(rng.random::<f64>()),
        }
    }
}
