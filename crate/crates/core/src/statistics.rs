//! Hypothesis tests against the collapse null `p = ½`, trial sizing and
//! power estimates.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};
use thiserror::Error;

use crate::engines::{run_campaign_sequential, CampaignResult, EngineError, ExperimentConfig};
use crate::environment::ProfilePoint;
use crate::qcore::RandomStream;

/// Smallest qualified count for which the normal approximation is used.
pub const MIN_NORMAL_N: u64 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("{0} qualified trials is below the minimum of {MIN_NORMAL_N} for the normal approximation")]
    TooFewTrials(u64),

    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),

    #[error("{k} successes out of {n} trials is inconsistent")]
    BadCounts { k: u64, n: u64 },

    #[error("empty series")]
    Empty,

    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A trial count that may be unbounded when there is no signal to detect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RequiredTrials {
    Finite(u64),
    Unbounded,
}

impl RequiredTrials {
    pub fn finite(self) -> Option<u64> {
        match self {
            RequiredTrials::Finite(n) => Some(n),
            RequiredTrials::Unbounded => None,
        }
    }
}

impl fmt::Display for RequiredTrials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequiredTrials::Finite(n) => write!(f, "{n}"),
            RequiredTrials::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for RequiredTrials {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RequiredTrials::Finite(n) => s.serialize_u64(*n),
            RequiredTrials::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RequiredTrials {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(RequiredTrials::Finite(n)),
            Raw::S(s) if s == "inf" => Ok(RequiredTrials::Unbounded),
            Raw::S(s) => Err(serde::de::Error::custom(format!("expected a count or \"inf\", got {s:?}"))),
        }
    }
}

/// `⌈x⌉`, except that values within rounding noise of an integer snap to it.
fn ceil_snapped(x: f64) -> RequiredTrials {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return RequiredTrials::Unbounded;
    }
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    RequiredTrials::Finite(n.max(1.0) as u64)
}

/// `⌈1/s²⌉`: the count at which the expected excess `s·N` reaches two
/// binomial standard deviations `√N`.
pub fn required_trials(s: f64) -> RequiredTrials {
    required_trials_for_z(s, 2.0)
}

/// `⌈z²/(4s²)⌉` for a general critical value `z`.
pub fn required_trials_for_z(s: f64, z: f64) -> RequiredTrials {
    if s == 0.0 || !s.is_finite() {
        return RequiredTrials::Unbounded;
    }
    ceil_snapped(z * z / (4.0 * s * s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    NormalZ,
    ExactBinomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub n: u64,
    pub p_hat: f64,
    pub s_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub reject_null: bool,
    pub alpha: f64,
    pub method: TestMethod,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::BadAlpha(alpha))
    }
}

/// Two-sided normal-approximation test of `p = ½` from `k` zeros in `n`.
pub fn z_test(n: u64, k: u64, alpha: f64) -> Result<TestResult, StatsError> {
    check_alpha(alpha)?;
    if k > n {
        return Err(StatsError::BadCounts { k, n });
    }
    if n < MIN_NORMAL_N {
        return Err(StatsError::TooFewTrials(n));
    }
    let p_hat = k as f64 / n as f64;
    let z = (p_hat - 0.5) / (0.5 / (n as f64).sqrt());
    let p_value = (2.0 * std_normal().cdf(-z.abs())).min(1.0);
    Ok(TestResult { n, p_hat, s_hat: p_hat - 0.5, z, p_value, reject_null: p_value < alpha, alpha, method: TestMethod::NormalZ })
}

pub fn test_campaign(result: &CampaignResult, alpha: f64) -> Result<TestResult, StatsError> {
    z_test(result.n_qualified, result.n_q2_zero, alpha)
}

/// Normal test when possible, exact binomial otherwise.
pub fn test_campaign_auto(result: &CampaignResult, alpha: f64) -> Result<TestResult, StatsError> {
    if result.n_qualified >= MIN_NORMAL_N {
        test_campaign(result, alpha)
    } else {
        exact_binomial_test(result.n_qualified, result.n_q2_zero, alpha)
    }
}

/// Two-sided exact binomial test of `p = ½`.
pub fn exact_binomial_test(n: u64, k: u64, alpha: f64) -> Result<TestResult, StatsError> {
    check_alpha(alpha)?;
    if k > n || n == 0 {
        return Err(StatsError::BadCounts { k, n });
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    let lower = b.cdf(k);
    let upper = if k == 0 { 1.0 } else { b.sf(k - 1) };
    let p_value = (2.0 * lower.min(upper)).min(1.0);
    let p_hat = k as f64 / n as f64;
    let z = (p_hat - 0.5) / (0.5 / (n as f64).sqrt());
    Ok(TestResult {
        n,
        p_hat,
        s_hat: p_hat - 0.5,
        z,
        p_value,
        reject_null: p_value < alpha,
        alpha,
        method: TestMethod::ExactBinomial,
    })
}

/// Pooled two-proportion z-test; returns the two-sided p-value.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<f64, StatsError> {
    if n1 == 0 || k1 > n1 {
        return Err(StatsError::BadCounts { k: k1, n: n1 });
    }
    if n2 == 0 || k2 > n2 {
        return Err(StatsError::BadCounts { k: k2, n: n2 });
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pool = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pool * (1.0 - pool) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return Ok(if p1 == p2 { 1.0 } else { 0.0 });
    }
    let z = (p1 - p2) / se;
    Ok((2.0 * std_normal().cdf(-z.abs())).min(1.0))
}

/// Normal-approximation power of the two-sided test when the true excess is
/// `s` and `n` trials are used: `Φ(μ − z) + Φ(−μ − z)` with `μ = 2s√n`.
pub fn normal_power(s: f64, n: u64, alpha: f64) -> f64 {
    let nd = std_normal();
    let zc = nd.inverse_cdf(1.0 - alpha / 2.0);
    let mu = 2.0 * s * (n as f64).sqrt();
    nd.cdf(mu - zc) + nd.cdf(-mu - zc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    pub rejections: u64,
    pub replicates: u64,
    pub n_trials: u64,
    pub alpha: f64,
}

/// Seed of replicate `i` derived from a base seed.
pub fn replicate_seed(base: u64, i: u64) -> u64 {
    use rand::RngCore;
    RandomStream::from_seed(base).substream(i).next_u64()
}

/// Fraction of `replicates` independent campaigns of `cfg.n_trials` trials
/// that reject `p = ½` at `alpha`.
pub fn power_estimate(cfg: &ExperimentConfig, replicates: u64, alpha: f64) -> Result<PowerEstimate, StatsError> {
    check_alpha(alpha)?;
    let outcomes: Vec<Result<bool, StatsError>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = replicate_seed(cfg.seed, i);
            let res = run_campaign_sequential(&c)?;
            Ok(test_campaign_auto(&res, alpha)?.reject_null)
        })
        .collect();
    let mut rejections = 0;
    for o in outcomes {
        rejections += o? as u64;
    }
    Ok(PowerEstimate {
        power: rejections as f64 / replicates.max(1) as f64,
        rejections,
        replicates,
        n_trials: cfg.n_trials,
        alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Within `N/2 ± √N`.
    Consistent,
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub n_rho00: f64,
    pub lower: f64,
    pub upper: f64,
    pub band: Band,
}

/// Expected count `N·ρ₀₀(t)` against the two-sigma band of the collapse
/// prediction, `N/2 ± 2·(½√N)`.
pub fn profile_report(series: &[ProfilePoint], n: u64) -> Result<Vec<ProfileRow>, StatsError> {
    if series.is_empty() {
        return Err(StatsError::Empty);
    }
    let nf = n as f64;
    let half = 0.5 * nf;
    let width = nf.sqrt();
    Ok(series
        .iter()
        .map(|p| {
            let v = nf * p.rho00;
            let band = if v > half + width {
                Band::Above
            } else if v < half - width {
                Band::Below
            } else {
                Band::Consistent
            };
            ProfileRow { t: p.t, n_rho00: v, lower: half - width, upper: half + width, band }
        })
        .collect())
}
