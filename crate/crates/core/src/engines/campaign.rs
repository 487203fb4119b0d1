use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EngineError, ExperimentConfig, Protocol, TrialRecord};
use crate::qcore::RandomStream;

/// Trials per aggregation chunk. Chunk sums are combined in index order, so
/// the result does not depend on how chunks are scheduled.
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub n_total: u64,
    pub n_qualified: u64,
    pub n_q2_zero: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub config_digest: String,
    /// Mean closed-form probability over qualified trials.
    pub mean_p_theory: f64,
    /// Mean shift of `Re D` away from its nominal value, reported when the
    /// pointer is not reset between trials.
    pub overlap_drift: Option<f64>,
}

#[derive(Default)]
struct Tally {
    n_total: u64,
    n_qualified: u64,
    n_q2_zero: u64,
    sum_p_theory: f64,
    sum_overlap_re: f64,
}

impl Tally {
    fn add(&mut self, r: &TrialRecord) {
        self.n_total += 1;
        self.sum_overlap_re += r.overlap.re;
        if r.qualifies {
            self.n_qualified += 1;
            self.sum_p_theory += r.p_theory;
            if r.final_q2 == 0 {
                self.n_q2_zero += 1;
            }
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.n_total += o.n_total;
        self.n_qualified += o.n_qualified;
        self.n_q2_zero += o.n_q2_zero;
        self.sum_p_theory += o.sum_p_theory;
        self.sum_overlap_re += o.sum_overlap_re;
    }
}

fn run_chunk(protocol: &Protocol, root: &RandomStream, chunk: u64, n: u64) -> Result<Tally, EngineError> {
    let mut t = Tally::default();
    let lo = chunk * CHUNK;
    let hi = (lo + CHUNK).min(n);
    for id in lo..hi {
        let mut rng = root.substream(id);
        t.add(&protocol.trial(id, &mut rng)?);
    }
    Ok(t)
}

fn finish(cfg: &ExperimentConfig, chunks: Vec<Result<Tally, EngineError>>) -> Result<CampaignResult, EngineError> {
    let mut total = Tally::default();
    for c in chunks {
        total.merge(&c?);
    }
    if total.n_qualified == 0 {
        return Err(EngineError::NoQualified);
    }
    let nq = total.n_qualified as f64;
    let p_hat = total.n_q2_zero as f64 / nq;
    Ok(CampaignResult {
        n_total: total.n_total,
        n_qualified: total.n_qualified,
        n_q2_zero: total.n_q2_zero,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / nq).sqrt(),
        config_digest: cfg.digest(),
        mean_p_theory: total.sum_p_theory / nq,
        overlap_drift: (!cfg.pointer_reset)
            .then(|| total.sum_overlap_re / total.n_total as f64 - cfg.observer.overlap().re),
    })
}

/// Run every trial of the campaign, in parallel where available.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<CampaignResult, EngineError> {
    let protocol = Protocol::new(cfg)?;
    let root = RandomStream::from_seed(cfg.seed);
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let chunks = (0..n_chunks).into_par_iter().map(|c| run_chunk(&protocol, &root, c, cfg.n_trials)).collect();
    finish(cfg, chunks)
}

/// As [`run_campaign`] on the calling thread only.
pub fn run_campaign_sequential(cfg: &ExperimentConfig) -> Result<CampaignResult, EngineError> {
    let protocol = Protocol::new(cfg)?;
    let root = RandomStream::from_seed(cfg.seed);
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let chunks = (0..n_chunks).map(|c| run_chunk(&protocol, &root, c, cfg.n_trials)).collect();
    finish(cfg, chunks)
}

/// Per-trial records for trial ids `range`.
pub fn run_trials(cfg: &ExperimentConfig, range: std::ops::Range<u64>) -> Result<Vec<TrialRecord>, EngineError> {
    let protocol = Protocol::new(cfg)?;
    let root = RandomStream::from_seed(cfg.seed);
    range
        .map(|id| {
            let mut rng = root.substream(id);
            protocol.trial(id, &mut rng)
        })
        .collect()
}
