use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ConfigFile;
use super::ToolkitError;
use crate::engines::{closed_form, run_campaign, CampaignResult, Engine, EngineError, ExperimentConfig};
use crate::environment::{gate_calibration, time_profile, GateCalibration};
use crate::statistics::{
    power_estimate, profile_report, required_trials, test_campaign_auto, PowerEstimate, ProfileRow, RequiredTrials,
    TestResult,
};

/// One line of trial-count bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizingNote {
    pub label: String,
    pub s: f64,
    pub required: RequiredTrials,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigFile,
    pub config_digest: String,
    pub campaign: CampaignResult,
    pub test: Option<TestResult>,
    pub test_error: Option<String>,
    pub closed_form: f64,
    /// `p_hat − closed_form`.
    pub deviation: f64,
    /// Deviation in units of the campaign standard error; absent when the
    /// standard error is zero and the deviation is not.
    pub sigma_multiple: Option<f64>,
    /// Expected interference term `closed_form − ½`.
    pub expected_s: f64,
    pub required_trials: RequiredTrials,
    pub sizing: Vec<SizingNote>,
    pub power: Option<PowerEstimate>,
    pub profile: Option<Vec<ProfileRow>>,
    pub gate_calibration: Option<GateCalibration>,
    pub warnings: Vec<String>,
    /// Wall-clock seconds; shown in the text summary only.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

/// Trial-count figures for the weak-probe scenario at `Re D′ = 0.1`.
pub fn sizing_notes(lambda_0: f64) -> Vec<SizingNote> {
    let re = 0.1;
    let rows = [
        ("unattenuated", 0.5 * re, "s = Re D / 2 with no probe"),
        ("probe bound", re / lambda_0, "s = Re D' / Λ₀, the largest interference surviving a qualified probe"),
        ("halved probe bound", 0.5 * re / lambda_0, "s = Re D' / (2Λ₀)"),
    ];
    rows.iter()
        .map(|&(label, s, detail)| SizingNote {
            label: label.into(),
            s,
            required: required_trials(s),
            detail: format!("{detail}; the commonly quoted figure for Re D = 0.1 is about 2000"),
        })
        .collect()
}

/// Execute the campaign described by `file`.
pub fn run(file: &ConfigFile) -> Result<RunReport, ToolkitError> {
    let cfg = file.build()?;
    run_config(file, &cfg)
}

/// Execute `cfg`, echoing `file` as its source.
pub fn run_config(file: &ConfigFile, cfg: &ExperimentConfig) -> Result<RunReport, ToolkitError> {
    let start = Instant::now();
    let alpha = file.report.alpha;
    let campaign = run_campaign(cfg)?;
    let cf = closed_form(cfg)?;
    let (test, test_error) = match test_campaign_auto(&campaign, alpha) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let deviation = campaign.p_hat - cf;
    let sigma_multiple = if campaign.stderr > 0.0 {
        Some(deviation / campaign.stderr)
    } else if deviation == 0.0 {
        Some(0.0)
    } else {
        None
    };
    let expected_s = cf - 0.5;
    let required = required_trials(expected_s.abs());

    let mut warnings = Vec::new();
    if let Some(e) = &cfg.error {
        warnings.extend(e.warnings());
    }
    if let RequiredTrials::Finite(n) = required {
        if campaign.n_qualified < n {
            warnings.push(format!("{} counted trials is below the {n} needed to resolve s = {expected_s:.6}", campaign.n_qualified));
        }
    }
    if !cfg.pointer_reset {
        warnings.push("pointer reset disabled: the observer overlap drifts between trials".into());
    }

    let sizing = cfg.probe.as_ref().map(|p| sizing_notes(p.lambda_0)).unwrap_or_default();
    let power = match file.report.replicates {
        0 => None,
        r => Some(power_estimate(cfg, r, alpha)?),
    };
    let profile = match (&cfg.environment, &file.environment) {
        (Some(env), Some(sec)) if !sec.profile_times.is_empty() => {
            let series = time_profile(cfg.observer.overlap(), env, &sec.profile_times).map_err(EngineError::from)?;
            Some(profile_report(&series, campaign.n_qualified)?)
        }
        _ => None,
    };
    let gate = (cfg.engine == Engine::Unitary && cfg.observer.overlap() == 1.0.into() && cfg.probe.is_none())
        .then(|| gate_calibration(campaign.p_hat, campaign.n_qualified));

    Ok(RunReport {
        config: file.clone(),
        config_digest: campaign.config_digest.clone(),
        campaign,
        test,
        test_error,
        closed_form: cf,
        deviation,
        sigma_multiple,
        expected_s,
        required_trials: required,
        sizing,
        power,
        profile,
        gate_calibration: gate,
        warnings,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ToolkitError> {
        serde_json::from_str(text).map_err(|e| ToolkitError::Table(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let c = &self.campaign;
        let mut s = String::new();
        let _ = writeln!(s, "engine            {}", self.config.engine);
        let _ = writeln!(s, "config digest     {}", self.config_digest);
        let _ = writeln!(s, "seed              {}", self.config.seed);
        let _ = writeln!(s, "trials            {} ({} counted)", c.n_total, c.n_qualified);
        let _ = writeln!(s, "q2 = 0            {}", c.n_q2_zero);
        let _ = writeln!(s, "p_hat             {:.6} ± {:.6}", c.p_hat, c.stderr);
        let _ = writeln!(s, "closed form       {:.6}", self.closed_form);
        match self.sigma_multiple {
            Some(m) => {
                let _ = writeln!(s, "deviation         {:+.6} ({m:+.2}σ)", self.deviation);
            }
            None => {
                let _ = writeln!(s, "deviation         {:+.6} (zero standard error)", self.deviation);
            }
        }
        let _ = writeln!(s, "expected s        {:+.6}, required trials {}", self.expected_s, self.required_trials);
        if let Some(d) = c.overlap_drift {
            let _ = writeln!(s, "overlap drift     {d:+.6}");
        }
        match (&self.test, &self.test_error) {
            (Some(t), _) => {
                let _ = writeln!(
                    s,
                    "test of p = 1/2   z = {:.3}, p-value = {:.4e}, {} at alpha = {}",
                    t.z,
                    t.p_value,
                    if t.reject_null { "rejected" } else { "not rejected" },
                    t.alpha
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "test of p = 1/2   unavailable: {e}");
            }
            _ => {}
        }
        if let Some(p) = &self.power {
            let _ = writeln!(s, "power             {:.3} ({}/{} replicates of {} trials)", p.power, p.rejections, p.replicates, p.n_trials);
        }
        if let Some(g) = &self.gate_calibration {
            let _ = writeln!(s, "gate deviation    {:.6} ± {:.6}", g.deviation, g.stderr);
        }
        if !self.sizing.is_empty() {
            let _ = writeln!(s, "sizing at Re D' = 0.1");
            for n in &self.sizing {
                let _ = writeln!(s, "  {:<20} s = {:.6}  N = {}  ({})", n.label, n.s, n.required, n.detail);
            }
        }
        if let Some(rows) = &self.profile {
            let _ = writeln!(s, "decoherence profile (N·ρ₀₀ against N/2 ± √N)");
            for r in rows {
                let _ = writeln!(s, "  t = {:<8} {:>12.2}  [{:.2}, {:.2}]  {:?}", r.t, r.n_rho00, r.lower, r.upper, r.band);
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "elapsed           {:.3} s", self.elapsed_secs);
        s
    }
}
