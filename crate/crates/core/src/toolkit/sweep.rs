use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{ComplexInput, ConfigFile, ErrorSection};
use super::report::run;
use super::ToolkitError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    PhiF,
    SigmaUp,
    SigmaDown,
    RMax,
    Lambda0,
    /// Real overlap; the imaginary part is cleared.
    D,
    DRe,
    DIm,
    DPrime,
    Tau,
    TMeas,
    PErrUp,
    PErrDown,
    NTrials,
}

const NAMES: &[(&str, SweepParam)] = &[
    ("phi_f", SweepParam::PhiF),
    ("sigma_up", SweepParam::SigmaUp),
    ("sigma_down", SweepParam::SigmaDown),
    ("r_max", SweepParam::RMax),
    ("lambda_0", SweepParam::Lambda0),
    ("d", SweepParam::D),
    ("d_re", SweepParam::DRe),
    ("d_im", SweepParam::DIm),
    ("d_prime", SweepParam::DPrime),
    ("tau", SweepParam::Tau),
    ("t_meas", SweepParam::TMeas),
    ("p_err_up", SweepParam::PErrUp),
    ("p_err_down", SweepParam::PErrDown),
    ("n_trials", SweepParam::NTrials),
];

impl FromStr for SweepParam {
    type Err = ToolkitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, p)| *p)
            .ok_or_else(|| ToolkitError::UnknownParameter(s.to_string()))
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = NAMES.iter().find(|(_, p)| p == self).map(|(n, _)| *n).unwrap_or("?");
        f.write_str(name)
    }
}

impl SweepParam {
    pub fn names() -> impl Iterator<Item = &'static str> {
        NAMES.iter().map(|(n, _)| *n)
    }

    /// Set this parameter to `v` in `file`.
    pub fn apply(self, file: &mut ConfigFile, v: f64) -> Result<(), ToolkitError> {
        let missing = |section: &str| ToolkitError::Config {
            path: section.into(),
            message: format!("sweeping {self} needs a [{section}] section"),
        };
        let overlap = |file: &ConfigFile| file.observer.d.map_or(0.0.into(), |d| d.value());
        match self {
            SweepParam::PhiF | SweepParam::SigmaUp | SweepParam::SigmaDown | SweepParam::RMax | SweepParam::Lambda0 | SweepParam::DPrime => {
                let p = file.probe.as_mut().ok_or_else(|| missing("probe"))?;
                match self {
                    SweepParam::PhiF => p.phi_f = v,
                    SweepParam::SigmaUp => {
                        p.sigma_up = Some(v);
                        p.up_table = None;
                    }
                    SweepParam::SigmaDown => {
                        p.sigma_down = Some(v);
                        p.down_table = None;
                    }
                    SweepParam::RMax => p.r_max = v,
                    SweepParam::Lambda0 => p.lambda_0 = v,
                    _ => p.d_prime = Some(ComplexInput::Real(v)),
                }
            }
            SweepParam::D | SweepParam::DRe | SweepParam::DIm => {
                let mut d = overlap(file);
                match self {
                    SweepParam::D => d = v.into(),
                    SweepParam::DRe => d.re = v,
                    _ => d.im = v,
                }
                file.observer.d = Some(d.into());
                file.observer.modes = None;
            }
            SweepParam::Tau => file.environment.as_mut().ok_or_else(|| missing("environment"))?.tau = v,
            SweepParam::TMeas => file.environment.as_mut().ok_or_else(|| missing("environment"))?.t_meas = v,
            SweepParam::PErrUp => file.error.get_or_insert(ErrorSection { p_err_up: 0.0, p_err_down: 0.0 }).p_err_up = v,
            SweepParam::PErrDown => file.error.get_or_insert(ErrorSection { p_err_up: 0.0, p_err_down: 0.0 }).p_err_down = v,
            SweepParam::NTrials => {
                if !(v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64) {
                    return Err(ToolkitError::Config { path: "n_trials".into(), message: format!("{v} is not a trial count") });
                }
                file.n_trials = v as u64;
            }
        }
        Ok(())
    }
}

/// One sweep point. Unbounded trial counts are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub closed_form: f64,
    pub expected_s: f64,
    pub required_trials: Option<u64>,
    pub n_total: u64,
    pub n_qualified: u64,
    pub n_q2_zero: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub mean_p_theory: f64,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub reject_null: Option<bool>,
    pub config_digest: String,
}

/// Run `file` once per value of `param`.
pub fn sweep(file: &ConfigFile, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>, ToolkitError> {
    values
        .iter()
        .map(|&v| {
            let mut f = file.clone();
            f.report.replicates = 0;
            param.apply(&mut f, v)?;
            let r = run(&f)?;
            let c = &r.campaign;
            Ok(SweepRow {
                value: v,
                closed_form: r.closed_form,
                expected_s: r.expected_s,
                required_trials: r.required_trials.finite(),
                n_total: c.n_total,
                n_qualified: c.n_qualified,
                n_q2_zero: c.n_q2_zero,
                p_hat: c.p_hat,
                stderr: c.stderr,
                mean_p_theory: c.mean_p_theory,
                z: r.test.map(|t| t.z),
                p_value: r.test.map(|t| t.p_value),
                reject_null: r.test.map(|t| t.reject_null),
                config_digest: c.config_digest.clone(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, ToolkitError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| ToolkitError::Table(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ToolkitError::Table(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ToolkitError::Table(e.to_string()))
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, ToolkitError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| ToolkitError::Table(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::preset;

    #[test]
    fn parameter_names_round_trip() {
        for n in SweepParam::names() {
            assert_eq!(n.parse::<SweepParam>().unwrap().to_string(), n);
        }
        assert!(matches!("wavelength".parse::<SweepParam>(), Err(ToolkitError::UnknownParameter(_))));
    }

    #[test]
    fn overlap_sweep_sizes() {
        let mut f = preset("unitary-D0.1").unwrap();
        f.n_trials = 500;
        let rows = sweep(&f, SweepParam::D, &[0.0, 0.05, 0.1, 0.2]).unwrap();
        let n: Vec<_> = rows.iter().map(|r| r.required_trials).collect();
        assert_eq!(n, [None, Some(1600), Some(400), Some(100)]);
        let csv = sweep_csv(&rows).unwrap();
        assert_eq!(parse_sweep_csv(&csv).unwrap(), rows);
    }

    #[test]
    fn missing_section_is_a_config_error() {
        let f = preset("unitary-D0.1").unwrap();
        assert!(matches!(sweep(&f, SweepParam::PhiF, &[0.0]), Err(ToolkitError::Config { .. })));
        assert!(matches!(sweep(&f, SweepParam::NTrials, &[2.5]), Err(ToolkitError::Config { .. })));
    }
}
