use std::borrow::Cow;

use rand_distr::{Distribution, Normal};

use super::{probed_probability, Engine, EngineError, ExperimentConfig, TrialRecord, Variant, INVARIANT_TOL};
use crate::environment::{analytic_p, dephase_subsystems, flip_with};
use crate::gates::{cnot, hadamard, pauli_x, projector_q2_0};
use crate::observer::{InferredPath, ObserverModel};
use crate::probe::{ratio_gate, ratio_threshold, ProbeEvent};
use crate::qcore::{apply, born_sample, Operator, ProjectiveMeasurement, RandomStream, StateVector, C64};

const Q1: usize = 0;
const Q2: usize = 1;
const OBS: usize = 2;

/// A configuration compiled into operators, ready to run trials.
///
/// When a trial has no randomness before the final readout (or, for the
/// collapse engine, only the branch choice and the record error), the circuit
/// is evaluated once per distinct branch and the trials draw from the cached
/// probabilities.
pub struct Protocol {
    cfg: ExperimentConfig,
    h: Operator,
    cnot: Operator,
    x: Operator,
    interaction: Operator,
    rotation: Operator,
    misid: Option<Operator>,
    backaction: Option<Operator>,
    p0: Operator,
    q1_measurement: ProjectiveMeasurement,
    a: f64,
    lambda: f64,
    k_ratio: f64,
    initial: StateVector,
    cache: Cache,
}

enum Cache {
    None,
    /// Unitary engine: `(p(q2=0), p_theory)` of the one reachable state.
    Unitary(f64, f64),
    /// Collapse engine: `p(q1=0)` and `p(q2=0)` indexed by branch and record.
    Collapse { p_branch0: f64, p0: [[f64; 2]; 2] },
}

/// Everything about a trial except the final draw.
struct Prepared {
    p_brute: f64,
    p_theory: f64,
    observer_outcome: Option<u8>,
    recorded: Option<u8>,
    event: Option<ProbeEvent>,
    path: Option<InferredPath>,
    qualifies: bool,
    overlap: C64,
}

fn draw(p0: f64, rng: &mut RandomStream) -> u8 {
    if rng.uniform() < p0 {
        0
    } else {
        1
    }
}

impl Protocol {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        let obs = &cfg.observer;
        let a = cfg.rotation_params()?.alpha_sqr();
        let backaction = match cfg.probe.as_ref().and_then(|p| p.d_prime) {
            Some(dp) => Some(obs.backaction_unitary(dp).map_err(|e| super::config_err("probe.d_prime", e.to_string()))?),
            None => None,
        };
        let zero = StateVector::basis(vec![2], 0)?;
        let initial = zero.tensor(&zero).tensor(obs.pre_state());
        let mut p = Protocol {
            cfg: cfg.clone(),
            h: hadamard(),
            cnot: cnot(),
            x: pauli_x(),
            interaction: obs.interaction_unitary(),
            rotation: cfg.rotation_params()?.operator(),
            misid: cfg.error.map(|e| e.misidentification_unitary()),
            backaction,
            p0: projector_q2_0(),
            q1_measurement: ProjectiveMeasurement::computational(2, Q1)?,
            a,
            lambda: cfg.coherence(),
            k_ratio: cfg.probe.as_ref().map_or(f64::INFINITY, |p| ratio_threshold(p.lambda_0)),
            initial,
            cache: Cache::None,
        };
        p.cache = p.build_cache()?;
        Ok(p)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn build_cache(&self) -> Result<Cache, EngineError> {
        if self.cfg.probe.is_some() {
            return Ok(Cache::None);
        }
        match self.cfg.engine {
            Engine::Unitary if !self.cfg.jitter_active() => {
                // no draws happen before the readout, so any stream will do
                let mut unused = RandomStream::from_seed(0);
                let prep = self.prepare_unitary(u64::MAX, &mut unused)?;
                Ok(Cache::Unitary(prep.p_brute, prep.p_theory))
            }
            Engine::Collapse => {
                let s = apply(&self.h, &self.initial, &[Q1])?;
                let p_branch0 = s.marginal(Q1)?[0];
                let mut p0 = [[0.0; 2]; 2];
                for (b, row) in p0.iter_mut().enumerate() {
                    for (rec, cell) in row.iter_mut().enumerate() {
                        let branch = StateVector::basis(vec![2], b)?.tensor(&StateVector::basis(vec![2], 0)?);
                        let branch = branch.tensor(self.cfg.observer.pre_state());
                        let s = self.collapse_after_branch(&branch, b as u8, rec as u8, u64::MAX)?;
                        *cell = s.projected_norm_sqr(&self.p0, &[Q1, Q2])?;
                    }
                }
                Ok(Cache::Collapse { p_branch0, p0 })
            }
            _ => Ok(Cache::None),
        }
    }

    /// Run trial `trial_id` with its own random stream.
    pub fn trial(&self, trial_id: u64, rng: &mut RandomStream) -> Result<TrialRecord, EngineError> {
        let prep = match (&self.cache, self.cfg.engine) {
            (Cache::Unitary(p, t), _) => Prepared {
                p_brute: *p,
                p_theory: *t,
                observer_outcome: None,
                recorded: None,
                event: None,
                path: None,
                qualifies: true,
                overlap: self.cfg.observer.overlap(),
            },
            (Cache::Collapse { p_branch0, p0 }, _) => {
                let b = draw(*p_branch0, rng);
                let rec = self.record(b, rng);
                Prepared {
                    p_brute: p0[b as usize][rec as usize],
                    p_theory: self.unprobed_theory(self.cfg.observer.overlap()),
                    observer_outcome: Some(b),
                    recorded: Some(rec),
                    event: None,
                    path: None,
                    qualifies: true,
                    overlap: self.cfg.observer.overlap(),
                }
            }
            (Cache::None, Engine::Unitary) => self.prepare_unitary(trial_id, rng)?,
            (Cache::None, Engine::Collapse) => self.prepare_collapse(trial_id, rng)?,
        };
        let final_q2 = draw(prep.p_brute, rng);
        Ok(TrialRecord {
            trial_id,
            engine: self.cfg.engine,
            observer_outcome: prep.observer_outcome,
            recorded: prep.recorded,
            probe_event: prep.event,
            inferred_path: prep.path,
            qualifies: prep.qualifies,
            final_q2,
            p_theory: prep.p_theory,
            overlap: prep.overlap,
        })
    }

    fn record(&self, b: u8, rng: &mut RandomStream) -> u8 {
        match &self.cfg.error {
            Some(e) => flip_with(b, e.p_err_up, e.p_err_down, rng),
            None => b,
        }
    }

    fn unprobed_theory(&self, d: C64) -> f64 {
        analytic_p(self.cfg.engine, d, self.cfg.error.as_ref(), self.a, self.lambda)
    }

    fn trial_observer(&self, rng: &mut RandomStream) -> Cow<'_, ObserverModel> {
        if self.cfg.jitter_active() {
            let normal = Normal::new(0.0, self.cfg.jitter_sigma).expect("sigma validated");
            let theta: f64 = normal.sample(rng);
            Cow::Owned(self.cfg.observer.pointer_reset().with_phase_jitter(theta))
        } else {
            Cow::Borrowed(&self.cfg.observer)
        }
    }

    /// Conditional variant: flip the second qubit when the photon points to
    /// the up branch.
    fn gate_on_photon(&self, ev: &ProbeEvent) -> (InferredPath, bool) {
        let path = ratio_gate(ev, self.k_ratio);
        (path, path != InferredPath::Indeterminate)
    }

    fn prepare_unitary(&self, trial_id: u64, rng: &mut RandomStream) -> Result<Prepared, EngineError> {
        let obs = self.trial_observer(rng);
        let interaction = if self.cfg.jitter_active() { Cow::Owned(obs.interaction_unitary()) } else { Cow::Borrowed(&self.interaction) };
        let mut s = apply(&self.h, &self.initial, &[Q1])?;
        if self.cfg.variant == Variant::Entangled {
            s = apply(&self.cnot, &s, &[Q1, Q2])?;
        }
        s = apply(&interaction, &s, &[Q1, OBS])?;
        if let Some(e) = &self.misid {
            s = apply(e, &s, &[Q1, Q2])?;
        }

        let mut overlap = obs.overlap();
        let mut event = None;
        let mut path = None;
        let mut qualifies = true;
        if let Some(probe) = &self.cfg.probe {
            let w = s.marginal(Q1)?;
            let total = w[0] + w[1];
            let ev = probe.sample_impact(w[0] / total, w[1] / total, rng)?;
            s = s.reweight(Q1, &[ev.f, ev.f_prime])?;
            if let (Some(dp), Some(_)) = (probe.d_prime, &self.backaction) {
                let back = if self.cfg.jitter_active() {
                    Cow::Owned(obs.backaction_unitary(dp).map_err(|e| super::config_err("probe.d_prime", e.to_string()))?)
                } else {
                    Cow::Borrowed(self.backaction.as_ref().expect("checked above"))
                };
                s = apply(&back, &s, &[Q1, OBS])?;
                overlap = dp;
            }
            match self.cfg.variant {
                Variant::Entangled => qualifies = ev.qualifies,
                Variant::Conditional => {
                    let (p, q) = self.gate_on_photon(&ev);
                    if p == InferredPath::Up {
                        s = apply(&self.x, &s, &[Q2])?;
                    }
                    path = Some(p);
                    qualifies = q;
                }
            }
            event = Some(ev);
        }

        let p_brute = match &self.cfg.environment {
            Some(env) => {
                let rho = dephase_subsystems(&s.density(), &[Q1, Q2], env.t_meas, env)?;
                rho.evolve(&self.rotation, &[Q1, Q2])?.expectation(&self.p0, &[Q1, Q2])?
            }
            None => apply(&self.rotation, &s, &[Q1, Q2])?.projected_norm_sqr(&self.p0, &[Q1, Q2])?,
        };
        let p_theory = match &event {
            Some(ev) => probed_probability(
                Engine::Unitary,
                self.cfg.variant,
                ev,
                path.unwrap_or(InferredPath::Indeterminate),
                overlap,
                self.a,
                self.lambda,
            ),
            None => self.unprobed_theory(overlap),
        };
        if !((p_brute - p_theory).abs() <= INVARIANT_TOL) {
            return Err(EngineError::Invariant {
                trial: trial_id,
                detail: format!("closed form {p_theory} differs from state expectation {p_brute}"),
            });
        }
        Ok(Prepared { p_brute, p_theory, observer_outcome: None, recorded: None, event, path, qualifies, overlap })
    }

    /// Observer interaction, error-prone record and copy into the second
    /// qubit for a definite first-qubit branch.
    fn collapse_after_branch(&self, branch: &StateVector, b: u8, rec: u8, trial_id: u64) -> Result<StateVector, EngineError> {
        let mut s = apply(&self.interaction, branch, &[Q1, OBS])?;
        if rec == 1 {
            s = apply(&self.x, &s, &[Q2])?;
        }
        let q2 = s.marginal(Q2)?;
        if (q2[rec as usize] - 1.0).abs() > INVARIANT_TOL {
            return Err(EngineError::Invariant {
                trial: trial_id,
                detail: format!("second qubit does not hold the recorded value {rec} (branch {b})"),
            });
        }
        s = apply(&self.rotation, &s, &[Q1, Q2])?;
        Ok(s)
    }

    fn prepare_collapse(&self, trial_id: u64, rng: &mut RandomStream) -> Result<Prepared, EngineError> {
        let s = apply(&self.h, &self.initial, &[Q1])?;
        let (k, branch) = born_sample(&s, &self.q1_measurement, rng)?;
        let b = k as u8;
        let probe = self.cfg.probe.as_ref().expect("uncached collapse trials carry a probe");
        let ev = if b == 0 { probe.sample_impact(1.0, 0.0, rng)? } else { probe.sample_impact(0.0, 1.0, rng)? };
        let (rec, path, qualifies) = match self.cfg.variant {
            Variant::Entangled => (self.record(b, rng), None, ev.qualifies),
            Variant::Conditional => {
                let (p, q) = self.gate_on_photon(&ev);
                ((p == InferredPath::Up) as u8, Some(p), q)
            }
        };
        let s = match self.cfg.variant {
            Variant::Entangled => self.collapse_after_branch(&branch, b, rec, trial_id)?,
            Variant::Conditional => {
                // the photon, not the observer, sets the second qubit here
                let mut s = apply(&self.interaction, &branch, &[Q1, OBS])?;
                if rec == 1 {
                    s = apply(&self.x, &s, &[Q2])?;
                }
                apply(&self.rotation, &s, &[Q1, Q2])?
            }
        };
        let p_brute = s.projected_norm_sqr(&self.p0, &[Q1, Q2])?;
        let overlap = self.cfg.observer.overlap();
        let p_theory = probed_probability(
            Engine::Collapse,
            self.cfg.variant,
            &ev,
            path.unwrap_or(InferredPath::Indeterminate),
            overlap,
            self.a,
            self.lambda,
        );
        Ok(Prepared {
            p_brute,
            p_theory,
            observer_outcome: Some(b),
            recorded: Some(rec),
            event: Some(ev),
            path,
            qualifies,
            overlap,
        })
    }
}
