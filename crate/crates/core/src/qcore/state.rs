use rand::Rng;

use super::density::DensityMatrix;
use super::{all_finite, c, Operator, ProjectiveMeasurement, QError, QResult, ALG_TOL, C64};

/// Normalized pure state over a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

fn check_dims(dims: &[usize], len: usize) -> QResult<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(QError::ZeroDimension);
    }
    let n: usize = dims.iter().product();
    if n != len {
        return Err(QError::DimMismatch { expected: n, found: len });
    }
    Ok(())
}

impl StateVector {
    /// Wrap amplitudes that are already normalized to [`ALG_TOL`].
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> QResult<Self> {
        check_dims(&dims, amps.len())?;
        if !all_finite(&amps) {
            return Err(QError::NonFinite);
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ALG_TOL {
            return Err(QError::NotNormalized(norm));
        }
        Ok(StateVector { dims, amps })
    }

    /// Normalize arbitrary non-zero amplitudes.
    pub fn normalized(dims: Vec<usize>, mut amps: Vec<C64>) -> QResult<Self> {
        check_dims(&dims, amps.len())?;
        if !all_finite(&amps) {
            return Err(QError::NonFinite);
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(QError::ZeroVector);
        }
        amps.iter_mut().for_each(|z| *z /= norm);
        Ok(StateVector { dims, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> QResult<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(QError::DimMismatch { expected: n, found: index + 1 });
        }
        let mut amps = vec![c(0.0, 0.0); n];
        amps[index] = c(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { dims, amps }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> QResult<C64> {
        if self.dims != other.dims {
            return Err(QError::DimMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_state(self)
    }

    /// Squared norm of `P s` for an operator acting on `targets`.
    pub fn projected_norm_sqr(&self, op: &Operator, targets: &[usize]) -> QResult<f64> {
        let out = op.apply_raw(&self.dims, &self.amps, targets)?;
        Ok(out.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Re-scale branch amplitudes along one subsystem by `factors[k]` for
    /// digit `k`, then renormalize.
    pub fn reweight(&self, subsystem: usize, factors: &[C64]) -> QResult<StateVector> {
        if subsystem >= self.dims.len() || factors.len() != self.dims[subsystem] {
            return Err(QError::InvalidTargets(vec![subsystem]));
        }
        let stride: usize = self.dims[subsystem + 1..].iter().product();
        let d = self.dims[subsystem];
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, z)| z * factors[(i / stride) % d])
            .collect();
        Self::normalized(self.dims.clone(), amps)
    }

    /// Marginal probabilities of the computational-basis digits of one subsystem.
    pub fn marginal(&self, subsystem: usize) -> QResult<Vec<f64>> {
        if subsystem >= self.dims.len() {
            return Err(QError::InvalidTargets(vec![subsystem]));
        }
        let stride: usize = self.dims[subsystem + 1..].iter().product();
        let d = self.dims[subsystem];
        let mut p = vec![0.0; d];
        for (i, z) in self.amps.iter().enumerate() {
            p[(i / stride) % d] += z.norm_sqr();
        }
        Ok(p)
    }
}

pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    a.tensor(b)
}

pub fn inner(a: &StateVector, b: &StateVector) -> QResult<C64> {
    a.inner(b)
}

/// Apply a unitary to the targeted subsystems.
pub fn apply(op: &Operator, s: &StateVector, targets: &[usize]) -> QResult<StateVector> {
    if !op.is_unitary() {
        return Err(QError::NotUnitary);
    }
    let amps = op.apply_raw(&s.dims, &s.amps, targets)?;
    Ok(StateVector { dims: s.dims.clone(), amps })
}

/// Draw outcome `k` with probability `‖P_k s‖²` and return the renormalized
/// post-measurement state.
pub fn born_sample<R: Rng + ?Sized>(
    s: &StateVector,
    measurement: &ProjectiveMeasurement,
    rng: &mut R,
) -> QResult<(usize, StateVector)> {
    let mut branches = measurement
        .projectors()
        .iter()
        .map(|p| p.apply_raw(&s.dims, &s.amps, measurement.targets()))
        .collect::<QResult<Vec<_>>>()?;
    let probs: Vec<f64> = branches.iter().map(|b| b.iter().map(|z| z.norm_sqr()).sum()).collect();
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut pick = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            pick = k;
            break;
        }
    }
    let post = StateVector::normalized(s.dims.clone(), branches.swap_remove(pick))?;
    Ok((pick, post))
}
