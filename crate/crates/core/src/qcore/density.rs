use nalgebra::DMatrix;

use super::layout::{strides, Layout};
use super::{all_finite, c, Operator, QError, QResult, StateVector, ALG_TOL, C64, PSD_TOL};

/// Density operator over a composite space, row-major entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    n: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(dims: Vec<usize>, entries: Vec<C64>) -> QResult<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(QError::ZeroDimension);
        }
        let n: usize = dims.iter().product();
        if entries.len() != n * n {
            return Err(QError::DimMismatch { expected: n * n, found: entries.len() });
        }
        if !all_finite(&entries) {
            return Err(QError::NonFinite);
        }
        let rho = DensityMatrix { dims, n, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_state(s: &StateVector) -> Self {
        let a = s.amps();
        let n = a.len();
        let entries = (0..n * n).map(|k| a[k / n] * a[k % n].conj()).collect();
        DensityMatrix { dims: s.dims().to_vec(), n, entries }
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, entries: Vec<C64>) -> Self {
        let n = dims.iter().product();
        DensityMatrix { dims, n, entries }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.entry(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|i| (i..n).all(|j| (self.entry(i, j) - self.entry(j, i).conj()).norm() <= tol))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.entry(i, j) + self.entry(j, i).conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> QResult<()> {
        if !self.is_hermitian(ALG_TOL) {
            return Err(QError::InvalidDensity("not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > ALG_TOL {
            return Err(QError::InvalidDensity(format!("trace {tr}")));
        }
        let lo = self.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(QError::InvalidDensity(format!("eigenvalue {lo}")));
        }
        Ok(())
    }

    /// `U ρ U†` with `op` acting on `targets`.
    pub fn evolve(&self, op: &Operator, targets: &[usize]) -> QResult<DensityMatrix> {
        let layout = op.layout_for(&self.dims, targets)?;
        let n = self.n;
        let mut col = vec![c(0.0, 0.0); n];
        let mut out_col = vec![c(0.0, 0.0); n];
        // left multiplication, column by column
        let mut left = vec![c(0.0, 0.0); n * n];
        for j in 0..n {
            for (i, x) in col.iter_mut().enumerate() {
                *x = self.entries[i * n + j];
            }
            op.apply_with_layout(&layout, &col, &mut out_col);
            for i in 0..n {
                left[i * n + j] = out_col[i];
            }
        }
        // (Uρ)U† = (U (Uρ)†)†, so apply U to the conjugated rows
        let mut out = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                col[j] = left[i * n + j].conj();
            }
            op.apply_with_layout(&layout, &col, &mut out_col);
            for j in 0..n {
                out[i * n + j] = out_col[j].conj();
            }
        }
        Ok(DensityMatrix { dims: self.dims.clone(), n, entries: out })
    }

    /// `Re tr(P ρ)` for an operator acting on `targets`.
    pub fn expectation(&self, op: &Operator, targets: &[usize]) -> QResult<f64> {
        let layout = op.layout_for(&self.dims, targets)?;
        let n = self.n;
        let mut col = vec![c(0.0, 0.0); n];
        let mut out_col = vec![c(0.0, 0.0); n];
        let mut tr = 0.0;
        for j in 0..n {
            for (i, x) in col.iter_mut().enumerate() {
                *x = self.entries[i * n + j];
            }
            op.apply_with_layout(&layout, &col, &mut out_col);
            tr += out_col[j].re;
        }
        Ok(tr)
    }

    /// Multiply every entry whose row and column differ in any of the
    /// `subsystems` digits by `factor`.
    pub(crate) fn scale_coherences(&self, subsystems: &[usize], factor: f64) -> QResult<DensityMatrix> {
        if subsystems.is_empty() || subsystems.iter().any(|&k| k >= self.dims.len()) {
            return Err(QError::InvalidTargets(subsystems.to_vec()));
        }
        let st = strides(&self.dims);
        let key = |i: usize| -> Vec<usize> {
            subsystems.iter().map(|&k| (i / st[k]) % self.dims[k]).collect()
        };
        let keys: Vec<Vec<usize>> = (0..self.n).map(key).collect();
        let n = self.n;
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if keys[i] == keys[j] {
                    self.entries[k]
                } else {
                    self.entries[k] * factor
                }
            })
            .collect();
        Ok(DensityMatrix { dims: self.dims.clone(), n, entries })
    }
}

/// Reduced state on the subsystems in `keep`, in that order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> QResult<DensityMatrix> {
    let layout = Layout::new(&rho.dims, keep)?;
    let dims: Vec<usize> = keep.iter().map(|&k| rho.dims[k]).collect();
    let m = layout.offsets.len();
    let mut entries = vec![c(0.0, 0.0); m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = c(0.0, 0.0);
            for &base in &layout.bases {
                s += rho.entry(base + layout.offsets[a], base + layout.offsets[b]);
            }
            entries[a * m + b] = s;
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(dims, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_state_density_has_single_entry() {
        let rho = StateVector::basis(vec![2, 2], 0).unwrap().density();
        assert_eq!(rho.entry(0, 0), c(1.0, 0.0));
        assert_eq!(rho.entries().iter().filter(|z| z.norm() > 0.0).count(), 1);
        rho.validate().unwrap();
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let h = FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![2, 2], vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        let red = partial_trace(&bell.density(), &[0]).unwrap();
        assert!((red.entry(0, 0) - c(0.5, 0.0)).norm() < 1e-12);
        assert!((red.entry(1, 1) - c(0.5, 0.0)).norm() < 1e-12);
        assert!(red.entry(0, 1).norm() < 1e-12);
        let red1 = partial_trace(&bell.density(), &[1]).unwrap();
        assert!((red1.entry(1, 1) - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn invalid_keep_rejected() {
        let rho = StateVector::basis(vec![2, 2], 0).unwrap().density();
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let e = vec![c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)];
        assert!(DensityMatrix::new(vec![2], e).is_err());
        let neg = vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)];
        assert!(DensityMatrix::new(vec![2], neg).is_err());
    }

    #[test]
    fn evolve_matches_pure_state_evolution() {
        let h = FRAC_1_SQRT_2;
        let had = Operator::new(vec![2], vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]).unwrap();
        let s = StateVector::normalized(vec![2, 3], (0..6).map(|k| c(k as f64, 1.0 - k as f64)).collect()).unwrap();
        let via_rho = s.density().evolve(&had, &[0]).unwrap();
        let via_psi = crate::qcore::apply(&had, &s, &[0]).unwrap().density();
        for (a, b) in via_rho.entries().iter().zip(via_psi.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
