use super::layout::Layout;
use super::{all_finite, c, QError, QResult, StateVector, ALG_TOL, C64};

/// Square complex matrix acting on a composite space with the given
/// subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    n: usize,
    entries: Vec<C64>,
    unitary: bool,
}

impl Operator {
    /// Build from row-major entries. The unitary flag is set by checking
    /// `U†U = I` to [`ALG_TOL`].
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
        let mut op = Operator { dims, n, entries, unitary: false };
        op.unitary = op.unitarity_defect() < ALG_TOL;
        Ok(op)
    }

    pub fn from_fn(dims: Vec<usize>, f: impl Fn(usize, usize) -> C64) -> QResult<Self> {
        let n: usize = dims.iter().product();
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(dims, entries)
    }

    pub fn identity(dims: Vec<usize>) -> QResult<Self> {
        Self::from_fn(dims, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> QResult<Self> {
        if a.dims() != b.dims() {
            return Err(QError::DimMismatch { expected: a.len(), found: b.len() });
        }
        let (x, y) = (a.amps(), b.amps());
        Self::from_fn(a.dims().to_vec(), |i, j| x[i] * y[j].conj())
    }

    /// Unitary sending the unit vector `from` to the unit vector `to`.
    ///
    /// Both vectors are completed to orthonormal bases by Gram–Schmidt over
    /// the standard basis in index order, and the k-th completion vector of
    /// `from` is mapped to the k-th completion vector of `to`. The result is
    /// deterministic and equals the identity when `from == to`.
    pub fn mapping(from: &StateVector, to: &StateVector) -> QResult<Self> {
        if from.dims() != to.dims() {
            return Err(QError::DimMismatch { expected: from.len(), found: to.len() });
        }
        let src = complete_basis(from.amps());
        let dst = complete_basis(to.amps());
        let n = from.len();
        Self::from_fn(from.dims().to_vec(), |i, j| {
            (0..n).map(|k| dst[k][i] * src[k][j].conj()).sum()
        })
    }

    /// Block-diagonal operator `Σ_k |k⟩⟨k| ⊗ blocks[k]` on `control ⊗ system`.
    pub fn controlled(blocks: &[Operator]) -> QResult<Self> {
        let first = blocks.first().ok_or(QError::ZeroDimension)?;
        let m = first.n;
        if blocks.iter().any(|b| b.dims != first.dims) {
            return Err(QError::DimMismatch { expected: m, found: 0 });
        }
        let mut dims = vec![blocks.len()];
        dims.extend_from_slice(&first.dims);
        Self::from_fn(dims, |i, j| {
            let (bi, bj) = (i / m, j / m);
            if bi == bj {
                blocks[bi].entries[(i % m) * m + j % m]
            } else {
                c(0.0, 0.0)
            }
        })
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

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.entries[(k % n) * n + k / n].conj()).collect();
        Operator { dims: self.dims.clone(), n, entries, unitary: self.unitary }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Operator) -> QResult<Operator> {
        if self.n != other.n {
            return Err(QError::DimMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Operator::new(self.dims.clone(), out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        let (n, m) = (self.n, other.n);
        let nm = n * m;
        let mut entries = vec![c(0.0, 0.0); nm * nm];
        for i in 0..nm {
            for j in 0..nm {
                entries[i * nm + j] =
                    self.entries[(i / m) * n + j / m] * other.entries[(i % m) * m + j % m];
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        // product of unitaries is unitary; recheck anyway for the flag
        Operator::new(dims, entries).expect("kron of valid operators is valid")
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..n {
                    s += self.entries[k * n + i].conj() * self.entries[k * n + j];
                }
                if i == j {
                    s -= c(1.0, 0.0);
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| (self.entry(i, j) - self.entry(j, i).conj()).norm() <= tol))
    }

    /// `P² = P` and `P† = P` to `tol`.
    pub fn is_projector(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let sq = match self.matmul(self) {
            Ok(sq) => sq,
            Err(_) => return false,
        };
        sq.entries.iter().zip(&self.entries).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Largest entrywise distance to another operator of the same size.
    pub fn distance(&self, other: &Operator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Apply to raw amplitudes over `full_dims`, acting on `targets`
    /// (identity elsewhere). No normalization is imposed on the result.
    pub fn apply_raw(&self, full_dims: &[usize], amps: &[C64], targets: &[usize]) -> QResult<Vec<C64>> {
        let layout = self.layout_for(full_dims, targets)?;
        let total: usize = full_dims.iter().product();
        if amps.len() != total {
            return Err(QError::DimMismatch { expected: total, found: amps.len() });
        }
        let mut out = vec![c(0.0, 0.0); total];
        self.apply_with_layout(&layout, amps, &mut out);
        Ok(out)
    }

    pub(crate) fn layout_for(&self, full_dims: &[usize], targets: &[usize]) -> QResult<Layout> {
        let layout = Layout::new(full_dims, targets)?;
        let target_dims: Vec<usize> = targets.iter().map(|&t| full_dims[t]).collect();
        if target_dims != self.dims {
            return Err(QError::DimMismatch { expected: self.n, found: layout.offsets.len() });
        }
        Ok(layout)
    }

    pub(crate) fn apply_with_layout(&self, layout: &Layout, amps: &[C64], out: &mut [C64]) {
        let m = self.n;
        for &base in &layout.bases {
            for (a, &oa) in layout.offsets.iter().enumerate() {
                let row = &self.entries[a * m..(a + 1) * m];
                let mut acc = c(0.0, 0.0);
                for (x, &ob) in row.iter().zip(&layout.offsets) {
                    acc += x * amps[base + ob];
                }
                out[base + oa] = acc;
            }
        }
    }
}

/// Orthonormal basis whose first element is `v` normalized, extended by
/// Gram–Schmidt over the standard basis vectors in index order.
pub(crate) fn complete_basis(v: &[C64]) -> Vec<Vec<C64>> {
    let n = v.len();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    basis.push(v.iter().map(|z| z / norm).collect());
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = vec![c(0.0, 0.0); n];
        w[k] = c(1.0, 0.0);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn > 1e-8 {
            basis.push(w.into_iter().map(|z| z / wn).collect());
        }
    }
    basis
}

/// A complete set of orthogonal projectors acting on chosen subsystems.
///
/// Completeness and orthogonality are checked once at construction so that
/// sampling in hot loops stays cheap.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    projectors: Vec<Operator>,
    targets: Vec<usize>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<Operator>, targets: Vec<usize>) -> QResult<Self> {
        let first = projectors.first().ok_or(QError::IncompleteProjectors)?;
        let n = first.dim();
        if projectors.iter().any(|p| p.dims() != first.dims()) {
            return Err(QError::IncompleteProjectors);
        }
        let mut sum = vec![c(0.0, 0.0); n * n];
        for p in &projectors {
            if !p.is_projector(ALG_TOL) {
                return Err(QError::IncompleteProjectors);
            }
            for (s, e) in sum.iter_mut().zip(p.entries()) {
                *s += e;
            }
        }
        let complete = (0..n * n).all(|k| {
            let want = if k / n == k % n { 1.0 } else { 0.0 };
            (sum[k] - c(want, 0.0)).norm() <= ALG_TOL
        });
        if !complete {
            return Err(QError::IncompleteProjectors);
        }
        for (i, p) in projectors.iter().enumerate() {
            for q in &projectors[i + 1..] {
                let pq = p.matmul(q)?;
                if pq.entries().iter().any(|z| z.norm() > ALG_TOL) {
                    return Err(QError::IncompleteProjectors);
                }
            }
        }
        Ok(ProjectiveMeasurement { projectors, targets })
    }

    /// Computational-basis measurement of a single subsystem of dimension `dim`.
    pub fn computational(dim: usize, target: usize) -> QResult<Self> {
        let projectors = (0..dim)
            .map(|k| {
                Operator::from_fn(vec![dim], |i, j| {
                    if i == k && j == k {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                })
            })
            .collect::<QResult<Vec<_>>>()?;
        Self::new(projectors, vec![target])
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }
}
