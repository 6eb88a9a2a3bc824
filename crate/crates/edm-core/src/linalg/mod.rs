//! Dense symmetric kernels: the Gram-to-EDM operators, centered-PSD
//! projections, extreme eigenpairs on the complement of `e`, and Procrustes
//! alignment.

mod eig;
mod procrustes;

pub use eig::{
    extreme_eigpair_on_complement, extreme_eigpair_on_complement_dense, EigOptions, Extreme,
    SymmetricOperator,
};
pub use procrustes::{principal_angle_sines, procrustes_rmsd};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense symmetric matrix; both triangles are stored and kept bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    mat: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: DMatrix::identity(n, n),
        }
    }

    /// Builds from `f` evaluated on the upper triangle (i ≤ j) and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut mat = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        Self { mat }
    }

    /// Symmetrizes an arbitrary square matrix as (M + Mᵀ)/2.
    pub fn symmetrized(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    /// Wraps a matrix that is already symmetric to the last bit.
    pub fn try_from_exact(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dims(format!(
                "{}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        for j in 0..m.ncols() {
            for i in 0..j {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Validation(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { mat: m })
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    /// Writes both (i,j) and (j,i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.mat[(i, j)] = v;
        self.mat[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Trace inner product ⟨A, B⟩ = tr(AB).
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n(), other.n());
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.mat * x
    }

    /// Largest absolute diagonal entry.
    pub fn max_abs_diag(&self) -> f64 {
        (0..self.n())
            .map(|i| self.mat[(i, i)].abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, v| v.abs().max(m))
    }

    /// Eigenvalues and eigenvectors sorted by descending eigenvalue.
    /// Ties keep the solver's original order.
    pub fn sorted_eigen(&self) -> (DVector<f64>, DMatrix<f64>) {
        let eig = self.mat.clone().symmetric_eigen();
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("non-NaN eigenvalues")
                .then(a.cmp(&b))
        });
        let vals = DVector::from_fn(n, |k, _| eig.eigenvalues[order[k]]);
        let mut vecs = DMatrix::zeros(n, n);
        for (k, &idx) in order.iter().enumerate() {
            vecs.set_column(k, &eig.eigenvectors.column(idx));
        }
        (vals, vecs)
    }
}

impl std::ops::Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.mat[idx]
    }
}

/// Values attached to the edge set of a graph: d ∈ ℝᴱ and images of the
/// coordinate projection 𝒫. Edges are 0-based, strictly i < j, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    n: usize,
    edges: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn new(n: usize, mut pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(i, j, _)| (i, j));
        let mut edges = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for &(i, j, v) in &pairs {
            if i >= j || j >= n {
                return Err(Error::Validation(format!(
                    "edge ({i},{j}) out of range for n={n} (need i < j < n)"
                )));
            }
            if edges.last() == Some(&(i, j)) {
                return Err(Error::Validation(format!("duplicate edge ({i},{j})")));
            }
            edges.push((i, j));
            values.push(v);
        }
        Ok(Self { n, edges, values })
    }

    /// Same edge set, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.edges.len());
        Self {
            n: self.n,
            edges: self.edges.clone(),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Coordinate projection 𝒫: reads this edge set's entries out of X.
    pub fn project(&self, x: &SymmetricMatrix) -> EdgeVector {
        assert_eq!(x.n(), self.n);
        let values = self.edges.iter().map(|&(i, j)| x.get(i, j)).collect();
        self.with_values(values)
    }

    /// Adjoint 𝒫*: scatters values/2 into both triangles of a hollow matrix,
    /// adjoint of `project` under the trace inner product.
    pub fn scatter_half(&self) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::zeros(self.n);
        for (i, j, v) in self.iter() {
            m.set(i, j, 0.5 * v);
        }
        m
    }
}

/// Matrix with (numerically) orthonormal columns, optionally orthogonal to e.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    mat: DMatrix<f64>,
    centered: bool,
}

impl OrthonormalBasis {
    const ORTHO_TOL: f64 = 1e-10;

    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::build(mat, false)
    }

    /// Additionally requires Uᵀe = 0.
    pub fn new_centered(mat: DMatrix<f64>) -> Result<Self> {
        Self::build(mat, true)
    }

    fn build(mat: DMatrix<f64>, centered: bool) -> Result<Self> {
        let k = mat.ncols();
        let gram_err = (mat.transpose() * &mat - DMatrix::identity(k, k)).norm();
        if gram_err > Self::ORTHO_TOL {
            return Err(Error::Validation(format!(
                "columns not orthonormal (‖UᵀU−I‖ = {gram_err:.3e})"
            )));
        }
        if centered {
            let e = DVector::from_element(mat.nrows(), 1.0);
            let centering_err = (mat.transpose() * e).norm();
            if centering_err > Self::ORTHO_TOL * (mat.nrows() as f64).sqrt() {
                return Err(Error::Validation(format!(
                    "columns not orthogonal to e (‖Uᵀe‖ = {centering_err:.3e})"
                )));
            }
        }
        Ok(Self { mat, centered })
    }

    pub fn ambient_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// K(X)_ij = X_ii + X_jj − 2 X_ij: Gram matrix to squared-distance matrix.
pub fn k_map(x: &SymmetricMatrix) -> SymmetricMatrix {
    let n = x.n();
    SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            x.get(i, i) + x.get(j, j) - 2.0 * x.get(i, j)
        }
    })
}

/// K*(D) = 2(Diag(De) − D).
pub fn k_adjoint(d: &SymmetricMatrix) -> SymmetricMatrix {
    let n = d.n();
    let row_sums: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).sum()).collect();
    SymmetricMatrix::from_fn(n, |i, j| {
        if i == j {
            2.0 * (row_sums[i] - d.get(i, i))
        } else {
            -2.0 * d.get(i, j)
        }
    })
}

/// K†(D) = −½ J D J on hollow D, with J = I − eeᵀ/n.
pub fn k_pinv(d: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let max_abs = d.max_abs();
    let max_diag = d.max_abs_diag();
    if max_diag > 1e-12 * max_abs {
        return Err(Error::NonHollowInput { max_diag, max_abs });
    }
    let n = d.n();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| d.get(i, j)).sum::<f64>() / nf)
        .collect();
    let total_mean = row_means.iter().sum::<f64>() / nf;
    Ok(SymmetricMatrix::from_fn(n, |i, j| {
        -0.5 * (d.get(i, j) - row_means[i] - row_means[j] + total_mean)
    }))
}

/// Orthonormal basis of (e/√n)⊥ ⊂ ℝⁿ as an n×(n−1) matrix, built from the
/// Householder reflection mapping e₁ to e/√n. Deterministic.
pub fn complement_basis(n: usize) -> DMatrix<f64> {
    assert!(n >= 1);
    if n == 1 {
        return DMatrix::zeros(1, 0);
    }
    let s = 1.0 / (n as f64).sqrt();
    // w = e₁ − e/√n; H = I − 2wwᵀ/‖w‖²; columns 2..n of H span (e/√n)⊥.
    let mut w = DVector::from_element(n, -s);
    w[0] += 1.0;
    let scale = 2.0 / w.norm_squared();
    DMatrix::from_fn(n, n - 1, |i, j| {
        let col = j + 1;
        let id = if i == col { 1.0 } else { 0.0 };
        id - scale * w[i] * w[col]
    })
}

/// Outcome of the rank-r centered PSD projection, keeping enough spectral
/// data for facial reduction: the basis of the retained range and the
/// discarded directions (both orthogonal to e).
#[derive(Debug, Clone)]
pub struct CenteredRankProjection {
    pub projected: SymmetricMatrix,
    /// n×rank basis of range(projected); rank ≤ r.
    pub kept_basis: DMatrix<f64>,
    /// Eigenvalues retained, descending, all > 0.
    pub kept_eigvals: Vec<f64>,
    /// n×(n−1−rank) basis of the complement of the range within e⊥.
    pub dropped_basis: DMatrix<f64>,
}

/// Projects X onto 𝒮^{n,r}_{c,+} (centered PSD, rank ≤ r): conjugate by the
/// fixed complement basis of e, keep the positive parts of the r largest
/// eigenvalues, conjugate back.
pub fn centered_rank_projection(x: &SymmetricMatrix, r: usize) -> Result<CenteredRankProjection> {
    let n = x.n();
    if n == 0 || r > n - 1 {
        return Err(Error::RankOutOfRange { r, n });
    }
    let uc = complement_basis(n);
    let inner = SymmetricMatrix::symmetrized(&(uc.transpose() * x.as_matrix() * &uc));
    let (vals, vecs) = inner.sorted_eigen();

    let kept: Vec<usize> = (0..r.min(n - 1)).filter(|&k| vals[k] > 0.0).collect();
    let dropped: Vec<usize> = (0..n - 1).filter(|k| !kept.contains(k)).collect();

    let mut kept_basis = DMatrix::zeros(n, kept.len());
    let mut kept_eigvals = Vec::with_capacity(kept.len());
    for (c, &k) in kept.iter().enumerate() {
        kept_basis.set_column(c, &(&uc * vecs.column(k)));
        kept_eigvals.push(vals[k]);
    }
    let mut dropped_basis = DMatrix::zeros(n, dropped.len());
    for (c, &k) in dropped.iter().enumerate() {
        dropped_basis.set_column(c, &(&uc * vecs.column(k)));
    }

    let mut acc = DMatrix::zeros(n, n);
    for (c, &lam) in kept_eigvals.iter().enumerate() {
        let u = kept_basis.column(c).clone_owned();
        acc.ger(lam, &u, &u, 1.0);
    }
    Ok(CenteredRankProjection {
        projected: SymmetricMatrix::symmetrized(&acc),
        kept_basis,
        kept_eigvals,
        dropped_basis,
    })
}

/// Nearest member of 𝒮^{n,r}_{c,+} in Frobenius norm (Eckart-Young on the
/// centered conjugate).
pub fn project_centered_psd_rank(x: &SymmetricMatrix, r: usize) -> Result<SymmetricMatrix> {
    Ok(centered_rank_projection(x, r)?.projected)
}
