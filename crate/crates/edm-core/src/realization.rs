//! Point configurations in ℝʳ and their Gram matrices.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{procrustes_rmsd, SymmetricMatrix};

/// An n×r point matrix (rows are points), usually centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    points: DMatrix<f64>,
}

impl Realization {
    pub fn new(points: DMatrix<f64>) -> Self {
        Self { points }
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn into_points(self) -> DMatrix<f64> {
        self.points
    }

    /// Translation-free copy (column means subtracted).
    pub fn centered(&self) -> Realization {
        let n = self.n();
        let mut pts = self.points.clone();
        if n > 0 {
            for c in 0..pts.ncols() {
                let mean = pts.column(c).mean();
                for i in 0..n {
                    pts[(i, c)] -= mean;
                }
            }
        }
        Realization::new(pts)
    }

    /// Gram matrix X = PPᵀ.
    pub fn gram(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetrized(&(&self.points * self.points.transpose()))
    }

    /// RMSD to another realization after centering both and aligning with the
    /// best orthogonal map.
    pub fn rmsd_to(&self, other: &Realization) -> Result<f64> {
        let a = self.centered();
        let b = other.centered();
        let (rmsd, _) = procrustes_rmsd(a.points(), b.points())?;
        Ok(rmsd)
    }

    /// Rows selected by `idx`, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Realization {
        let r = self.dim();
        let pts = DMatrix::from_fn(idx.len(), r, |i, c| self.points[(idx[i], c)]);
        Realization::new(pts)
    }
}

/// Factors a symmetric matrix into an n×r realization from its r leading
/// positive eigenvalues (negative ones clipped to zero).
pub fn factor_rank(x: &SymmetricMatrix, r: usize) -> Realization {
    let n = x.n();
    let (vals, vecs) = x.sorted_eigen();
    let mut pts = DMatrix::zeros(n, r);
    for c in 0..r.min(n) {
        let lam = vals[c].max(0.0);
        if lam > 0.0 {
            let s = lam.sqrt();
            for i in 0..n {
                pts[(i, c)] = s * vecs[(i, c)];
            }
        }
    }
    Realization::new(pts)
}
