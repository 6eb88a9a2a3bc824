//! Orthogonal Procrustes alignment and principal angles between subspaces.

use nalgebra::DMatrix;

use super::OrthonormalBasis;
use crate::error::{Error, Result};

/// Best orthogonal alignment of `p_est` onto `p_true` (reflections allowed)
/// and the resulting root-mean-square deviation (1/√n)‖P_est·U − P_true‖_F.
///
/// Both inputs are n×r and assumed centered; U comes from the singular value
/// decomposition of P_estᵀ P_true.
pub fn procrustes_rmsd(p_est: &DMatrix<f64>, p_true: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if p_est.shape() != p_true.shape() {
        return Err(Error::dims(format!(
            "realizations {}x{} vs {}x{}",
            p_est.nrows(),
            p_est.ncols(),
            p_true.nrows(),
            p_true.ncols()
        )));
    }
    let n = p_est.nrows();
    let r = p_est.ncols();
    if n == 0 || r == 0 {
        return Ok((0.0, DMatrix::identity(r, r)));
    }
    let m = p_est.transpose() * p_true;
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u") * svd.v_t.expect("svd with v_t");
    let rmsd = (p_est * &u - p_true).norm() / (n as f64).sqrt();
    Ok((rmsd, u))
}

/// Sines of the principal angles between the ranges of U and V, ascending.
/// sin²Γ are the eigenvalues of I − (VᵀU)(VᵀU)ᵀ.
pub fn principal_angle_sines(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<Vec<f64>> {
    if u.ambient_dim() != v.ambient_dim() || u.cols() != v.cols() {
        return Err(Error::dims(format!(
            "bases {}x{} vs {}x{}",
            u.ambient_dim(),
            u.cols(),
            v.ambient_dim(),
            v.cols()
        )));
    }
    let prod = u.matrix().transpose() * v.matrix();
    let svd = prod.svd(false, false);
    // Cosines descending → angles (and sines) ascending.
    let mut sines: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&c| (1.0 - c.clamp(0.0, 1.0).powi(2)).max(0.0).sqrt())
        .collect();
    sines.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN sines"));
    Ok(sines)
}
