//! Extreme eigenpairs of J M J restricted to e⊥ (J = I − eeᵀ/n) via Lanczos
//! with full reorthogonalization, plus an exact dense path.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{complement_basis, SymmetricMatrix};
use crate::error::{Error, Result};

/// Which end of the spectrum to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// Matrix-free symmetric operator; the deflation v ↦ JMJv is applied by the
/// eigensolver, not the operator.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// y ← M x.
    fn apply(&self, x: &DVector<f64>, y: &mut DVector<f64>);
}

impl SymmetricOperator for SymmetricMatrix {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        y.gemv(1.0, self.as_matrix(), x, 0.0);
    }
}

#[derive(Debug, Clone)]
pub struct EigOptions {
    /// Budget of operator applications before NoConvergence.
    pub max_matvecs: usize,
    /// Relative tolerance on the Ritz residual.
    pub tol: f64,
    /// Krylov basis size per sweep.
    pub basis: usize,
}

impl EigOptions {
    pub fn for_dim(n: usize) -> Self {
        Self {
            max_matvecs: 10 * n.max(30),
            tol: 1e-9,
            basis: 48,
        }
    }
}

fn project_out_e(x: &mut DVector<f64>) {
    let mean = x.mean();
    x.add_scalar_mut(-mean);
}

fn deterministic_start(n: usize, attempt: u64) -> DVector<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(0xED4C0DE ^ attempt);
    let mut v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    project_out_e(&mut v);
    let nrm = v.norm();
    if nrm > 0.0 {
        v /= nrm;
    }
    v
}

/// Extreme eigenpair of J M J on e⊥ for a matrix-free operator.
///
/// Returns (eigenvalue, unit eigenvector ⟂ e). Lanczos with full
/// reorthogonalization and restarts; errs with NoConvergence when the matvec
/// budget runs out so the caller can fall back to the dense path.
pub fn extreme_eigpair_on_complement(
    op: &impl SymmetricOperator,
    which: Extreme,
    opts: &EigOptions,
) -> Result<(f64, DVector<f64>)> {
    let n = op.dim();
    assert!(n >= 2, "operator must act on at least 2 dimensions");
    let m = opts.basis.min(n - 1).max(2);
    let mut matvecs = 0usize;
    let mut scratch = DVector::zeros(n);
    let mut apply_deflated = |x: &DVector<f64>, mv: &mut usize| -> DVector<f64> {
        let mut xin = x.clone();
        project_out_e(&mut xin);
        op.apply(&xin, &mut scratch);
        *mv += 1;
        let mut y = scratch.clone();
        project_out_e(&mut y);
        y
    };

    let mut start = deterministic_start(n, 0);
    let mut attempt = 1u64;
    let mut best: Option<(f64, DVector<f64>, f64)> = None; // (value, vector, residual)
    let mut prev_residual = f64::INFINITY;

    while matvecs < opts.max_matvecs {
        // One Lanczos sweep from `start`.
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
        let mut alphas: Vec<f64> = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        let mut v = start.clone();
        let nrm = v.norm();
        if nrm < 1e-300 {
            start = deterministic_start(n, attempt);
            attempt += 1;
            continue;
        }
        v /= nrm;
        basis.push(v);

        for j in 0..m {
            if matvecs >= opts.max_matvecs {
                break;
            }
            let mut w = apply_deflated(&basis[j], &mut matvecs);
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            w.axpy(-alpha, &basis[j], 1.0);
            if j > 0 {
                let b = betas[j - 1];
                w.axpy(-b, &basis[j - 1], 1.0);
            }
            // Full reorthogonalization for numerical stability.
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
            let beta = w.norm();
            if j + 1 == m || beta < 1e-13 {
                betas.push(beta);
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }

        let k = alphas.len();
        if k == 0 {
            break;
        }
        let tri = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j || j + 1 == i {
                betas[i.min(j)]
            } else {
                0.0
            }
        });
        let eig = tri.symmetric_eigen();
        let mut idx = 0usize;
        for i in 1..k {
            let better = match which {
                Extreme::Min => eig.eigenvalues[i] < eig.eigenvalues[idx],
                Extreme::Max => eig.eigenvalues[i] > eig.eigenvalues[idx],
            };
            if better {
                idx = i;
            }
        }
        let theta = eig.eigenvalues[idx];
        let w = eig.eigenvectors.column(idx);
        let mut ritz = DVector::zeros(n);
        // The sweep may hold one more basis vector than Lanczos coefficients
        // when the matvec budget ran out mid-iteration.
        for (j, q) in basis.iter().take(k).enumerate() {
            ritz.axpy(w[j], q, 1.0);
        }
        project_out_e(&mut ritz);
        let rn = ritz.norm();
        if rn > 0.0 {
            ritz /= rn;
        }

        // Explicit residual (one extra matvec).
        let mut res = apply_deflated(&ritz, &mut matvecs);
        res.axpy(-theta, &ritz, 1.0);
        let residual = res.norm();
        let scale = eig
            .eigenvalues
            .iter()
            .fold(theta.abs(), |acc, &v| acc.max(v.abs()))
            .max(1e-300);

        let replace = match &best {
            None => true,
            Some((_, _, r)) => residual < *r,
        };
        if replace {
            best = Some((theta, ritz.clone(), residual));
        }
        if residual <= opts.tol * scale {
            let (val, vec, _) = best.unwrap();
            return Ok((val, vec));
        }
        // Restart from the Ritz vector; on stagnation try a fresh start.
        if residual > 0.9 * prev_residual {
            start = deterministic_start(n, attempt);
            attempt += 1;
        } else {
            start = ritz;
        }
        prev_residual = residual;
    }
    Err(Error::NoConvergence { matvecs })
}

/// Exact dense extreme eigenpair of J M J on e⊥ via conjugation with the
/// fixed complement basis of e.
pub fn extreme_eigpair_on_complement_dense(
    m: &SymmetricMatrix,
    which: Extreme,
) -> (f64, DVector<f64>) {
    let n = m.n();
    assert!(n >= 2);
    let uc = complement_basis(n);
    let inner = SymmetricMatrix::symmetrized(&(uc.transpose() * m.as_matrix() * &uc));
    let (vals, vecs) = inner.sorted_eigen();
    let idx = match which {
        Extreme::Max => 0,
        Extreme::Min => n - 2,
    };
    let mut v = &uc * vecs.column(idx);
    let nrm = v.norm();
    if nrm > 0.0 {
        v /= nrm;
    }
    (vals[idx], v)
}
