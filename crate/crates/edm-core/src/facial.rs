//! Facial reduction solver: per-clique exposing directions, their weighted
//! aggregate, and the least-squares solve on the reduced face.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::cliques::PartialEdm;
use crate::cliques::{clique_union_preprocess, find_cliques, order_cliques, Clique, CliqueSet};
use crate::error::{Error, Result};
use crate::linalg::{
    centered_rank_projection, complement_basis, k_pinv, OrthonormalBasis, SymmetricMatrix,
};
use crate::realization::Realization;
use crate::report::SolveReport;

/// Relative eigenvalue threshold below which the aggregate exposing matrix is
/// declared deficient (kernel larger than the target rank allows).
const DEFICIENCY_REL_TOL: f64 = 1e-6;
/// Relative tolerance on λ_min(Z) under which the face least-squares solution
/// counts as PSD without the projected-gradient fallback.
const PSD_REL_TOL: f64 = 1e-9;
/// Relative singular-value cutoff for rank detection in the face system.
const RANK_REL_TOL: f64 = 1e-12;
/// Relative residual-change stopping rule of the projected-gradient fallback.
const PG_REL_CHANGE: f64 = 1e-10;
const PG_MAX_ITERS: usize = 50_000;

/// Exposing directions of one clique: an |α|×m orthonormal local basis of the
/// complement of the realized range within e⊥ (m = |α| − 1 − rank).
pub fn clique_exposing(c: &Clique, r: usize) -> Result<DMatrix<f64>> {
    let k = c.size();
    if k < r + 1 {
        return Err(Error::CliqueTooSmall { size: k, r });
    }
    let gram = k_pinv(c.distances())?;
    let proj = centered_rank_projection(&gram, r)?;
    Ok(proj.dropped_basis)
}

/// Weighted aggregate of clique exposing matrices, reduced to the face basis.
#[derive(Debug, Clone)]
pub struct FaceBasis {
    /// n×r orthonormal, orthogonal to e: spans the kernel of the aggregate
    /// within e⊥.
    pub basis: OrthonormalBasis,
    /// The r smallest eigenvalues of the aggregate on e⊥, ascending.
    pub kernel_eigvals: Vec<f64>,
    /// The (r+1)-th smallest eigenvalue on e⊥; must be clearly positive.
    pub gap_eigval: f64,
    pub max_eigval: f64,
    /// The weighted sum of padded exposing matrices.
    pub aggregate: SymmetricMatrix,
    /// Nearest centered PSD matrix of rank ≤ n−r: the r smallest eigenvalues
    /// on e⊥ rounded off, negatives clipped.
    pub rounded: SymmetricMatrix,
}

/// Sums ω_α · W_α into the global frame and extracts the r-dimensional
/// near-kernel. Cliques with |α| ≤ r expose nothing and are skipped. Fails
/// with the uncovered-vertex diagnostic when the kernel is larger than r.
pub fn aggregate_exposing(set: &CliqueSet, n: usize, r: usize) -> Result<FaceBasis> {
    if n < r + 2 {
        return Err(Error::RankOutOfRange { r, n });
    }
    let mut w = DMatrix::<f64>::zeros(n, n);
    for (idx, c) in set.cliques.iter().enumerate() {
        if c.size() < r + 1 {
            continue;
        }
        let weight = set.weights.get(idx).copied().unwrap_or(1.0);
        let local = clique_exposing(c, r)?;
        let w_local = &local * local.transpose();
        let vs = c.vertices();
        for (a, &va) in vs.iter().enumerate() {
            for (b, &vb) in vs.iter().enumerate() {
                w[(va, vb)] += weight * w_local[(a, b)];
            }
        }
    }
    let w = SymmetricMatrix::symmetrized(&w);

    let uc = complement_basis(n);
    let reduced = SymmetricMatrix::symmetrized(&(uc.transpose() * w.as_matrix() * &uc));
    let (vals, vecs) = reduced.sorted_eigen(); // descending, length n−1
    let asc = |i: usize| vals[n - 2 - i];
    let max_eigval = vals[0];
    let gap_eigval = asc(r);

    if gap_eigval < DEFICIENCY_REL_TOL * max_eigval.max(f64::MIN_POSITIVE) {
        let max_diag = (0..n).map(|v| w.get(v, v)).fold(0.0f64, f64::max);
        let uncovered = (0..n)
            .filter(|&v| w.get(v, v) <= 1e-12 * max_diag)
            .collect();
        return Err(Error::DeficientAggregate { uncovered });
    }

    let mut basis = DMatrix::zeros(n, r);
    let mut kernel_eigvals = Vec::with_capacity(r);
    for i in 0..r {
        let col = n - 2 - i; // ascending position i
        basis.set_column(i, &(&uc * vecs.column(col)));
        kernel_eigvals.push(vals[col]);
    }
    let mut rounded = DMatrix::zeros(n, n);
    for i in 0..n - 1 - r {
        if vals[i] > 0.0 {
            let col = (&uc * vecs.column(i)).clone_owned();
            rounded.ger(vals[i], &col, &col, 1.0);
        }
    }
    Ok(FaceBasis {
        basis: OrthonormalBasis::new_centered(basis)?,
        kernel_eigvals,
        gap_eigval,
        max_eigval,
        aggregate: w,
        rounded: SymmetricMatrix::symmetrized(&rounded),
    })
}

/// Solution of the least-squares problem on the face X = U Z Uᵀ.
#[derive(Debug, Clone)]
pub struct FaceSolution {
    /// The r×r PSD core Z.
    pub core: SymmetricMatrix,
    /// Points recovering U Z Uᵀ exactly (n×r, centered).
    pub realization: Realization,
    /// ‖𝒫K(UZUᵀ) − d‖ at the returned core.
    pub residual: f64,
    /// The edge system did not determine Z uniquely; minimum-norm solution.
    pub rank_deficient: bool,
    pub projected_gradient_iters: usize,
}

fn svec_index(r: usize) -> Vec<(usize, usize)> {
    let mut idx = Vec::with_capacity(r * (r + 1) / 2);
    for c in 0..r {
        for row in 0..=c {
            idx.push((row, c));
        }
    }
    idx
}

fn svec(z: &SymmetricMatrix, index: &[(usize, usize)]) -> DVector<f64> {
    DVector::from_iterator(
        index.len(),
        index.iter().map(|&(a, b)| {
            if a == b {
                z.get(a, b)
            } else {
                std::f64::consts::SQRT_2 * z.get(a, b)
            }
        }),
    )
}

fn unsvec(v: &DVector<f64>, r: usize, index: &[(usize, usize)]) -> SymmetricMatrix {
    let mut z = SymmetricMatrix::zeros(r);
    for (k, &(a, b)) in index.iter().enumerate() {
        if a == b {
            z.set(a, b, v[k]);
        } else {
            z.set(a, b, v[k] / std::f64::consts::SQRT_2);
        }
    }
    z
}

fn clip_psd(z: &SymmetricMatrix) -> SymmetricMatrix {
    let (vals, vecs) = z.sorted_eigen();
    let r = z.n();
    let mut acc = DMatrix::zeros(r, r);
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.0 {
            let u = vecs.column(k).clone_owned();
            acc.ger(lam, &u, &u, 1.0);
        }
    }
    SymmetricMatrix::symmetrized(&acc)
}

/// Fits the core Z ⪰ 0 of X = U Z Uᵀ to the measured squared distances:
/// each edge (i,j) constrains wᵀZw with w = uᵢ − uⱼ. Solves the
/// unconstrained least squares first (minimum-norm on rank deficiency) and
/// falls back to projected gradient when that solution is not PSD.
pub fn solve_face_least_squares(g: &PartialEdm, face: &OrthonormalBasis) -> Result<FaceSolution> {
    if face.ambient_dim() != g.n() {
        return Err(Error::dims(format!(
            "face basis over {} vertices, instance has {}",
            face.ambient_dim(),
            g.n()
        )));
    }
    let r = face.cols();
    let m = r * (r + 1) / 2;
    let ne = g.num_edges();
    let index = svec_index(r);
    let u = face.matrix();

    let mut a = DMatrix::<f64>::zeros(ne, m);
    for (row, &(i, j)) in g.d().edges().iter().enumerate() {
        let w: Vec<f64> = (0..r).map(|c| u[(i, c)] - u[(j, c)]).collect();
        for (k, &(p, q)) in index.iter().enumerate() {
            a[(row, k)] = if p == q {
                w[p] * w[p]
            } else {
                std::f64::consts::SQRT_2 * w[p] * w[q]
            };
        }
    }
    let rhs = DVector::from_column_slice(g.d().values());

    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = RANK_REL_TOL * sigma_max;
    let effective_rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let rank_deficient = effective_rank < m;
    let z_vec = if sigma_max == 0.0 {
        DVector::zeros(m)
    } else {
        svd.solve(&rhs, cutoff)
            .map_err(|e| Error::Validation(format!("face system solve failed: {e}")))?
    };
    let mut z = unsvec(&z_vec, r, &index);

    let mut pg_iters = 0;
    let z_norm = z.norm();
    let (vals, _) = z.sorted_eigen();
    let lam_min = if vals.is_empty() {
        0.0
    } else {
        vals[vals.len() - 1]
    };
    if lam_min < -PSD_REL_TOL * z_norm.max(f64::MIN_POSITIVE) {
        z = clip_psd(&z);
        let step = 1.0 / (sigma_max * sigma_max);
        let mut res_prev = (&a * svec(&z, &index) - &rhs).norm();
        while pg_iters < PG_MAX_ITERS {
            let zv = svec(&z, &index);
            let grad = a.transpose() * (&a * &zv - &rhs);
            let stepped = zv - step * grad;
            z = clip_psd(&unsvec(&stepped, r, &index));
            pg_iters += 1;
            let res = (&a * svec(&z, &index) - &rhs).norm();
            if (res_prev - res).abs() <= PG_REL_CHANGE * res_prev.max(f64::MIN_POSITIVE) {
                break;
            }
            res_prev = res;
        }
    } else if lam_min < 0.0 {
        z = clip_psd(&z);
    }

    let residual = (&a * svec(&z, &index) - &rhs).norm();

    // Factor U Z Uᵀ as P Pᵀ with P = U Q √Λ.
    let (zvals, zvecs) = z.sorted_eigen();
    let mut p = DMatrix::zeros(g.n(), r);
    for (c, &lam) in zvals.iter().enumerate() {
        if lam > 0.0 {
            p.set_column(c, &(u * zvecs.column(c) * lam.sqrt()));
        }
    }
    Ok(FaceSolution {
        core: z,
        realization: Realization::new(p),
        residual,
        rank_deficient,
        projected_gradient_iters: pg_iters,
    })
}

/// Options for the facial reduction pipeline.
#[derive(Debug, Clone)]
pub struct FrOptions {
    /// Largest clique size grown during discovery; defaults to 3r.
    pub kbar: Option<usize>,
    /// Merge overlapping cliques before exposing (needs a radio range).
    pub clique_union: bool,
    /// Skip the noise-based weights and weigh every clique 1.
    pub uniform_weights: bool,
    /// Noise-factor estimate for the radio-range slack in clique union.
    pub nf_estimate: f64,
}

impl Default for FrOptions {
    fn default() -> Self {
        Self {
            kbar: None,
            clique_union: true,
            uniform_weights: false,
            nf_estimate: 0.1,
        }
    }
}

/// Full facial reduction solve: cliques → (union) → weights → aggregate
/// exposing → face least squares.
pub fn facial_reduction_solve(
    g: &PartialEdm,
    opts: &FrOptions,
) -> Result<(Realization, SolveReport)> {
    let total = Instant::now();
    let n = g.n();
    let r = g.r();
    if n < r + 2 {
        return Err(Error::RankOutOfRange { r, n });
    }
    let mut report = SolveReport {
        algorithm: "fr".into(),
        ..SolveReport::default()
    };

    let t = Instant::now();
    let mut set = find_cliques(g, opts.kbar.unwrap_or(3 * r).max(2))?;
    report.push_stage("cliques", t.elapsed().as_secs_f64());

    if opts.clique_union && g.radio_range().is_some() && set.len() > 1 {
        let t = Instant::now();
        let ordering = order_cliques(&set, n);
        let outcome = clique_union_preprocess(g, &set, &ordering, opts.nf_estimate)?;
        set = outcome.set;
        report.push_stage("union", t.elapsed().as_secs_f64());
    }
    report.cliques = Some(set.len());

    let t = Instant::now();
    if opts.uniform_weights {
        set.weights = vec![1.0; set.len()];
    } else {
        set.compute_weights(r)?;
    }
    report.push_stage("weights", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let face = aggregate_exposing(&set, n, r)?;
    report.push_stage("exposing", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let sol = solve_face_least_squares(g, &face.basis)?;
    report.push_stage("least_squares", t.elapsed().as_secs_f64());

    let realization = sol.realization;
    report.residual = g.misfit(&realization);
    report.trace = sol.core.trace();
    report.rank_deficient_system = sol.rank_deficient;
    report.projected_gradient_iters = Some(sol.projected_gradient_iters);
    report.certified = sol.projected_gradient_iters < PG_MAX_ITERS;
    if let Some(truth) = g.ground_truth() {
        let rmsd = realization.rmsd_to(truth)?;
        report.rmsd = Some(rmsd);
        if let Some(radio) = g.radio_range() {
            report.rmsd_pct_radio = Some(100.0 * rmsd / radio);
        }
    }
    report.total_seconds = total.elapsed().as_secs_f64();
    Ok((realization, report))
}
