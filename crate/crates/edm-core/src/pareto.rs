//! Trace-parameterized Pareto search: a Frank-Wolfe affine-minorant oracle
//! for the misfit value function and an inexact Newton root finder driving it
//! to the max-trace or min-trace solution.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::cliques::PartialEdm;
use crate::error::{Error, Result};
use crate::linalg::{
    extreme_eigpair_on_complement, extreme_eigpair_on_complement_dense, project_centered_psd_rank,
    EigOptions, Extreme, SymmetricMatrix, SymmetricOperator,
};
use crate::realization::{factor_rank, Realization};
use crate::report::SolveReport;

/// Below this size the direction eigenproblem is solved densely.
const DENSE_EIG_CUTOFF: usize = 80;

/// Which end of the Pareto frontier the root finder targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Largest trace with misfit within σ (+β).
    Max,
    /// Smallest trace with misfit within σ (+β).
    Min,
}

/// Gradient of the misfit objective in edge-plus-diagonal form: acting as
/// x ↦ Σ_{j∼i} ρ_ij (x_i − x_j), a weighted graph Laplacian that annihilates e.
pub struct SparseGradient<'a> {
    rows: &'a [Vec<(usize, usize)>],
    rho: &'a [f64],
}

impl SymmetricOperator for SparseGradient<'_> {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, e) in row {
                acc += self.rho[e] * (x[i] - x[j]);
            }
            y[i] = acc;
        }
    }
}

impl SparseGradient<'_> {
    fn to_dense(&self) -> SymmetricMatrix {
        let n = self.rows.len();
        let mut m = SymmetricMatrix::zeros(n);
        for (i, row) in self.rows.iter().enumerate() {
            let mut diag = 0.0;
            for &(j, e) in row {
                diag += self.rho[e];
                if j > i {
                    m.set(i, j, -self.rho[e]);
                }
            }
            m.set(i, i, diag);
        }
        m
    }
}

/// The Frank-Wolfe linear subproblem solution over τ𝒟: S = τ vvᵀ with v the
/// minimum eigenvector of the gradient on e⊥.
#[derive(Debug, Clone)]
pub struct FwDirection {
    pub scale: f64,
    pub vector: DVector<f64>,
    /// λ_min of the gradient restricted to e⊥.
    pub eigenvalue: f64,
    /// ⟨grad, S⟩ = τ·λ_min.
    pub value: f64,
}

/// Minimizes ⟨grad, S⟩ over S ∈ τ𝒟. Dense for small problems, Lanczos with a
/// dense fallback otherwise.
pub fn fw_direction(grad: &SparseGradient, tau: f64) -> Result<FwDirection> {
    let n = grad.dim();
    if n < 2 {
        return Err(Error::dims("direction subproblem needs n ≥ 2"));
    }
    let (eigenvalue, vector) = if n <= DENSE_EIG_CUTOFF {
        extreme_eigpair_on_complement_dense(&grad.to_dense(), Extreme::Min)
    } else {
        match extreme_eigpair_on_complement(grad, Extreme::Min, &EigOptions::for_dim(n)) {
            Ok(pair) => pair,
            Err(Error::NoConvergence { .. }) => {
                extreme_eigpair_on_complement_dense(&grad.to_dense(), Extreme::Min)
            }
            Err(e) => return Err(e),
        }
    };
    Ok(FwDirection {
        scale: tau,
        vector,
        eigenvalue,
        value: tau * eigenvalue,
    })
}

/// Exact minimizer of the quadratic γ ↦ f(X + γ(S−X)) over [0,1], expressed
/// through the edge images: ρ = 𝒜X − d and Δ = 𝒜(S−X).
pub fn exact_linesearch(rho: &[f64], delta: &[f64]) -> f64 {
    let denom: f64 = delta.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let numer: f64 = -rho.iter().zip(delta).map(|(r, s)| r * s).sum::<f64>();
    (numer / denom).clamp(0.0, 1.0)
}

/// Warm-startable Frank-Wolfe iterate: the dense matrix plus its edge image.
#[derive(Debug, Clone)]
pub struct FwState {
    tau: f64,
    x: DMatrix<f64>,
    ax: Vec<f64>,
}

impl FwState {
    /// The scaled centering matrix τ/(n−1)·J, the canonical interior point of
    /// τ𝒟; its edge image is constant 2τ/(n−1).
    pub fn fresh(g: &PartialEdm, tau: f64) -> Self {
        let n = g.n();
        let nf = n as f64;
        let c = tau / (nf - 1.0);
        let x = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c * (1.0 - 1.0 / nf)
            } else {
                -c / nf
            }
        });
        let ax = vec![2.0 * c; g.num_edges()];
        Self { tau, x, ax }
    }

    pub fn zero(g: &PartialEdm) -> Self {
        Self {
            tau: 0.0,
            x: DMatrix::zeros(g.n(), g.n()),
            ax: vec![0.0; g.num_edges()],
        }
    }

    /// Wraps an explicit symmetric matrix as a warm start; the trace level is
    /// read off the matrix and the edge image recomputed.
    pub fn from_matrix(g: &PartialEdm, x: DMatrix<f64>) -> Self {
        assert_eq!(x.nrows(), g.n(), "warm-start matrix size vs instance");
        assert_eq!(x.ncols(), g.n(), "warm-start matrix must be square");
        let ax = g
            .d()
            .edges()
            .iter()
            .map(|&(i, j)| x[(i, i)] + x[(j, j)] - 2.0 * x[(i, j)])
            .collect();
        let tau = x.trace();
        Self { tau, x, ax }
    }

    /// Moves the iterate to a new trace level: scaling stays inside τ𝒟.
    pub fn rescaled(mut self, new_tau: f64) -> Self {
        if self.tau == 0.0 {
            panic!("cannot rescale a zero-trace state");
        }
        let factor = new_tau / self.tau;
        self.x *= factor;
        for v in &mut self.ax {
            *v *= factor;
        }
        self.tau = new_tau;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// ‖𝒜X − d‖ of the iterate.
    pub fn misfit(&self, g: &PartialEdm) -> f64 {
        self.ax
            .iter()
            .zip(g.d().values())
            .map(|(a, d)| (a - d) * (a - d))
            .sum::<f64>()
            .sqrt()
    }
}

/// The oracle's certified triple: l ≤ v(τ) ≤ u and the globally valid affine
/// minorant τ' ↦ l + s(τ'−τ).
#[derive(Debug, Clone, Copy)]
pub struct OracleTriple {
    pub l: f64,
    pub u: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleExit {
    /// u ≤ α·l in the shifted scale: certified relative accuracy.
    RatioSatisfied,
    /// √(2u_k) − σ ≤ β: the query point already meets the misfit target.
    MisfitBelowBeta,
    /// Iteration cap; bounds are valid but the ratio is not certified.
    IterationCap,
}

#[derive(Debug)]
pub struct OracleOutcome {
    pub triple: OracleTriple,
    pub exit: OracleExit,
    pub fw_iterations: usize,
    /// Final iterate; under exact line search also the best-misfit iterate.
    pub state: FwState,
}

/// Per-solve context: neighbor lists carrying edge indices for O(|E|)
/// gradient matvecs.
pub struct ParetoProblem<'a> {
    g: &'a PartialEdm,
    rows: Vec<Vec<(usize, usize)>>,
}

impl<'a> ParetoProblem<'a> {
    pub fn new(g: &'a PartialEdm) -> Self {
        let mut rows = vec![Vec::new(); g.n()];
        for (e, &(i, j)) in g.d().edges().iter().enumerate() {
            rows[i].push((j, e));
            rows[j].push((i, e));
        }
        Self { g, rows }
    }

    pub fn graph(&self) -> &PartialEdm {
        self.g
    }

    /// The misfit gradient at edge residual ρ = 𝒜X − d, as a sparse operator.
    pub fn gradient<'b>(&'b self, rho: &'b [f64]) -> SparseGradient<'b> {
        SparseGradient {
            rows: &self.rows,
            rho,
        }
    }

    /// Edge image of the rank-1 matrix τ vvᵀ.
    fn ax_rank1(&self, v: &DVector<f64>, tau: f64) -> Vec<f64> {
        self.g
            .d()
            .edges()
            .iter()
            .map(|&(i, j)| {
                let w = v[i] - v[j];
                tau * w * w
            })
            .collect()
    }
}

/// Affine minorant oracle for v(τ) = φ(τ) − σ, run by Frank-Wolfe with exact
/// line search. The certificate (l, s) comes from the residual y = d − 𝒜X at
/// the last iterate where the duality-gap lower bound strictly improved; weak
/// duality makes the affine minorant globally valid in τ'.
pub fn fw_oracle(
    problem: &ParetoProblem,
    tau: f64,
    sigma: f64,
    alpha: f64,
    beta: f64,
    warm: Option<FwState>,
    max_iters: usize,
) -> Result<OracleOutcome> {
    if tau < 0.0 || sigma < 0.0 {
        return Err(Error::Validation(format!(
            "oracle needs τ ≥ 0 and σ ≥ 0, got τ={tau}, σ={sigma}"
        )));
    }
    if alpha <= 1.0 {
        return Err(Error::Validation(format!(
            "relative tolerance must exceed 1, got α={alpha}"
        )));
    }
    let g = problem.g;
    let d = g.d().values();

    if tau == 0.0 {
        // Singleton feasible set {0}: bounds are exact, slope from the
        // gradient at zero.
        let state = FwState::zero(g);
        let norm_d = g.d().norm();
        if norm_d == 0.0 {
            return Ok(OracleOutcome {
                triple: OracleTriple {
                    l: -sigma,
                    u: -sigma,
                    s: 0.0,
                },
                exit: OracleExit::MisfitBelowBeta,
                fw_iterations: 0,
                state,
            });
        }
        let rho: Vec<f64> = d.iter().map(|v| -v).collect();
        let dir = fw_direction(&problem.gradient(&rho), tau)?;
        let bound = norm_d - sigma;
        return Ok(OracleOutcome {
            triple: OracleTriple {
                l: bound,
                u: bound,
                s: dir.eigenvalue / norm_d,
            },
            exit: if bound <= beta {
                OracleExit::MisfitBelowBeta
            } else {
                OracleExit::RatioSatisfied
            },
            fw_iterations: 0,
            state,
        });
    }

    let mut state = match warm {
        Some(w) if w.tau > 0.0 => w.rescaled(tau),
        _ => FwState::fresh(g, tau),
    };

    let mut l_curr = 0.5 * sigma * sigma;
    // Evaluate the start point so an already-feasible warm start exits
    // before any direction work.
    let mut u_curr = {
        let m = state.misfit(g);
        0.5 * m * m
    };
    // Snapshot of (gap bound, residual, λ_min) at the last strict l-improvement.
    let mut snap: Option<(f64, f64, f64)> = None; // (gap, ‖y‖, λ_min)
    let mut iters = 0usize;
    let exit;

    loop {
        let shifted_u = if u_curr.is_finite() {
            (2.0 * u_curr).sqrt() - sigma
        } else {
            f64::INFINITY
        };
        let shifted_l = (2.0 * l_curr.max(0.0)).sqrt() - sigma;
        if shifted_u <= beta {
            exit = OracleExit::MisfitBelowBeta;
            break;
        }
        if shifted_u <= alpha * shifted_l {
            exit = OracleExit::RatioSatisfied;
            break;
        }
        if iters >= max_iters {
            exit = OracleExit::IterationCap;
            break;
        }

        let rho: Vec<f64> = state.ax.iter().zip(d).map(|(a, v)| a - v).collect();
        let f_curr = 0.5 * rho.iter().map(|v| v * v).sum::<f64>();
        let dir = fw_direction(&problem.gradient(&rho), tau)?;
        // ⟨∇f, X⟩ = ⟨ρ, 𝒜X⟩ and ⟨∇f, S⟩ = τλ_min.
        let grad_dot_x: f64 = rho.iter().zip(&state.ax).map(|(r, a)| r * a).sum();
        let gap_bound = f_curr + dir.value - grad_dot_x;
        let y_norm = rho.iter().map(|v| v * v).sum::<f64>().sqrt();
        if iters == 0 || gap_bound > l_curr {
            snap = Some((gap_bound, y_norm, dir.eigenvalue));
        }
        l_curr = l_curr.max(gap_bound);

        let ax_s = problem.ax_rank1(&dir.vector, tau);
        let delta: Vec<f64> = ax_s.iter().zip(&state.ax).map(|(s, a)| s - a).collect();
        let gamma = exact_linesearch(&rho, &delta);

        state.x *= 1.0 - gamma;
        let v = &dir.vector;
        state.x.ger(gamma * tau, v, v, 1.0);
        for (a, ds) in state.ax.iter_mut().zip(&delta) {
            *a += gamma * ds;
        }
        let f_next: f64 = 0.5
            * state
                .ax
                .iter()
                .zip(d)
                .map(|(a, v)| (a - v) * (a - v))
                .sum::<f64>();
        u_curr = f_next;
        iters += 1;
    }

    let (gap_snap, y_norm, lam_min) = snap.unwrap_or((l_curr, 0.0, 0.0));
    let shifted_u = if u_curr.is_finite() {
        (2.0 * u_curr).sqrt() - sigma
    } else {
        f64::INFINITY
    };
    let triple = if y_norm == 0.0 {
        OracleTriple {
            l: -sigma,
            u: shifted_u,
            s: 0.0,
        }
    } else {
        OracleTriple {
            l: (gap_snap + 0.5 * y_norm * y_norm) / y_norm - sigma,
            u: shifted_u,
            s: lam_min / y_norm,
        }
    };
    Ok(OracleOutcome {
        triple,
        exit,
        fw_iterations: iters,
        state,
    })
}

/// Closed-form Newton iteration bound: K ≤ max{log_{2/α}(|s₀|R/β) +
/// log_{2/α}(2)·log_{2/α}(2l₀/β), 1} with R the distance from t₀ to the
/// returned root.
pub fn newton_bound(alpha: f64, beta: f64, l0: f64, s0: f64, r_dist: f64) -> f64 {
    let base = 2.0 / alpha;
    if base <= 1.0 || beta <= 0.0 || l0 <= 0.0 || s0 == 0.0 || r_dist <= 0.0 {
        return 1.0;
    }
    let log_b = |x: f64| x.ln() / base.ln();
    (log_b(s0.abs() * r_dist / beta) + log_b(2.0) * log_b(2.0 * l0 / beta)).max(1.0)
}

/// Outcome of the inexact Newton root search.
#[derive(Debug)]
pub struct NewtonOutcome<W = FwState> {
    pub tau: f64,
    pub witness: W,
    pub last_triple: OracleTriple,
    /// Newton steps taken (oracle calls beyond the initial one).
    pub steps: usize,
    pub fw_iterations: usize,
    /// Every inner oracle call terminated by certificate, none by cap.
    pub certified: bool,
    /// A-posteriori iteration bound from the first triple and R = |t₀ − τ*|.
    pub bound: f64,
}

/// Newton parameters; α ∈ (1,2) is the oracle's relative tolerance, β the
/// absolute misfit slack in the output contract ‖𝒜X−d‖ ≤ σ+β.
#[derive(Debug, Clone, Copy)]
pub struct NewtonParams {
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_fw_iters: usize,
}

impl NewtonParams {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            alpha: 1.5,
            beta: 0.1,
            max_fw_iters: 50_000,
        }
    }
}

const NEWTON_HARD_CAP: usize = 500;

/// Inexact Newton iteration t ← t − l/s over an arbitrary affine minorant
/// oracle, until the oracle certifies v(t) ≤ β. Iterates approach the target
/// root from the v > 0 side. The query closure receives the point and the
/// previous witness for warm starting and returns the certified triple, its
/// exit kind, the inner work count, and the new witness.
pub fn newton_root_with<W, F>(
    mut query: F,
    mode: TraceMode,
    t0: f64,
    params: &NewtonParams,
) -> Result<NewtonOutcome<W>>
where
    F: FnMut(f64, Option<W>) -> Result<(OracleTriple, OracleExit, usize, W)>,
{
    let NewtonParams { alpha, beta, .. } = *params;
    if beta <= 0.0 {
        return Err(Error::Validation(format!("β must be positive, got {beta}")));
    }
    let (mut triple, exit, work, mut witness) = query(t0, None)?;
    let mut fw_total = work;
    let mut certified = exit != OracleExit::IterationCap;
    let mut t = t0;
    let first = triple;

    if triple.u > beta {
        match mode {
            TraceMode::Max => {
                if triple.l <= 0.0 || triple.s <= 0.0 {
                    return Err(Error::BadInitialPoint { t0 });
                }
            }
            TraceMode::Min => {
                if triple.l <= 0.0 {
                    return Err(Error::BadInitialPoint { t0 });
                }
                if triple.s >= 0.0 {
                    return Err(Error::Validation(format!(
                        "nonnegative slope {} at t0={t0} in min-trace mode",
                        triple.s
                    )));
                }
            }
        }
    }

    let mut steps = 0usize;
    while triple.u > beta {
        let OracleTriple { l, s, .. } = triple;
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Validation(format!(
                "oracle slope degenerate (s={s}) at t={t}; root not bracketed"
            )));
        }
        let t_next = (t - l / s).max(0.0);
        if t_next == t {
            return Err(Error::NewtonNonConvergence {
                iters: steps,
                bound: newton_bound(alpha, beta, first.l, first.s, (t0 - t).abs()),
            });
        }
        let (next_triple, exit, work, next_witness) = query(t_next, Some(witness))?;
        triple = next_triple;
        witness = next_witness;
        fw_total += work;
        certified = certified && exit != OracleExit::IterationCap;
        t = t_next;
        steps += 1;

        let runtime_bound = newton_bound(alpha, beta, first.l, first.s, (t0 - t).abs());
        if steps as f64 > 10.0 * runtime_bound && steps > NEWTON_HARD_CAP {
            return Err(Error::NewtonNonConvergence {
                iters: steps,
                bound: runtime_bound,
            });
        }
    }

    let bound = newton_bound(alpha, beta, first.l, first.s, (t0 - t).abs());
    Ok(NewtonOutcome {
        tau: t,
        witness,
        last_triple: triple,
        steps,
        fw_iterations: fw_total,
        certified,
        bound,
    })
}

/// Newton root search on v(τ) = φ(τ) − σ with warm-started Frank-Wolfe
/// oracle queries.
pub fn newton_root(
    problem: &ParetoProblem,
    mode: TraceMode,
    t0: f64,
    params: &NewtonParams,
) -> Result<NewtonOutcome> {
    let NewtonParams {
        sigma,
        alpha,
        beta,
        max_fw_iters,
    } = *params;
    newton_root_with(
        |t, warm: Option<FwState>| {
            let out = fw_oracle(problem, t, sigma, alpha, beta, warm, max_fw_iters)?;
            Ok((out.triple, out.exit, out.fw_iterations, out.state))
        },
        mode,
        t0,
        params,
    )
}

/// Options for the full Pareto solve.
#[derive(Debug, Clone, Copy)]
pub struct ParetoOptions {
    pub mode: TraceMode,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_fw_iters: usize,
    /// Max-trace starting point; default n·r·max(d), doubled while the oracle
    /// reports the point is not above the largest root.
    pub t0: Option<f64>,
}

impl ParetoOptions {
    pub fn new(mode: TraceMode, sigma: f64) -> Self {
        Self {
            mode,
            sigma,
            alpha: 1.5,
            beta: 0.1,
            max_fw_iters: 50_000,
            t0: None,
        }
    }
}

const MAX_T0_DOUBLINGS: usize = 60;

/// Full Pareto-point solve: Newton root search on v(τ) = φ(τ) − σ, then the
/// witness projected to the centered rank-r cone and factored into points.
pub fn pareto_solve(g: &PartialEdm, opts: &ParetoOptions) -> Result<(Realization, SolveReport)> {
    let total = Instant::now();
    let ParetoOptions {
        mode,
        sigma,
        alpha,
        beta,
        max_fw_iters,
        t0,
    } = *opts;
    if sigma < 0.0 {
        return Err(Error::Validation(format!("σ must be ≥ 0, got {sigma}")));
    }
    if !(1.0 < alpha && alpha < 2.0) {
        return Err(Error::Validation(format!(
            "α must lie in (1,2), got {alpha}"
        )));
    }
    let problem = ParetoProblem::new(g);
    let params = NewtonParams {
        sigma,
        alpha,
        beta,
        max_fw_iters,
    };

    let t = Instant::now();
    let outcome = match mode {
        TraceMode::Min => {
            if g.d().norm() <= sigma {
                // Zero trace is already feasible.
                NewtonOutcome {
                    tau: 0.0,
                    witness: FwState::zero(g),
                    last_triple: OracleTriple {
                        l: g.d().norm() - sigma,
                        u: g.d().norm() - sigma,
                        s: 0.0,
                    },
                    steps: 0,
                    fw_iterations: 0,
                    certified: true,
                    bound: 1.0,
                }
            } else {
                newton_root(&problem, mode, 0.0, &params)?
            }
        }
        TraceMode::Max => {
            let max_d = g.d().values().iter().cloned().fold(0.0f64, f64::max);
            let mut start = t0.unwrap_or((g.n() * g.r()) as f64 * max_d);
            if start <= 0.0 {
                start = 1.0;
            }
            // Any completion with misfit ≤ σ+β keeps every edge length below
            // √(max d + σ + β), so hop-connectivity caps the trace; a start
            // that keeps doubling past the cap means the trace is unbounded
            // (disconnected measurements).
            let nf = g.n() as f64;
            let trace_cap = nf * (nf - 1.0) * (nf - 1.0) * (max_d + sigma + beta);
            let mut result = None;
            for _ in 0..MAX_T0_DOUBLINGS {
                if start > 2.0 * trace_cap {
                    return Err(Error::Validation(format!(
                        "max-trace search escalated past the connectivity bound \
                         {trace_cap:.3e}; the measurement graph cannot pin the \
                         configuration (likely disconnected)"
                    )));
                }
                match newton_root(&problem, mode, start, &params) {
                    // A start point that is itself feasible sits below the
                    // largest root; push it up until the search approaches
                    // the root from above.
                    Ok(out) if out.steps == 0 && out.last_triple.u <= beta => start *= 2.0,
                    Ok(out) => {
                        result = Some(out);
                        break;
                    }
                    Err(Error::BadInitialPoint { .. }) => start *= 2.0,
                    Err(e) => return Err(e),
                }
            }
            result.ok_or(Error::BadInitialPoint { t0: start })?
        }
    };
    let newton_seconds = t.elapsed().as_secs_f64();

    let witness_trace = outcome.witness.tau();
    let witness_misfit = outcome.witness.misfit(g);

    let t = Instant::now();
    let x = SymmetricMatrix::symmetrized(outcome.witness.matrix());
    let projected = project_centered_psd_rank(&x, g.r())?;
    let realization = factor_rank(&projected, g.r());
    let projection_seconds = t.elapsed().as_secs_f64();

    let mut report = SolveReport {
        algorithm: match mode {
            TraceMode::Max => "pareto-max".into(),
            TraceMode::Min => "pareto-min".into(),
        },
        ..SolveReport::default()
    };
    report.push_stage("newton", newton_seconds);
    report.push_stage("projection", projection_seconds);
    report.residual = g.misfit(&realization);
    report.trace = witness_trace;
    report.sigma = Some(sigma);
    report.beta = Some(beta);
    report.newton_iters = Some(outcome.steps);
    report.fw_iters = Some(outcome.fw_iterations);
    report.witness_trace = Some(witness_trace);
    report.witness_misfit = Some(witness_misfit);
    report.final_slope = Some(outcome.last_triple.s);
    report.certified = outcome.certified;
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
