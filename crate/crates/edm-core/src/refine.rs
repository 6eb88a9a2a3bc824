//! Local refinement: steepest descent with Armijo backtracking on the
//! factored misfit ‖𝒫K(PPᵀ) − d‖².

use nalgebra::DMatrix;

use crate::cliques::PartialEdm;
use crate::error::{Error, Result};
use crate::realization::Realization;

#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    pub max_iters: usize,
    /// Absolute gradient tolerance is this factor times ‖d‖.
    pub grad_tol_rel: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
    /// Upper limit on the trial step.
    pub step_cap: f64,
    /// Stop once five consecutive steps each shave off less than this
    /// fraction of the objective; the gradient tolerance is unreachable on
    /// noisy data, where the plateau arrives within a few dozen iterations.
    pub stall_tol: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol_rel: 1e-9,
            sufficient_decrease: 1e-4,
            shrink: 0.5,
            step_cap: 1e6,
            stall_tol: 1e-8,
        }
    }
}

const STALL_RUN: usize = 5;

/// Objective ‖𝒫K(PPᵀ) − d‖² and its gradient 4 Σ_{j∼i} ρ_ij (pᵢ − pⱼ) per row.
pub fn objective_and_gradient(g: &PartialEdm, p: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let r = p.ncols();
    let mut obj = 0.0;
    let mut grad = DMatrix::zeros(p.nrows(), r);
    for (i, j, dij) in g.d().iter() {
        let mut sq = 0.0;
        for c in 0..r {
            let diff = p[(i, c)] - p[(j, c)];
            sq += diff * diff;
        }
        let rho = sq - dij;
        obj += rho * rho;
        for c in 0..r {
            let diff = p[(i, c)] - p[(j, c)];
            grad[(i, c)] += 4.0 * rho * diff;
            grad[(j, c)] -= 4.0 * rho * diff;
        }
    }
    (obj, grad)
}

#[derive(Debug)]
pub struct RefineOutcome {
    pub realization: Realization,
    pub iterations: usize,
    /// Objective values per accepted iterate, starting with the seed's.
    pub objective_trace: Vec<f64>,
}

/// Monotone steepest descent from a seed realization. Each iteration
/// backtracks from a step that doubles after every success; output is
/// re-centered.
pub fn steepest_descent(
    g: &PartialEdm,
    seed: &Realization,
    opts: &RefineOptions,
) -> Result<RefineOutcome> {
    if seed.n() != g.n() || seed.dim() != g.r() {
        return Err(Error::dims(format!(
            "seed is {}x{}, instance wants {}x{}",
            seed.n(),
            seed.dim(),
            g.n(),
            g.r()
        )));
    }
    let grad_tol = opts.grad_tol_rel * g.d().norm();
    let mut p = seed.points().clone();
    let (mut obj, mut grad) = objective_and_gradient(g, &p);
    let mut trace = vec![obj];
    let mut step = 1.0f64;
    let mut iterations = 0;
    let mut stalled = 0;

    while iterations < opts.max_iters {
        let grad_norm_sq = grad.norm_squared();
        if grad_norm_sq.sqrt() <= grad_tol {
            break;
        }
        let mut accepted = false;
        let mut t = step.min(opts.step_cap);
        for _ in 0..60 {
            let trial = &p - t * &grad;
            let (trial_obj, trial_grad) = objective_and_gradient(g, &trial);
            if trial_obj <= obj - opts.sufficient_decrease * t * grad_norm_sq {
                let decrease = obj - trial_obj;
                stalled = if decrease <= opts.stall_tol * obj {
                    stalled + 1
                } else {
                    0
                };
                p = trial;
                obj = trial_obj;
                grad = trial_grad;
                step = (2.0 * t).min(opts.step_cap);
                accepted = true;
                break;
            }
            t *= opts.shrink;
        }
        if !accepted {
            break;
        }
        trace.push(obj);
        iterations += 1;
        if stalled >= STALL_RUN {
            break;
        }
    }

    Ok(RefineOutcome {
        realization: Realization::new(p).centered(),
        iterations,
        objective_trace: trace,
    })
}
