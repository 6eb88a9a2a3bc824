use edm_core::cliques::PartialEdm;
use edm_core::instances::{evaluate, generate_instance, NoiseModelParams};
use edm_core::linalg::EdgeVector;
use edm_core::pareto::{
    exact_linesearch, fw_direction, fw_oracle, newton_root, newton_root_with, pareto_solve,
    FwState, NewtonParams, OracleExit, OracleTriple, ParetoOptions, ParetoProblem, TraceMode,
};
use edm_core::refine::{steepest_descent, RefineOptions};
use edm_core::{Error, Realization};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::cell::RefCell;

fn path_graph() -> PartialEdm {
    let d = EdgeVector::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    PartialEdm::new(3, 1, d).unwrap()
}

fn snl(n: usize, noise_factor: f64, radio_range: f64, seed: u64) -> edm_core::instances::Instance {
    generate_instance(&NoiseModelParams {
        n,
        noise_factor,
        radio_range,
        seed,
    })
    .unwrap()
}

#[test]
fn direction_solves_the_path_laplacian_subproblem() {
    let g = path_graph();
    let problem = ParetoProblem::new(&g);
    let rho = vec![1.0, 1.0];
    let dir = fw_direction(&problem.gradient(&rho), 1.0).unwrap();
    assert!((dir.eigenvalue - 1.0).abs() <= 1e-9);
    assert!((dir.value - 1.0).abs() <= 1e-9);
    assert_eq!(dir.scale, 1.0);
    let v = &dir.vector;
    assert!(v[1].abs() <= 1e-9);
    assert!((v[0] * v[0] - 0.5).abs() <= 1e-9);
    assert!((v[0] * v[2] + 0.5).abs() <= 1e-9);
}

#[test]
fn direction_degenerate_scales() {
    let g = path_graph();
    let problem = ParetoProblem::new(&g);
    let rho = vec![1.0, 1.0];
    let dir = fw_direction(&problem.gradient(&rho), 0.0).unwrap();
    assert_eq!(dir.scale, 0.0);
    assert_eq!(dir.value, 0.0);

    let zero = vec![0.0, 0.0];
    let a = fw_direction(&problem.gradient(&zero), 1.0).unwrap();
    let b = fw_direction(&problem.gradient(&zero), 1.0).unwrap();
    assert_eq!(a.value, 0.0);
    assert_eq!(a.vector, b.vector);
}

#[test]
fn linesearch_trivial_cases() {
    assert_eq!(exact_linesearch(&[1.0, -2.0], &[0.0, 0.0]), 0.0);
    assert_eq!(exact_linesearch(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
}

#[test]
fn linesearch_matches_golden_section() {
    let golden = |rho: &[f64], delta: &[f64]| -> f64 {
        let f = |gamma: f64| -> f64 {
            rho.iter()
                .zip(delta)
                .map(|(r, s)| (r + gamma * s) * (r + gamma * s))
                .sum::<f64>()
        };
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-10 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    };
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    for _ in 0..50 {
        let m = rng.random_range(2..20);
        let rho: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let delta: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let gamma = exact_linesearch(&rho, &delta);
        let reference = golden(&rho, &delta);
        assert!(
            (gamma - reference).abs() <= 1e-6,
            "closed form {gamma} vs golden section {reference}"
        );
    }
}

#[test]
fn oracle_zero_tau_is_exact() {
    let inst = snl(12, 0.1, 0.6, 21);
    let g = &inst.edm;
    let problem = ParetoProblem::new(g);
    let sigma = 0.1 * g.d().norm();
    let out = fw_oracle(&problem, 0.0, sigma, 1.5, 0.1, None, 1000).unwrap();
    let expected = g.d().norm() - sigma;
    assert_eq!(out.fw_iterations, 0);
    assert!((out.triple.l - expected).abs() <= 1e-12);
    assert!((out.triple.u - expected).abs() <= 1e-12);
    assert!(out.triple.s <= 0.0);
    assert_eq!(out.state.tau(), 0.0);
}

#[test]
fn oracle_exits_immediately_on_a_feasible_warm_start() {
    let inst = snl(20, 0.05, 0.5, 22);
    let g = &inst.edm;
    let truth = g.ground_truth().unwrap();
    let gram = truth.gram();
    let tau = gram.trace();
    let misfit = evaluate(g, truth).unwrap().misfit;
    let warm = FwState::from_matrix(g, gram.as_matrix().clone());
    assert!((warm.tau() - tau).abs() <= 1e-12);
    assert!((warm.misfit(g) - misfit).abs() <= 1e-12);

    let problem = ParetoProblem::new(g);
    let out = fw_oracle(&problem, tau, misfit + 0.01, 1.5, 0.1, Some(warm), 1000).unwrap();
    assert_eq!(out.exit, OracleExit::MisfitBelowBeta);
    assert_eq!(out.fw_iterations, 0);
    assert!(out.triple.u <= 0.1);
}

#[test]
fn oracle_triples_are_sound_minorants() {
    let inst = snl(18, 0.1, 0.5, 23);
    let g = &inst.edm;
    let problem = ParetoProblem::new(g);
    let truth_trace = g.ground_truth().unwrap().gram().trace();
    let sigma = 0.7 * evaluate(g, g.ground_truth().unwrap()).unwrap().misfit;

    // Tight reference brackets for v(τ') on a grid.
    let taus: Vec<f64> = (0..21)
        .map(|i| truth_trace * 2.0 * i as f64 / 20.0)
        .collect();
    let reference: Vec<OracleTriple> = taus
        .iter()
        .map(|&t| {
            fw_oracle(&problem, t, sigma, 1.01, 1e-3, None, 30_000)
                .unwrap()
                .triple
        })
        .collect();

    for &tau_q in &[0.3 * truth_trace, 0.7 * truth_trace, 1.2 * truth_trace] {
        let out = fw_oracle(&problem, tau_q, sigma, 1.5, 0.01, None, 50_000).unwrap();
        let OracleTriple { l, u, s } = out.triple;
        assert!(l <= u + 1e-12, "l {l} exceeds u {u}");
        if out.exit == OracleExit::RatioSatisfied {
            assert!(l >= 0.0, "non-terminal lower bound must be ≥ 0, got {l}");
            assert!(u <= 1.5 * l + 1e-12, "ratio certificate violated: u/l > α");
        }
        for (t_prime, r) in taus.iter().zip(&reference) {
            let minorant = l + s * (t_prime - tau_q);
            assert!(
                minorant <= r.u + 1e-9,
                "minorant {minorant} exceeds v({t_prime}) ≤ {} (query τ={tau_q})",
                r.u
            );
        }
    }

    // The certified bracket must agree with the reference bracket.
    for (i, (&t, r)) in taus.iter().zip(&reference).enumerate() {
        if t == 0.0 {
            continue;
        }
        let coarse = fw_oracle(&problem, t, sigma, 1.5, 0.01, None, 50_000)
            .unwrap()
            .triple;
        assert!(coarse.l <= r.u + 1e-9, "sample {i}: l above reference u");
        assert!(r.l <= coarse.u + 1e-9, "sample {i}: reference l above u");
    }

    // Convexity of v along equally spaced trace levels, through the brackets.
    for w in reference.windows(3) {
        assert!(
            w[1].l <= 0.5 * (w[0].u + w[2].u) + 1e-9,
            "midpoint bracket violates convexity"
        );
    }
}

#[test]
fn fw_witness_stays_feasible() {
    let inst = snl(25, 0.1, 0.5, 24);
    let g = &inst.edm;
    let problem = ParetoProblem::new(g);
    let tau = 1.3 * g.ground_truth().unwrap().gram().trace();
    let out = fw_oracle(&problem, tau, 0.05, 1.5, 0.01, None, 5_000).unwrap();
    let x = out.state.matrix();
    assert!((x.trace() - tau).abs() <= 1e-8 * tau.max(1.0));
    for i in 0..g.n() {
        assert!(x.row(i).sum().abs() <= 1e-8 * tau.max(1.0));
    }
    let sym = edm_core::linalg::SymmetricMatrix::symmetrized(x);
    let (vals, _) = sym.sorted_eigen();
    let lam_min = vals[vals.len() - 1];
    assert!(lam_min >= -1e-8 * tau.max(1.0), "λ_min {lam_min}");
}

#[test]
fn newton_one_step_on_an_exact_affine_oracle() {
    let params = NewtonParams {
        sigma: 0.0,
        alpha: 1.5,
        beta: 0.1,
        max_fw_iters: 1,
    };
    let out = newton_root_with(
        |t, _: Option<()>| {
            let v: f64 = 2.0 - t;
            let exit = if v <= params.beta {
                OracleExit::MisfitBelowBeta
            } else {
                OracleExit::RatioSatisfied
            };
            Ok((
                OracleTriple {
                    l: v,
                    u: v,
                    s: -1.0,
                },
                exit,
                1,
                (),
            ))
        },
        TraceMode::Min,
        0.0,
        &params,
    )
    .unwrap();
    assert_eq!(out.tau, 2.0);
    assert_eq!(out.steps, 1);
    assert!(out.certified);
}

#[test]
fn newton_sequence_on_an_exact_quadratic_oracle() {
    let queried = RefCell::new(Vec::new());
    let params = NewtonParams {
        sigma: 0.0,
        alpha: 1.5,
        beta: 0.1,
        max_fw_iters: 1,
    };
    let out = newton_root_with(
        |t, _: Option<()>| {
            queried.borrow_mut().push(t);
            let v: f64 = t * t - 4.0;
            let exit = if v <= params.beta {
                OracleExit::MisfitBelowBeta
            } else {
                OracleExit::RatioSatisfied
            };
            Ok((
                OracleTriple {
                    l: v,
                    u: v,
                    s: 2.0 * t,
                },
                exit,
                1,
                (),
            ))
        },
        TraceMode::Max,
        4.0,
        &params,
    )
    .unwrap();
    let seen = queried.borrow();
    assert_eq!(seen[0], 4.0);
    assert!((seen[1] - 2.5).abs() <= 1e-12);
    assert!((seen[2] - 2.05).abs() <= 1e-12);
    assert!(out.tau * out.tau - 4.0 <= params.beta);
    assert!(out.tau >= 2.0);
    assert!((out.steps as f64) <= 10.0 * out.bound);
}

#[test]
fn newton_rejects_an_unbracketed_start() {
    let params = NewtonParams::new(0.0);
    // The oracle cannot certify v(t0) > 0 (l ≤ 0) yet the point is not
    // provably feasible either (u > β): the caller must move t0.
    let err = newton_root_with(
        |_t, _: Option<()>| {
            Ok((
                OracleTriple {
                    l: -0.5,
                    u: 0.5,
                    s: 1.0,
                },
                OracleExit::RatioSatisfied,
                1,
                (),
            ))
        },
        TraceMode::Max,
        1.0,
        &params,
    )
    .unwrap_err();
    assert!(matches!(err, Error::BadInitialPoint { .. }));

    // A positive-value start whose slope points the wrong way is equally
    // unusable in max-trace mode.
    let err = newton_root_with(
        |t, _: Option<()>| {
            let v: f64 = t * t - 4.0;
            Ok((
                OracleTriple {
                    l: v,
                    u: v,
                    s: 2.0 * t,
                },
                OracleExit::RatioSatisfied,
                1,
                (),
            ))
        },
        TraceMode::Max,
        -3.0,
        &params,
    )
    .unwrap_err();
    assert!(matches!(err, Error::BadInitialPoint { .. }));
}

#[test]
fn newton_accepts_a_start_that_already_meets_the_target() {
    let params = NewtonParams::new(0.0);
    let out = newton_root_with(
        |t, _: Option<()>| {
            let v: f64 = t * t - 4.0;
            Ok((
                OracleTriple {
                    l: v,
                    u: v,
                    s: 2.0 * t,
                },
                OracleExit::MisfitBelowBeta,
                1,
                (),
            ))
        },
        TraceMode::Max,
        2.0,
        &params,
    )
    .unwrap();
    assert_eq!(out.tau, 2.0);
    assert_eq!(out.steps, 0);
}

#[test]
fn snl_max_trace_meets_the_misfit_cap() {
    let inst = snl(50, 0.1, 0.35, 4);
    let g = &inst.edm;
    let truth = g.ground_truth().unwrap().clone();
    let truth_misfit = evaluate(g, &truth).unwrap().misfit;
    let sigma = 0.2341;
    assert!(
        truth_misfit <= sigma,
        "instance must be feasible at σ, misfit {truth_misfit}"
    );

    let (_, report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Max, sigma)).unwrap();
    let witness_misfit = report.witness_misfit.unwrap();
    assert!(
        witness_misfit <= 0.3341 + 1e-9,
        "witness misfit {witness_misfit} exceeds σ+β"
    );
    assert!(report.certified);

    // Super-optimality: the returned trace cannot sit meaningfully below the
    // feasible ground truth's.
    let slope = report.final_slope.unwrap();
    assert!(
        report.witness_trace.unwrap() >= truth.gram().trace() - 10.0 * 0.1 * slope.abs(),
        "trace {} vs truth {}",
        report.witness_trace.unwrap(),
        truth.gram().trace()
    );
}

#[test]
fn newton_steps_stay_within_the_closed_form_bound() {
    let inst = snl(50, 0.1, 0.35, 4);
    let g = &inst.edm;
    let problem = ParetoProblem::new(g);
    let params = NewtonParams::new(0.2341);
    let max_d = g.d().values().iter().cloned().fold(0.0f64, f64::max);
    let mut t0 = (g.n() * g.r()) as f64 * max_d;
    let outcome = loop {
        match newton_root(&problem, TraceMode::Max, t0, &params) {
            Ok(out) if out.steps == 0 && out.last_triple.u <= params.beta => t0 *= 2.0,
            Ok(out) => break out,
            Err(Error::BadInitialPoint { .. }) => t0 *= 2.0,
            Err(e) => panic!("newton failed: {e}"),
        }
    };
    assert!(
        (outcome.steps as f64) <= outcome.bound,
        "{} steps vs bound {}",
        outcome.steps,
        outcome.bound
    );
    assert!(outcome.certified);
    assert!(outcome.last_triple.u <= params.beta);
}

#[test]
fn sparse_noiseless_completion_refines_to_the_truth() {
    let inst = snl(300, 0.0, 0.15, 1);
    let g = &inst.edm;
    let (p, report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Max, 0.0)).unwrap();
    assert!(report.witness_misfit.unwrap() <= 0.1 + 1e-9);
    let refined = steepest_descent(g, &p, &RefineOptions::default()).unwrap();
    let eval = evaluate(g, &refined.realization).unwrap();
    assert!(
        eval.rmsd_pct_radio.unwrap() <= 1.0,
        "refined rmsd {:.3}%R",
        eval.rmsd_pct_radio.unwrap()
    );
}

#[test]
fn min_trace_stays_below_max_trace() {
    let inst = snl(40, 0.1, 0.4, 1);
    let g = &inst.edm;
    let sigma = evaluate(g, g.ground_truth().unwrap()).unwrap().misfit;
    let (_, min_report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Min, sigma)).unwrap();
    let (_, max_report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Max, sigma)).unwrap();
    let tau_min = min_report.witness_trace.unwrap();
    let tau_max = max_report.witness_trace.unwrap();
    assert!(
        tau_min <= tau_max,
        "min-trace {tau_min} above max-trace {tau_max}"
    );
    assert!(min_report.witness_misfit.unwrap() <= sigma + 0.1 + 1e-9);
    assert!(max_report.witness_misfit.unwrap() <= sigma + 0.1 + 1e-9);
}

#[test]
fn huge_sigma_degenerates_gracefully() {
    let inst = snl(25, 0.1, 0.5, 2);
    let g = &inst.edm;
    let sigma = 2.0 * g.d().norm();

    let (_, min_report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Min, sigma)).unwrap();
    assert_eq!(min_report.witness_trace.unwrap(), 0.0);
    assert!(min_report.witness_misfit.unwrap() <= sigma + 0.1);

    let (_, max_report) = pareto_solve(g, &ParetoOptions::new(TraceMode::Max, sigma)).unwrap();
    assert!(max_report.witness_misfit.unwrap() <= sigma + 0.1 + 1e-9);
}

#[test]
fn unbounded_trace_is_reported() {
    // Two rigid clusters with no cross measurements: the trace of a feasible
    // completion is unbounded, which the max-trace search must refuse.
    let mut pts = Vec::new();
    for c in 0..2 {
        let off = 10.0 * c as f64;
        pts.extend_from_slice(&[(off, 0.0), (off + 0.1, 0.0), (off, 0.1), (off + 0.1, 0.1)]);
    }
    let mut pairs = Vec::new();
    for block in 0..2 {
        let base = 4 * block;
        for i in base..base + 4 {
            for j in i + 1..base + 4 {
                let dx = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                pairs.push((i, j, dx * dx + dy * dy));
            }
        }
    }
    let g = PartialEdm::new(8, 2, EdgeVector::new(8, pairs).unwrap()).unwrap();
    let err = pareto_solve(&g, &ParetoOptions::new(TraceMode::Max, 0.0)).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "got {err:?}");
}

#[test]
fn oracle_rejects_bad_parameters() {
    let inst = snl(10, 0.1, 0.6, 3);
    let problem = ParetoProblem::new(&inst.edm);
    assert!(fw_oracle(&problem, -1.0, 0.1, 1.5, 0.1, None, 10).is_err());
    assert!(fw_oracle(&problem, 1.0, -0.1, 1.5, 0.1, None, 10).is_err());
    assert!(fw_oracle(&problem, 1.0, 0.1, 1.0, 0.1, None, 10).is_err());

    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let p = Realization::new(DMatrix::from_fn(10, 2, |_, _| rng.random_range(-0.5..0.5)));
    let opts = ParetoOptions {
        alpha: 2.5,
        ..ParetoOptions::new(TraceMode::Max, 0.1)
    };
    assert!(pareto_solve(&inst.edm, &opts).is_err());
    drop(p);
}
