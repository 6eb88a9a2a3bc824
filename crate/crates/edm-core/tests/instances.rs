use edm_core::instances::{
    evaluate, generate_instance, read_instance, read_solution, write_instance, write_solution,
    NoiseModelParams,
};
use edm_core::report::SolveReport;
use edm_core::{Error, Realization};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fs;
use std::path::PathBuf;

fn params(n: usize, noise_factor: f64, radio_range: f64, seed: u64) -> NoiseModelParams {
    NoiseModelParams {
        n,
        noise_factor,
        radio_range,
        seed,
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("edm-instance-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn noiseless_distances_are_exact() {
    let inst = generate_instance(&params(30, 0.0, 0.5, 3)).unwrap();
    let pts = inst.edm.ground_truth().unwrap().points().clone();
    assert!(inst.edm.num_edges() > 0);
    for (i, j, v) in inst.edm.d().iter() {
        let dx = pts[(i, 0)] - pts[(j, 0)];
        let dy = pts[(i, 1)] - pts[(j, 1)];
        assert_eq!(v, dx * dx + dy * dy);
    }
}

#[test]
fn large_radio_range_yields_a_complete_graph() {
    let inst = generate_instance(&params(25, 0.1, 1.5, 4)).unwrap();
    assert_eq!(inst.edm.num_edges(), 25 * 24 / 2);
}

#[test]
fn same_seed_reproduces_the_instance_bitwise() {
    let a = generate_instance(&params(60, 0.2, 0.4, 11)).unwrap();
    let b = generate_instance(&params(60, 0.2, 0.4, 11)).unwrap();
    let ea: Vec<_> = a.edm.d().iter().collect();
    let eb: Vec<_> = b.edm.d().iter().collect();
    assert_eq!(ea, eb);
    assert_eq!(
        a.edm.ground_truth().unwrap().points(),
        b.edm.ground_truth().unwrap().points()
    );

    let c = generate_instance(&params(60, 0.2, 0.4, 12)).unwrap();
    assert_ne!(
        a.edm.ground_truth().unwrap().points(),
        c.edm.ground_truth().unwrap().points()
    );
}

#[test]
fn edge_set_is_independent_of_the_noise_factor() {
    let clean = generate_instance(&params(80, 0.0, 0.35, 5)).unwrap();
    let noisy = generate_instance(&params(80, 0.5, 0.35, 5)).unwrap();
    let pairs = |inst: &edm_core::instances::Instance| {
        inst.edm
            .d()
            .iter()
            .map(|(i, j, _)| (i, j))
            .collect::<Vec<_>>()
    };
    assert_eq!(pairs(&clean), pairs(&noisy));
    let changed = clean
        .edm
        .d()
        .iter()
        .zip(noisy.edm.d().iter())
        .filter(|(a, b)| a.2 != b.2)
        .count();
    assert!(changed > 0);
}

#[test]
fn density_tracks_the_analytic_value() {
    let mut densities = Vec::new();
    for seed in 0..10 {
        let inst = generate_instance(&params(1000, 0.0, 0.25, seed)).unwrap();
        densities.push(inst.edm.density());
    }
    let mean = densities.iter().sum::<f64>() / densities.len() as f64;
    assert!(
        (mean - 0.157).abs() <= 0.01,
        "mean density {:.4} out of band",
        mean
    );
}

#[test]
fn evaluate_scores_the_truth_at_zero() {
    let inst = generate_instance(&params(40, 0.1, 0.5, 6)).unwrap();
    let truth = inst.edm.ground_truth().unwrap().clone();
    let eval = evaluate(&inst.edm, &truth).unwrap();
    assert!(eval.rmsd <= 1e-12);
    assert!(eval.rmsd_pct_radio.unwrap() <= 1e-10);
    assert!(eval.misfit > 0.0);
    assert!(eval.max_edge_error > 0.0);
    assert!(eval.max_edge_error <= eval.misfit);
}

#[test]
fn evaluate_ignores_rigid_motions() {
    let inst = generate_instance(&params(35, 0.05, 0.5, 7)).unwrap();
    let truth = inst.edm.ground_truth().unwrap();
    let theta: f64 = 0.777;
    let q = DMatrix::from_row_slice(
        2,
        2,
        &[theta.cos(), -theta.sin(), -theta.sin(), -theta.cos()],
    );
    let mut moved = truth.points() * q;
    for i in 0..moved.nrows() {
        moved[(i, 0)] += 4.0;
        moved[(i, 1)] -= 2.5;
    }
    let eval = evaluate(&inst.edm, &Realization::new(moved)).unwrap();
    assert!(eval.rmsd <= 1e-9, "rmsd {} after rigid motion", eval.rmsd);
}

#[test]
fn evaluate_sees_a_single_offset_point() {
    let n = 50;
    let inst = generate_instance(&params(n, 0.0, 0.6, 8)).unwrap();
    let delta = 0.01;
    let mut moved = inst.edm.ground_truth().unwrap().points().clone();
    moved[(7, 0)] += delta;
    let eval = evaluate(&inst.edm, &Realization::new(moved)).unwrap();
    let per_point = delta / (n as f64).sqrt();
    assert!(eval.rmsd <= 1.05 * per_point, "rmsd {} too big", eval.rmsd);
    assert!(eval.rmsd >= 0.5 * per_point, "rmsd {} too small", eval.rmsd);
    assert!(eval.max_edge_error > 0.0);
}

#[test]
fn instance_roundtrip_is_bit_exact() {
    let inst = generate_instance(&params(40, 0.1, 0.4, 9)).unwrap();
    let path = scratch("roundtrip.edm");
    write_instance(&path, &inst).unwrap();
    let back = read_instance(&path).unwrap();

    assert_eq!(back.edm.n(), 40);
    assert_eq!(back.edm.r(), 2);
    assert_eq!(back.edm.radio_range(), Some(0.4));
    assert_eq!(back.noise_factor, Some(0.1));
    assert_eq!(back.seed, Some(9));
    let ea: Vec<_> = inst.edm.d().iter().collect();
    let eb: Vec<_> = back.edm.d().iter().collect();
    assert_eq!(ea, eb);
    assert_eq!(
        inst.edm.ground_truth().unwrap().points(),
        back.edm.ground_truth().unwrap().points()
    );
}

#[test]
fn malformed_record_reports_its_line() {
    let path = scratch("truncated.edm");
    fs::write(&path, "# n 4\n# r 2\n1 2 1.0e0\n3 4\n").unwrap();
    match read_instance(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error with a line, got {other:?}"),
    }

    fs::write(&path, "# n 4\n1 2 not-a-number\n").unwrap();
    match read_instance(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error with a line, got {other:?}"),
    }
}

#[test]
fn missing_size_header_is_rejected() {
    let path = scratch("headerless.edm");
    fs::write(&path, "1 2 1.0e0\n2 3 2.0e0\n").unwrap();
    assert!(matches!(read_instance(&path), Err(Error::Parse { .. })));
}

#[test]
fn out_of_range_index_is_rejected() {
    let path = scratch("oob.edm");
    fs::write(&path, "# n 3\n1 7 1.0e0\n").unwrap();
    assert!(read_instance(&path).is_err());
}

#[test]
fn truth_block_size_mismatch_is_rejected() {
    let path = scratch("short-truth.edm");
    fs::write(
        &path,
        "# n 3\n1 2 1.0e0\n# truth\n1 0.0e0 0.0e0\n2 1.0e0 0.0e0\n",
    )
    .unwrap();
    assert!(matches!(read_instance(&path), Err(Error::Parse { .. })));
}

#[test]
fn solution_roundtrip_preserves_points_and_report() {
    let mut rng = ChaCha12Rng::seed_from_u64(97);
    let p = Realization::new(DMatrix::from_fn(12, 2, |_, _| rng.random_range(-1.0..1.0)));
    let report = SolveReport {
        algorithm: "fr".into(),
        residual: 1.25e-3,
        trace: 4.5,
        rmsd: Some(2.0e-2),
        cliques: Some(17),
        certified: true,
        ..SolveReport::default()
    };
    let path = scratch("solution.sol");
    write_solution(&path, &p, &report).unwrap();
    let (back, entries) = read_solution(&path).unwrap();
    assert_eq!(back.points(), p.points());
    let get = |key: &str| {
        entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    };
    assert_eq!(get("algorithm").as_deref(), Some("fr"));
    assert_eq!(get("cliques").as_deref(), Some("17"));
    assert_eq!(get("certified").as_deref(), Some("true"));
    let rmsd: f64 = get("rmsd").unwrap().parse().unwrap();
    assert!((rmsd - 2.0e-2).abs() <= 1e-10);
}
