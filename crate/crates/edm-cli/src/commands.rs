use std::path::Path;
use std::time::Instant;

use edm_core::error::Error;
use edm_core::facial::{facial_reduction_solve, FrOptions};
use edm_core::instances::{
    evaluate, generate_instance, read_instance, read_solution, write_instance, write_solution,
    Instance, NoiseModelParams,
};
use edm_core::pareto::{pareto_solve, ParetoOptions, TraceMode};
use edm_core::refine::{steepest_descent, RefineOptions};
use edm_core::report::SolveReport;

use crate::{bench, plot, Algo};

/// A core error plus the process exit code it maps to: 1 for file problems,
/// 2 for anything the solvers or scorers report.
pub struct CmdError {
    pub err: Error,
    pub code: u8,
}

impl CmdError {
    pub fn kind(&self) -> &'static str {
        match self.err {
            Error::NonHollowInput { .. } => "NonHollowInput",
            Error::RankOutOfRange { .. } => "RankOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::CliqueTooSmall { .. } => "CliqueTooSmall",
            Error::AmbiguousReflection => "AmbiguousReflection",
            Error::DeficientAggregate { .. } => "DeficientAggregate",
            Error::BadInitialPoint { .. } => "BadInitialPoint",
            Error::NewtonNonConvergence { .. } => "NewtonNonConvergence",
            Error::NoGroundTruth => "NoGroundTruth",
            Error::Parse { .. } => "Parse",
            Error::Validation(_) => "Validation",
            Error::Io(_) => "Io",
        }
    }
}

pub type CmdResult = Result<(), CmdError>;

/// File-stage failures always exit 1, whatever the parser reports.
fn file_stage<T>(r: Result<T, Error>) -> Result<T, CmdError> {
    r.map_err(|err| CmdError { err, code: 1 })
}

/// Solver-stage failures exit 2, except I/O and parse errors underneath.
fn solver_stage<T>(r: Result<T, Error>) -> Result<T, CmdError> {
    r.map_err(|err| {
        let code = match err {
            Error::Io(_) | Error::Parse { .. } => 1,
            _ => 2,
        };
        CmdError { err, code }
    })
}

fn print_report(report: &SolveReport) {
    for (key, value) in report.entries() {
        println!("{key}: {value}");
    }
}

pub fn gen(n: usize, nf: f64, radio: f64, seed: u64, out: &Path) -> CmdResult {
    let inst = solver_stage(generate_instance(&NoiseModelParams {
        n,
        noise_factor: nf,
        radio_range: radio,
        seed,
    }))?;
    file_stage(write_instance(out, &inst))?;
    println!(
        "wrote {} (n={n}, nf={nf}, R={radio}, seed={seed}, edges={}, density {:.2}%)",
        out.display(),
        inst.edm.num_edges(),
        100.0 * inst.edm.density()
    );
    Ok(())
}

/// σ for the pareto modes: a facial-reduction pass when it succeeds, else a
/// noise-level guess from the instance metadata.
pub fn auto_sigma(inst: &Instance) -> f64 {
    match facial_reduction_solve(&inst.edm, &FrOptions::default()) {
        Ok((_, report)) => report.residual,
        Err(_) => 1.1 * inst.noise_factor.unwrap_or(0.1) * inst.edm.d().norm(),
    }
}

fn resolve_sigma(spec: &str, inst: &Instance) -> Result<f64, CmdError> {
    if spec == "auto" {
        return Ok(auto_sigma(inst));
    }
    spec.parse().map_err(|_| CmdError {
        err: Error::Validation(format!("--sigma wants a number or `auto`, got {spec:?}")),
        code: 2,
    })
}

pub fn solve(
    instance: &Path,
    algo: Algo,
    sigma: &str,
    beta: Option<f64>,
    kbar: Option<usize>,
    no_clique_union: bool,
    out: Option<&Path>,
) -> CmdResult {
    let inst = file_stage(read_instance(instance))?;
    let (p, report) = match algo {
        Algo::Fr => {
            let opts = FrOptions {
                kbar,
                clique_union: !no_clique_union,
                ..FrOptions::default()
            };
            solver_stage(facial_reduction_solve(&inst.edm, &opts))?
        }
        Algo::ParetoMax | Algo::ParetoMin => {
            let mode = match algo {
                Algo::ParetoMax => TraceMode::Max,
                _ => TraceMode::Min,
            };
            let mut opts = ParetoOptions::new(mode, resolve_sigma(sigma, &inst)?);
            if let Some(b) = beta {
                opts.beta = b;
            }
            solver_stage(pareto_solve(&inst.edm, &opts))?
        }
    };
    print_report(&report);
    if let Some(path) = out {
        file_stage(write_solution(path, &p, &report))?;
    }
    Ok(())
}

pub fn refine(instance: &Path, solution: &Path, out: Option<&Path>) -> CmdResult {
    let inst = file_stage(read_instance(instance))?;
    let (seed_points, _) = file_stage(read_solution(solution))?;
    let t = Instant::now();
    let opts = RefineOptions::default();
    let outcome = solver_stage(steepest_descent(&inst.edm, &seed_points, &opts))?;
    let seconds = t.elapsed().as_secs_f64();

    let mut report = SolveReport {
        algorithm: "refine".to_string(),
        residual: inst.edm.misfit(&outcome.realization),
        trace: outcome.realization.gram().trace(),
        total_seconds: seconds,
        certified: outcome.iterations < opts.max_iters,
        refine_iters: Some(outcome.iterations),
        ..SolveReport::default()
    };
    report.push_stage("refine", seconds);
    if let Ok(ev) = evaluate(&inst.edm, &outcome.realization) {
        report.rmsd = Some(ev.rmsd);
        report.rmsd_pct_radio = ev.rmsd_pct_radio;
    }
    print_report(&report);
    if let Some(path) = out {
        file_stage(write_solution(path, &outcome.realization, &report))?;
    }
    Ok(())
}

pub fn eval(instance: &Path, solution: &Path) -> CmdResult {
    let inst = file_stage(read_instance(instance))?;
    let (p, _) = file_stage(read_solution(solution))?;
    let ev = solver_stage(evaluate(&inst.edm, &p))?;
    println!("rmsd: {:.9e}", ev.rmsd);
    if let Some(pct) = ev.rmsd_pct_radio {
        println!("rmsd-pct-radio: {pct:.9e}");
    }
    println!("misfit: {:.9e}", ev.misfit);
    println!("max-edge-error: {:.9e}", ev.max_edge_error);
    Ok(())
}

pub fn bench(
    config: Option<&Path>,
    out: &Path,
    jobs: usize,
    full: bool,
    n: Option<usize>,
) -> CmdResult {
    let rows = if full {
        bench::full_profile(n.unwrap_or(300))
    } else {
        let path = config.ok_or_else(|| CmdError {
            err: Error::Validation("bench wants a config file or --full".to_string()),
            code: 2,
        })?;
        file_stage(bench::parse_config(path))?
    };
    let results = bench::run(&rows, jobs);
    file_stage(bench::write_csv(out, &rows, &results))?;
    bench::print_table(&rows, &results);
    println!("wrote {}", out.display());
    Ok(())
}

pub fn plot(instance: &Path, solution: &Path, out: &Path) -> CmdResult {
    let inst = file_stage(read_instance(instance))?;
    let (p, _) = file_stage(read_solution(solution))?;
    let svg = solver_stage(plot::render(&inst, &p))?;
    file_stage(std::fs::write(out, svg).map_err(Error::from))?;
    println!("wrote {}", out.display());
    Ok(())
}
