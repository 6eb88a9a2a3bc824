//! Benchmark sweep: rows of (n, nf, R, seeds, algo), each averaged over its
//! seeds, written as CSV plus a console table.

use std::path::Path;

use edm_core::error::{Error, Result};
use edm_core::facial::{facial_reduction_solve, FrOptions};
use edm_core::instances::{evaluate, generate_instance, NoiseModelParams};
use edm_core::pareto::{pareto_solve, ParetoOptions, TraceMode};
use edm_core::refine::{steepest_descent, RefineOptions};

use crate::commands::auto_sigma;
use crate::Algo;

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "nf",
    "R",
    "density",
    "solve_s",
    "refine_s",
    "rmsd_initial_pct",
    "rmsd_refined_pct",
    "seeds",
    "algo",
];

#[derive(Clone, Copy)]
pub struct BenchSpec {
    pub n: usize,
    pub nf: f64,
    pub radio: f64,
    pub seeds: u64,
    pub algo: Algo,
}

/// Per-row metrics averaged over seeds; all NaN when any seed cell failed.
pub struct RowMetrics {
    pub density: f64,
    pub solve_s: f64,
    pub refine_s: f64,
    pub initial_pct: f64,
    pub refined_pct: f64,
}

struct Cell {
    density: f64,
    solve_s: f64,
    refine_s: f64,
    initial_pct: f64,
    refined_pct: f64,
}

pub fn parse_config(path: &Path) -> Result<Vec<BenchSpec>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Validation(format!("config: {e}")))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Validation(format!("config: {e}")))?;
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Ok(Vec::new());
        }
        let expected = ["n", "nf", "R", "seeds", "algo"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                line: 1,
                msg: format!("config header must be {}", expected.join(",")),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let field = |k: usize, what: &str| -> Result<&str> {
            record.get(k).ok_or(Error::Parse {
                line,
                msg: format!("missing {what}"),
            })
        };
        let parse_f = |k: usize, what: &str| -> Result<f64> {
            field(k, what)?.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {what}: {:?}", record.get(k).unwrap_or("")),
            })
        };
        let n: usize = field(0, "n")?.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad n: {:?}", record.get(0).unwrap_or("")),
        })?;
        let seeds: u64 = field(3, "seeds")?.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad seeds: {:?}", record.get(3).unwrap_or("")),
        })?;
        let algo = match field(4, "algo")? {
            "fr" => Algo::Fr,
            "pareto-max" => Algo::ParetoMax,
            "pareto-min" => Algo::ParetoMin,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown algo {other:?}"),
                })
            }
        };
        rows.push(BenchSpec {
            n,
            nf: parse_f(1, "nf")?,
            radio: parse_f(2, "R")?,
            seeds,
            algo,
        });
    }
    Ok(rows)
}

/// Built-in noise sweep: dense facial reduction + refinement across noise
/// factors, the shape the full-scale tables report.
pub fn full_profile(n: usize) -> Vec<BenchSpec> {
    [0.0, 0.05, 0.1, 0.2]
        .into_iter()
        .map(|nf| BenchSpec {
            n,
            nf,
            radio: 0.35,
            seeds: 3,
            algo: Algo::Fr,
        })
        .collect()
}

fn run_cell(spec: &BenchSpec, seed: u64) -> Result<Cell> {
    let inst = generate_instance(&NoiseModelParams {
        n: spec.n,
        noise_factor: spec.nf,
        radio_range: spec.radio,
        seed,
    })?;
    let (p, report) = match spec.algo {
        Algo::Fr => facial_reduction_solve(&inst.edm, &FrOptions::default())?,
        Algo::ParetoMax | Algo::ParetoMin => {
            let mode = match spec.algo {
                Algo::ParetoMax => TraceMode::Max,
                _ => TraceMode::Min,
            };
            pareto_solve(&inst.edm, &ParetoOptions::new(mode, auto_sigma(&inst)))?
        }
    };
    let t = std::time::Instant::now();
    let refined = steepest_descent(&inst.edm, &p, &RefineOptions::default())?;
    let refine_s = t.elapsed().as_secs_f64();
    let refined_pct = evaluate(&inst.edm, &refined.realization)?
        .rmsd_pct_radio
        .unwrap_or(f64::NAN);
    Ok(Cell {
        density: inst.edm.density(),
        solve_s: report.total_seconds,
        refine_s,
        initial_pct: report.rmsd_pct_radio.unwrap_or(f64::NAN),
        refined_pct,
    })
}

fn worker_count(jobs: usize) -> usize {
    let cap = std::env::var("EDM_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(usize::MAX);
    jobs.clamp(1, cap.max(1))
}

pub fn run(rows: &[BenchSpec], jobs: usize) -> Vec<RowMetrics> {
    let cells: Vec<(usize, u64)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, spec)| (0..spec.seeds).map(move |s| (i, s)))
        .collect();
    let workers = worker_count(jobs);
    let outcomes: Vec<Result<Cell>> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(i, s)| run_cell(&rows[i], s))
                .collect()
        })
    } else {
        cells.iter().map(|&(i, s)| run_cell(&rows[i], s)).collect()
    };

    rows.iter()
        .enumerate()
        .map(|(i, spec)| {
            let row_cells: Vec<&Result<Cell>> = cells
                .iter()
                .zip(&outcomes)
                .filter(|((row, _), _)| *row == i)
                .map(|(_, outcome)| outcome)
                .collect();
            if row_cells.is_empty() || row_cells.iter().any(|c| c.is_err()) {
                return RowMetrics {
                    density: f64::NAN,
                    solve_s: f64::NAN,
                    refine_s: f64::NAN,
                    initial_pct: f64::NAN,
                    refined_pct: f64::NAN,
                };
            }
            let m = spec.seeds as f64;
            let sum = |f: &dyn Fn(&Cell) -> f64| -> f64 {
                row_cells
                    .iter()
                    .map(|c| f(c.as_ref().unwrap()))
                    .sum::<f64>()
                    / m
            };
            RowMetrics {
                density: sum(&|c| c.density),
                solve_s: sum(&|c| c.solve_s),
                refine_s: sum(&|c| c.refine_s),
                initial_pct: sum(&|c| c.initial_pct),
                refined_pct: sum(&|c| c.refined_pct),
            }
        })
        .collect()
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.6}")
    }
}

pub fn write_csv(path: &Path, rows: &[BenchSpec], results: &[RowMetrics]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Validation(format!("csv: {e}")))?;
    let record = |w: &mut csv::Writer<std::fs::File>, fields: &[String]| -> Result<()> {
        w.write_record(fields)
            .map_err(|e| Error::Validation(format!("csv: {e}")))
    };
    record(&mut writer, &CSV_HEADER.map(str::to_string))?;
    for (spec, m) in rows.iter().zip(results) {
        record(
            &mut writer,
            &[
                spec.n.to_string(),
                spec.nf.to_string(),
                spec.radio.to_string(),
                fmt(m.density),
                fmt(m.solve_s),
                fmt(m.refine_s),
                fmt(m.initial_pct),
                fmt(m.refined_pct),
                spec.seeds.to_string(),
                spec.algo.name().to_string(),
            ],
        )?;
    }
    writer
        .flush()
        .map_err(|e| Error::Validation(format!("csv: {e}")))?;
    Ok(())
}

pub fn print_table(rows: &[BenchSpec], results: &[RowMetrics]) {
    println!(
        "{:>6} {:>6} {:>6} {:>9} {:>9} {:>9} {:>12} {:>12} {:>6}  algo",
        "n", "nf", "R", "density", "solve_s", "refine_s", "initial_%R", "refined_%R", "seeds"
    );
    for (spec, m) in rows.iter().zip(results) {
        println!(
            "{:>6} {:>6} {:>6} {:>9} {:>9} {:>9} {:>12} {:>12} {:>6}  {}",
            spec.n,
            spec.nf,
            spec.radio,
            fmt(m.density),
            fmt(m.solve_s),
            fmt(m.refine_s),
            fmt(m.initial_pct),
            fmt(m.refined_pct),
            spec.seeds,
            spec.algo.name()
        );
    }
}
