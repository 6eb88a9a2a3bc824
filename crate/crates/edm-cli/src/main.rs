//! `edmc`: generate, solve, refine, evaluate, benchmark, and plot planar
//! distance-matrix completion instances from the command line.

mod bench;
mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "edmc",
    version,
    about = "Noisy Euclidean distance matrix completion"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    /// Robust facial reduction (dense graphs).
    Fr,
    /// Pareto search maximizing the trace (sparse graphs).
    ParetoMax,
    /// Pareto search minimizing the trace.
    ParetoMin,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Fr => "fr",
            Algo::ParetoMax => "pareto-max",
            Algo::ParetoMin => "pareto-min",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded random instance and write it to a file.
    Gen {
        /// Number of points.
        #[arg(long)]
        n: usize,
        /// Noise factor of the multiplicative noise model.
        #[arg(long, default_value_t = 0.0)]
        nf: f64,
        /// Radio range; vertices closer than this are connected.
        #[arg(long = "R", default_value_t = 0.35)]
        radio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and print the report.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Fr)]
        algo: Algo,
        /// Misfit bound σ for the pareto algorithms: a number, or `auto` to
        /// take the residual of a facial-reduction pass (falling back to
        /// 1.1·nf·‖d‖ when that pass fails).
        #[arg(long, default_value = "auto")]
        sigma: String,
        /// Misfit slack β for the pareto algorithms.
        #[arg(long)]
        beta: Option<f64>,
        /// Largest clique size grown during facial-reduction discovery.
        #[arg(long)]
        kbar: Option<usize>,
        /// Skip the clique-union preprocessing pass.
        #[arg(long)]
        no_clique_union: bool,
        /// Solution file (points + report block) to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine a solution by steepest descent and print the report.
    Refine {
        instance: PathBuf,
        solution: PathBuf,
        /// Refined solution file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a solution against the instance's ground truth.
    Eval {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Run a benchmark sweep and write one CSV row per config line.
    Bench {
        /// CSV config with header `n,nf,R,seeds,algo`; not used with --full.
        config: Option<PathBuf>,
        /// Results CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Run independent (row, seed) cells on this many workers; the
        /// EDM_THREADS environment variable caps the count.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Run the built-in noise-sweep profile instead of a config file.
        #[arg(long)]
        full: bool,
        /// Instance size for the built-in profile (default 300).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Draw true vs estimated positions as an SVG figure.
    Plot {
        instance: PathBuf,
        solution: PathBuf,
        /// SVG file to write.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen {
            n,
            nf,
            radio,
            seed,
            out,
        } => commands::gen(n, nf, radio, seed, &out),
        Cmd::Solve {
            instance,
            algo,
            sigma,
            beta,
            kbar,
            no_clique_union,
            out,
        } => commands::solve(
            &instance,
            algo,
            &sigma,
            beta,
            kbar,
            no_clique_union,
            out.as_deref(),
        ),
        Cmd::Refine {
            instance,
            solution,
            out,
        } => commands::refine(&instance, &solution, out.as_deref()),
        Cmd::Eval { instance, solution } => commands::eval(&instance, &solution),
        Cmd::Bench {
            config,
            out,
            jobs,
            full,
            n,
        } => commands::bench(config.as_deref(), &out, jobs, full, n),
        Cmd::Plot {
            instance,
            solution,
            out,
        } => commands::plot(&instance, &solution, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.err);
            ExitCode::from(e.code)
        }
    }
}
