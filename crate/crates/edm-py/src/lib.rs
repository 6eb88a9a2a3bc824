//! Python bindings: instance generation and I/O, both solvers, local
//! refinement, and scoring, with points exchanged as lists of rows.

use std::path::PathBuf;

use nalgebra::DMatrix;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use edm_core::cliques::PartialEdm;
use edm_core::error::Error;
use edm_core::facial::{facial_reduction_solve, FrOptions};
use edm_core::instances::{
    evaluate as core_evaluate, generate_instance, read_instance, write_instance,
    Instance as CoreInstance, NoiseModelParams,
};
use edm_core::linalg::EdgeVector;
use edm_core::pareto::{pareto_solve, ParetoOptions, TraceMode};
use edm_core::realization::Realization;
use edm_core::refine::{steepest_descent, RefineOptions};
use edm_core::report::SolveReport;

pyo3::create_exception!(edm_py, EdmError, pyo3::exceptions::PyException);

fn to_py(e: Error) -> PyErr {
    EdmError::new_err(e.to_string())
}

fn rows_of(p: &Realization) -> Vec<Vec<f64>> {
    let m = p.points();
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn realization_of(rows: &[Vec<f64>]) -> PyResult<Realization> {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    if n == 0 || dim == 0 {
        return Err(EdmError::new_err("points must be a non-empty list of rows"));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(EdmError::new_err(format!(
            "ragged points: row of length {} in an {}-column realization",
            bad.len(),
            dim
        )));
    }
    Ok(Realization::new(DMatrix::from_fn(n, dim, |i, j| {
        rows[i][j]
    })))
}

/// A partial distance matrix with optional generation metadata.
#[pyclass(module = "edm_py")]
struct Instance {
    inner: CoreInstance,
}

#[pymethods]
impl Instance {
    /// Builds an instance from explicit 0-based edges `(i, j, d_ij)` holding
    /// squared distances, for embedding dimension `r`.
    #[staticmethod]
    #[pyo3(signature = (n, r, edges, radio_range=None))]
    fn from_edges(
        n: usize,
        r: usize,
        edges: Vec<(usize, usize, f64)>,
        radio_range: Option<f64>,
    ) -> PyResult<Self> {
        let d = EdgeVector::new(n, edges).map_err(to_py)?;
        let mut edm = PartialEdm::new(n, r, d).map_err(to_py)?;
        if let Some(radio) = radio_range {
            edm = edm.with_radio_range(radio).map_err(to_py)?;
        }
        Ok(Self {
            inner: CoreInstance {
                edm,
                noise_factor: None,
                seed: None,
            },
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: read_instance(&path).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_instance(&path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.edm.n()
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.edm.r()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.edm.num_edges()
    }

    #[getter]
    fn density(&self) -> f64 {
        self.inner.edm.density()
    }

    #[getter]
    fn radio_range(&self) -> Option<f64> {
        self.inner.edm.radio_range()
    }

    #[getter]
    fn noise_factor(&self) -> Option<f64> {
        self.inner.noise_factor
    }

    #[getter]
    fn seed(&self) -> Option<u64> {
        self.inner.seed
    }

    /// Edges as 0-based `(i, j, d_ij)` triples of squared distances.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edm.d().iter().collect()
    }

    /// Ground-truth points as rows, when the instance carries them.
    fn truth(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.edm.ground_truth().map(rows_of)
    }

    /// ‖𝒫K(PPᵀ) − d‖ of a candidate realization.
    fn misfit(&self, points: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.edm.misfit(&realization_of(&points)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, r={}, edges={}, density={:.4})",
            self.inner.edm.n(),
            self.inner.edm.r(),
            self.inner.edm.num_edges(),
            self.inner.edm.density()
        )
    }
}

/// A realization plus the solver report that produced it.
#[pyclass(module = "edm_py")]
struct Solution {
    points: Vec<Vec<f64>>,
    report: SolveReport,
}

impl Solution {
    fn new(p: &Realization, report: SolveReport) -> Self {
        Self {
            points: rows_of(p),
            report,
        }
    }
}

#[pymethods]
impl Solution {
    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.points.clone()
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.report.algorithm.clone()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.report.residual
    }

    #[getter]
    fn trace(&self) -> f64 {
        self.report.trace
    }

    #[getter]
    fn rmsd(&self) -> Option<f64> {
        self.report.rmsd
    }

    #[getter]
    fn rmsd_pct_radio(&self) -> Option<f64> {
        self.report.rmsd_pct_radio
    }

    #[getter]
    fn certified(&self) -> bool {
        self.report.certified
    }

    /// Every report entry as a `{key: value}` dict of strings, in the order
    /// solution files list them.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.report.entries() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(algorithm={:?}, residual={:.6e}, trace={:.6e})",
            self.report.algorithm, self.report.residual, self.report.trace
        )
    }
}

/// Draws a seeded planar instance from the multiplicative noise model.
#[pyfunction]
#[pyo3(signature = (n, nf=0.0, radio=0.35, seed=0))]
fn generate(n: usize, nf: f64, radio: f64, seed: u64) -> PyResult<Instance> {
    let inner = generate_instance(&NoiseModelParams {
        n,
        noise_factor: nf,
        radio_range: radio,
        seed,
    })
    .map_err(to_py)?;
    Ok(Instance { inner })
}

/// Robust facial reduction, the dense-graph pipeline.
#[pyfunction]
#[pyo3(signature = (instance, kbar=None, clique_union=true))]
fn solve_fr(instance: &Instance, kbar: Option<usize>, clique_union: bool) -> PyResult<Solution> {
    let opts = FrOptions {
        kbar,
        clique_union,
        ..FrOptions::default()
    };
    let (p, report) = facial_reduction_solve(&instance.inner.edm, &opts).map_err(to_py)?;
    Ok(Solution::new(&p, report))
}

fn auto_sigma(inst: &CoreInstance) -> f64 {
    match facial_reduction_solve(&inst.edm, &FrOptions::default()) {
        Ok((_, report)) => report.residual,
        Err(_) => 1.1 * inst.noise_factor.unwrap_or(0.1) * inst.edm.d().norm(),
    }
}

/// Pareto search along the misfit/trace frontier, the sparse-graph pipeline.
/// `mode` is `"max"` or `"min"`; σ defaults to the residual of a
/// facial-reduction pass.
#[pyfunction]
#[pyo3(signature = (instance, mode="max", sigma=None, beta=None))]
fn solve_pareto(
    instance: &Instance,
    mode: &str,
    sigma: Option<f64>,
    beta: Option<f64>,
) -> PyResult<Solution> {
    let mode = match mode {
        "max" => TraceMode::Max,
        "min" => TraceMode::Min,
        other => {
            return Err(EdmError::new_err(format!(
                "mode must be \"max\" or \"min\", got {other:?}"
            )))
        }
    };
    let sigma = sigma.unwrap_or_else(|| auto_sigma(&instance.inner));
    let mut opts = ParetoOptions::new(mode, sigma);
    if let Some(b) = beta {
        opts.beta = b;
    }
    let (p, report) = pareto_solve(&instance.inner.edm, &opts).map_err(to_py)?;
    Ok(Solution::new(&p, report))
}

/// Steepest-descent refinement of a realization against the instance edges.
#[pyfunction]
fn refine(instance: &Instance, points: Vec<Vec<f64>>) -> PyResult<Solution> {
    let seed_points = realization_of(&points)?;
    let opts = RefineOptions::default();
    let t = std::time::Instant::now();
    let outcome = steepest_descent(&instance.inner.edm, &seed_points, &opts).map_err(to_py)?;
    let seconds = t.elapsed().as_secs_f64();

    let mut report = SolveReport {
        algorithm: "refine".to_string(),
        residual: instance.inner.edm.misfit(&outcome.realization),
        trace: outcome.realization.gram().trace(),
        total_seconds: seconds,
        certified: outcome.iterations < opts.max_iters,
        refine_iters: Some(outcome.iterations),
        ..SolveReport::default()
    };
    report.push_stage("refine", seconds);
    if let Ok(ev) = core_evaluate(&instance.inner.edm, &outcome.realization) {
        report.rmsd = Some(ev.rmsd);
        report.rmsd_pct_radio = ev.rmsd_pct_radio;
    }
    Ok(Solution::new(&outcome.realization, report))
}

/// Scores a realization against the instance ground truth; raises when the
/// instance carries none.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    instance: &Instance,
    points: Vec<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = realization_of(&points)?;
    let ev = core_evaluate(&instance.inner.edm, &p).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("rmsd", ev.rmsd)?;
    d.set_item("rmsd_pct_radio", ev.rmsd_pct_radio)?;
    d.set_item("misfit", ev.misfit)?;
    d.set_item("max_edge_error", ev.max_edge_error)?;
    Ok(d)
}

#[pymodule]
fn edm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fr, m)?)?;
    m.add_function(wrap_pyfunction!(solve_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("EdmError", m.py().get_type::<EdmError>())?;
    Ok(())
}
