//! Solver telemetry shared by both pipelines.

/// Wall-clock seconds spent in one named pipeline stage.
#[derive(Debug, Clone)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Telemetry for one solve: misfit of the returned realization, trace,
/// iteration counts, per-stage timings, and accuracy vs ground truth when
/// available.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub algorithm: String,
    /// ‖𝒫K(PPᵀ) − d‖ of the returned realization.
    pub residual: f64,
    /// Trace of the returned Gram matrix.
    pub trace: f64,
    pub total_seconds: f64,
    pub stages: Vec<StageTiming>,
    pub rmsd: Option<f64>,
    pub rmsd_pct_radio: Option<f64>,
    /// Facial reduction: number of cliques used for exposing.
    pub cliques: Option<usize>,
    /// Facial reduction: least-squares system was numerically rank deficient.
    pub rank_deficient_system: bool,
    /// Facial reduction: projected-gradient fallback iterations, if taken.
    pub projected_gradient_iters: Option<usize>,
    pub newton_iters: Option<usize>,
    pub fw_iters: Option<usize>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    /// Pareto: trace of the Frank-Wolfe witness before rank projection.
    pub witness_trace: Option<f64>,
    /// Pareto: misfit ‖𝒫K(X) − d‖ of the witness before rank projection.
    pub witness_misfit: Option<f64>,
    /// Pareto: slope of the final oracle triple.
    pub final_slope: Option<f64>,
    /// False when any inner oracle hit its iteration cap.
    pub certified: bool,
    pub refine_iters: Option<usize>,
}

impl SolveReport {
    pub fn push_stage(&mut self, stage: &str, seconds: f64) {
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            seconds,
        });
    }

    /// Key-value view in a fixed order, for report blocks in solution files.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("algorithm".to_string(), self.algorithm.clone()),
            ("residual".to_string(), format!("{:.9e}", self.residual)),
            ("trace".to_string(), format!("{:.9e}", self.trace)),
            (
                "total-seconds".to_string(),
                format!("{:.3}", self.total_seconds),
            ),
        ];
        for t in &self.stages {
            out.push((format!("seconds-{}", t.stage), format!("{:.3}", t.seconds)));
        }
        let opt_f = |key: &str, v: Option<f64>, out: &mut Vec<(String, String)>| {
            if let Some(x) = v {
                out.push((key.to_string(), format!("{x:.9e}")));
            }
        };
        opt_f("rmsd", self.rmsd, &mut out);
        opt_f("rmsd-pct-radio", self.rmsd_pct_radio, &mut out);
        if let Some(c) = self.cliques {
            out.push(("cliques".to_string(), c.to_string()));
        }
        if self.rank_deficient_system {
            out.push(("rank-deficient-system".to_string(), "true".to_string()));
        }
        if let Some(c) = self.projected_gradient_iters {
            out.push(("projected-gradient-iters".to_string(), c.to_string()));
        }
        if let Some(c) = self.newton_iters {
            out.push(("newton-iters".to_string(), c.to_string()));
        }
        if let Some(c) = self.fw_iters {
            out.push(("fw-iters".to_string(), c.to_string()));
        }
        opt_f("sigma", self.sigma, &mut out);
        opt_f("beta", self.beta, &mut out);
        opt_f("witness-trace", self.witness_trace, &mut out);
        opt_f("witness-misfit", self.witness_misfit, &mut out);
        opt_f("final-slope", self.final_slope, &mut out);
        out.push(("certified".to_string(), self.certified.to_string()));
        if let Some(c) = self.refine_iters {
            out.push(("refine-iters".to_string(), c.to_string()));
        }
        out
    }
}
