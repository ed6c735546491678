//! Benchmark sweeps over methods with trace persistence.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use monosplit_core::algorithms::{
    baseline_lambda, solve, IterationTrace, Method, StopCriterion, StoppingRule,
};
use monosplit_core::catalog::{synthesize_instance, InstanceKind};
use monosplit_core::json::ProblemDesc;
use monosplit_core::{Point, ProblemInstance, SolveError};

use crate::HarnessError;

/// Where the benchmark problem comes from.
#[derive(Debug, Clone)]
pub enum ProblemSource {
    Path(PathBuf),
    Generated {
        seed: u64,
        dim: usize,
        kind: InstanceKind,
    },
}

/// Step-size policy for a sweep. The default gives each method its own
/// published bound; a shared λ makes same-step comparisons possible.
#[derive(Debug, Clone, Copy)]
pub enum LambdaMode {
    PerMethod,
    Shared(f64),
    /// One λ for all methods, planned for the outer reflected scheme.
    SharedAuto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    fn extension(&self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub methods: Vec<Method>,
    pub lambda_mode: LambdaMode,
    pub tol: f64,
    pub max_iters: usize,
    pub criterion: StopCriterion,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: TraceFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.methods.is_empty() {
            return Err(HarnessError::Config("methods list is empty".into()));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(HarnessError::Config(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(HarnessError::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-method outcome row of the summary table.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged_at: Option<usize>,
    pub final_residual: Option<f64>,
    pub final_dist_to_ref: Option<f64>,
    pub wall_time_ns: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub problem_dim: usize,
    pub lipschitz: f64,
    pub cocoercivity: f64,
    pub rows: Vec<MethodSummary>,
}

impl BenchSummary {
    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged_at.is_some())
    }
}

pub fn load_problem(source: &ProblemSource) -> Result<ProblemInstance, HarnessError> {
    match source {
        ProblemSource::Path(path) => {
            let text = fs::read_to_string(path)?;
            let desc: ProblemDesc = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("cannot parse {path:?}: {e}")))?;
            Ok(desc.build()?)
        }
        ProblemSource::Generated { seed, dim, kind } => {
            Ok(synthesize_instance(*seed, *dim, *kind)?)
        }
    }
}

/// Method-specific step size under the configured policy.
fn lambda_for_method(
    method: Method,
    mode: LambdaMode,
    l: f64,
    beta: f64,
) -> Result<f64, HarnessError> {
    match mode {
        LambdaMode::Shared(v) if v > 0.0 => Ok(v),
        LambdaMode::Shared(v) => Err(HarnessError::Config(format!(
            "shared step size must be positive, got {v}"
        ))),
        LambdaMode::SharedAuto => Ok(baseline_lambda(Method::Orfbs, l, beta)
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .0),
        LambdaMode::PerMethod => Ok(baseline_lambda(method, l, beta)
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .0),
    }
}

/// Runs every configured method on the shared problem from the zero start,
/// writing one trace file per method plus `summary.json`. Per-method
/// divergences are recorded in the summary and the sweep continues.
pub fn run_benchmark(config: &RunConfig) -> Result<BenchSummary, HarnessError> {
    config.validate()?;
    let problem = load_problem(&config.source)?;
    let (l, beta) = problem.constants();
    let stop = StoppingRule::new(config.tol, config.max_iters, config.criterion)?;
    let x0 = Point::zeros(problem.dim());

    fs::create_dir_all(&config.out_dir)?;
    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let lambda = lambda_for_method(method, config.lambda_mode, l, beta)?;
        log::info!("running {method} with lambda {lambda:.6e}");
        let trace_path = config
            .out_dir
            .join(format!("trace_{}.{}", method.name(), config.format.extension()));
        let row = match solve(&problem, method, lambda, &stop, &x0, &x0) {
            Ok(out) => {
                write_trace(&trace_path, &out.trace, config.format)?;
                MethodSummary {
                    method: method.name().into(),
                    lambda,
                    iterations: out.trace.len(),
                    converged: out.converged,
                    diverged_at: None,
                    final_residual: out.trace.last().map(|r| r.residual),
                    final_dist_to_ref: out.trace.last().and_then(|r| r.dist_to_ref),
                    wall_time_ns: out.trace.records().iter().map(|r| r.wall_time_ns).sum(),
                }
            }
            Err(SolveError::Divergence { k, trace }) => {
                log::info!("{method} diverged at k = {k}");
                write_trace(&trace_path, &trace, config.format)?;
                MethodSummary {
                    method: method.name().into(),
                    lambda,
                    iterations: trace.len(),
                    converged: false,
                    diverged_at: Some(k),
                    final_residual: trace.last().map(|r| r.residual),
                    final_dist_to_ref: trace.last().and_then(|r| r.dist_to_ref),
                    wall_time_ns: trace.records().iter().map(|r| r.wall_time_ns).sum(),
                }
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }

    let summary = BenchSummary {
        problem_dim: problem.dim(),
        lipschitz: l,
        cocoercivity: beta,
        rows,
    };
    let summary_path = config.out_dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Stable trace schema: `k,residual,step_norm,dist_to_ref,lyapunov,cum_c_err,
/// wall_time_ns`, optional fields left empty. Wall times are the only
/// nondeterministic column.
pub fn write_trace(
    path: &Path,
    trace: &IterationTrace,
    format: TraceFormat,
) -> Result<(), HarnessError> {
    match format {
        TraceFormat::Csv => {
            let mut out = Vec::with_capacity(trace.len() * 64 + 64);
            writeln!(
                out,
                "k,residual,step_norm,dist_to_ref,lyapunov,cum_c_err,wall_time_ns"
            )?;
            for r in trace.records() {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.k,
                    r.residual,
                    r.step_norm,
                    opt(r.dist_to_ref),
                    opt(r.lyapunov),
                    opt(r.cum_c_err),
                    r.wall_time_ns
                )?;
            }
            fs::write(path, out)?;
        }
        TraceFormat::Json => {
            fs::write(path, serde_json::to_string_pretty(trace.records())?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path, methods: Vec<Method>) -> RunConfig {
        RunConfig {
            source: ProblemSource::Generated {
                seed: 7,
                dim: 3,
                kind: InstanceKind::AffineInterior,
            },
            methods,
            lambda_mode: LambdaMode::PerMethod,
            tol: 1e-8,
            max_iters: 100_000,
            criterion: StopCriterion::StepNorm,
            seed: 7,
            out_dir: dir.to_path_buf(),
            format: TraceFormat::Csv,
        }
    }

    #[test]
    fn sweep_writes_traces_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            vec![Method::Orfbs, Method::Fbhfs, Method::Sfrbs],
        );
        let summary = run_benchmark(&cfg).unwrap();
        assert_eq!(summary.rows.len(), 3);
        assert!(summary.rows.iter().all(|r| r.converged));
        assert!(!summary.any_diverged());
        for m in ["orfbs", "fbhfs", "sfrbs"] {
            assert!(dir.path().join(format!("trace_{m}.csv")).exists());
        }
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn empty_methods_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), vec![]);
        assert!(matches!(
            run_benchmark(&cfg),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn oversized_shared_lambda_records_divergence() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path(), vec![Method::Orfbs, Method::Fbhfs]);
        cfg.lambda_mode = LambdaMode::Shared(100.0);
        let summary = run_benchmark(&cfg).unwrap();
        assert!(summary.any_diverged());
        // partial traces still land on disk
        assert!(dir.path().join("trace_orfbs.csv").exists());
    }

    #[test]
    fn identical_configs_produce_identical_traces() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let methods = vec![Method::Orfbs, Method::Srfbs];
        run_benchmark(&config(d1.path(), methods.clone())).unwrap();
        run_benchmark(&config(d2.path(), methods)).unwrap();
        for m in ["orfbs", "srfbs"] {
            let a = fs::read_to_string(d1.path().join(format!("trace_{m}.csv"))).unwrap();
            let b = fs::read_to_string(d2.path().join(format!("trace_{m}.csv"))).unwrap();
            let strip = |s: &str| {
                s.lines()
                    .map(|line| line.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
                    .collect::<Vec<_>>()
            };
            assert_eq!(strip(&a), strip(&b), "method {m} traces differ");
        }
    }
}
