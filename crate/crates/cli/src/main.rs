//! Command-line front end for the monosplit solvers.
//!
//! Subcommands: `gen` (synthesize a problem file), `solve` (one method on one
//! problem), `bench` (multi-method sweep with traces), `certify` (operator
//! probe report), `pd-solve` (composite primal-dual problem). Verbosity is
//! controlled by the `MONOSPLIT_LOG` environment variable (off|info|debug).
//!
//! Exit codes: 0 success, 1 configuration error, 2 divergence, 3 oracle
//! failure.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use monosplit_cli::bench::{
    run_benchmark, write_trace, LambdaMode, ProblemSource, RunConfig, TraceFormat,
};
use monosplit_cli::oracle::oracle_solve;
use monosplit_cli::HarnessError;
use monosplit_core::algorithms::{
    baseline_lambda, solve, Method, StopCriterion, StoppingRule,
};
use monosplit_core::catalog::InstanceKind;
use monosplit_core::json::{CompositeDesc, ProblemDesc};
use monosplit_core::probes::{certify, probe_firmly_nonexpansive, CertReport, ProbeConfig};
use monosplit_core::product::{primal_dual_solve, LiftedPoint};
use monosplit_core::{Point, ProblemInstance};

#[derive(Parser)]
#[command(name = "monosplit", version, about = "Three-operator monotone inclusion solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthesized problem instance as JSON.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        /// affine-interior | affine-full | ball-interior | l1-lasso-like
        #[arg(long, default_value = "affine-interior")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one method on one problem.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// A scheme name, or `oracle` for the reference solver.
        #[arg(long)]
        method: String,
        /// Step size: `auto` or an explicit positive value.
        #[arg(long, default_value = "auto")]
        lambda: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
        /// step-norm | residual | dist-to-ref
        #[arg(long, default_value = "residual")]
        criterion: String,
        /// Write the iteration trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Run a multi-method benchmark sweep.
    Bench {
        #[arg(long, conflicts_with_all = ["gen_dim", "gen_kind"])]
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        gen_dim: usize,
        #[arg(long, default_value = "affine-interior")]
        gen_kind: String,
        /// Comma-separated method names.
        #[arg(long, default_value = "orfbs,fbhfs,sfrbs,srfbs,csetnek3")]
        methods: String,
        /// Use one step size for every method: `auto` or an explicit value.
        #[arg(long)]
        shared_lambda: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
        #[arg(long, default_value = "step-norm")]
        criterion: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Probe an operator triple (or composite blocks) against declared
    /// constants.
    Certify {
        #[arg(long)]
        problem: PathBuf,
        /// Treat the input as a composite primal-dual problem.
        #[arg(long)]
        composite: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a composite primal-dual problem through the product-space lift.
    PdSolve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 500_000)]
        max_iters: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Probe parameter for the final residual report.
        #[arg(long, default_value_t = 1.0)]
        lambda_probe: f64,
        #[command(flatten)]
        format: FormatArg,
    },
}

#[derive(Args)]
struct FormatArg {
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
}

impl FormatArg {
    fn parse(&self) -> Result<TraceFormat, HarnessError> {
        match self.format.as_str() {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            other => Err(HarnessError::Config(format!(
                "unknown trace format `{other}`"
            ))),
        }
    }
}

fn parse_kind(s: &str) -> Result<InstanceKind, HarnessError> {
    InstanceKind::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
}

fn parse_method(s: &str) -> Result<Method, HarnessError> {
    Method::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
}

fn parse_criterion(s: &str) -> Result<StopCriterion, HarnessError> {
    StopCriterion::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
}

fn load_problem(path: &PathBuf) -> Result<ProblemInstance, HarnessError> {
    let text = fs::read_to_string(path)?;
    let desc: ProblemDesc = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("cannot parse {path:?}: {e}")))?;
    Ok(desc.build()?)
}

fn print_report(label: &str, report: &CertReport) {
    let line = |name: &str, outcome: &monosplit_core::probes::ProbeOutcome| {
        println!(
            "{label} {name}: {} (worst margin {:.3e}, {} samples)",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.worst_margin,
            report.samples
        );
    };
    line("monotone", &report.monotone);
    if let Some(p) = &report.lipschitz {
        line("lipschitz", p);
    }
    if let Some(p) = &report.cocoercive {
        line("cocoercive", p);
    }
}

fn cmd_gen(seed: u64, dim: usize, kind: &str, out: &PathBuf) -> Result<(), HarnessError> {
    let kind = parse_kind(kind)?;
    let instance = monosplit_core::catalog::synthesize_instance(seed, dim, kind)?;
    let desc = ProblemDesc::from_instance(&instance);
    let mut text = serde_json::to_string_pretty(&desc)?;
    text.push('\n');
    fs::write(out, text)?;
    println!(
        "wrote {} instance (dim {dim}, seed {seed}) to {}",
        kind.name(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    problem: &PathBuf,
    method: &str,
    lambda: &str,
    tol: f64,
    max_iters: usize,
    criterion: &str,
    trace_path: Option<&PathBuf>,
    format: TraceFormat,
) -> Result<(), HarnessError> {
    let instance = load_problem(problem)?;

    if method == "oracle" {
        let x = oracle_solve(&instance)?;
        let residual = instance
            .residual_at(&x, 1.0)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        println!("oracle solution: {x}");
        println!("inclusion residual: {residual:.6e}");
        return Ok(());
    }

    let method = parse_method(method)?;
    let criterion = parse_criterion(criterion)?;
    let (l, beta) = instance.constants();
    let lambda = match lambda {
        "auto" => {
            let (lam, unconstrained) = baseline_lambda(method, l, beta)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            if unconstrained {
                log::info!("no step bound binds; defaulting lambda to 1.0");
            }
            lam
        }
        other => other
            .parse::<f64>()
            .map_err(|_| HarnessError::Config(format!("invalid lambda `{other}`")))?,
    };
    let stop = StoppingRule::new(tol, max_iters, criterion)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let x0 = Point::zeros(instance.dim());

    log::info!("solving with {method}, lambda {lambda:.6e}");
    match solve(&instance, method, lambda, &stop, &x0, &x0) {
        Ok(out) => {
            if let Some(path) = trace_path {
                write_trace(path, &out.trace, format)?;
            }
            let rec = out.trace.last().expect("at least one iteration");
            println!("method: {method}");
            println!("lambda: {lambda}");
            println!("iterations: {}", out.trace.len());
            println!("converged: {}", out.converged);
            println!("final residual: {:.6e}", rec.residual);
            if let Some(d) = rec.dist_to_ref {
                println!("distance to known solution: {d:.6e}");
            }
            println!("solution: {}", out.point);
            Ok(())
        }
        Err(monosplit_core::SolveError::Divergence { k, trace }) => {
            if let Some(path) = trace_path {
                write_trace(path, &trace, format)?;
            }
            eprintln!("diverged at iteration {k}");
            Err(HarnessError::Divergence(k))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_certify(
    problem: &PathBuf,
    composite: bool,
    samples: usize,
    seed: u64,
) -> Result<(), HarnessError> {
    let text = fs::read_to_string(problem)?;
    if composite {
        let desc: CompositeDesc = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("cannot parse {problem:?}: {e}")))?;
        let cp = desc.build()?;
        for (label, report) in cp.certify_blocks(samples, seed)? {
            print_report(&label, &report);
        }
        return Ok(());
    }
    let desc: ProblemDesc = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("cannot parse {problem:?}: {e}")))?;
    let instance = desc.build()?;
    print_report("B", &certify(&instance.b, samples, seed)?);
    print_report("C", &certify(&instance.c, samples, seed ^ 1)?);
    let firm = probe_firmly_nonexpansive(
        |x| {
            use monosplit_core::ResolventOp;
            instance.a.resolvent(1.0, x)
        },
        instance.dim(),
        samples,
        seed ^ 2,
        &ProbeConfig::default(),
    )?;
    println!(
        "A resolvent firmly-nonexpansive: {} (worst margin {:.3e}, {samples} samples)",
        if firm.passed { "PASS" } else { "FAIL" },
        firm.worst_margin
    );
    Ok(())
}

fn cmd_pd_solve(
    problem: &PathBuf,
    tol: f64,
    max_iters: usize,
    trace_path: Option<&PathBuf>,
    lambda_probe: f64,
    format: TraceFormat,
) -> Result<(), HarnessError> {
    let text = fs::read_to_string(problem)?;
    let desc: CompositeDesc = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("cannot parse {problem:?}: {e}")))?;
    let cp = desc.build()?;
    let (lbar, bbar) = cp.aggregate_constants();
    println!("aggregate constants: L = {lbar:.6e}, beta = {bbar:.6e}");

    let stop = StoppingRule::new(tol, max_iters, StopCriterion::StepNorm)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let init: LiftedPoint = cp.zero_lifted();
    match primal_dual_solve(&cp, &stop, &init) {
        Ok(out) => {
            if let Some(path) = trace_path {
                write_trace(path, &out.trace, format)?;
            }
            println!("lambda: {:.6e}", out.lambda);
            println!("iterations: {}", out.trace.len());
            println!("converged: {}", out.converged);
            let (primal, duals) = cp
                .check_residuals(&out.x, &out.v, lambda_probe)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            println!("primal residual: {primal:.6e}");
            for (i, d) in duals.iter().enumerate() {
                println!("dual residual [{i}]: {d:.6e}");
            }
            println!("primal solution: {}", out.x);
            Ok(())
        }
        Err(monosplit_core::SolveError::Divergence { k, trace }) => {
            if let Some(path) = trace_path {
                write_trace(path, &trace, format)?;
            }
            eprintln!("diverged at iteration {k}");
            Err(HarnessError::Divergence(k))
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Gen {
            seed,
            dim,
            kind,
            out,
        } => cmd_gen(*seed, *dim, kind, out),
        Command::Solve {
            problem,
            method,
            lambda,
            tol,
            max_iters,
            criterion,
            trace,
            format,
        } => cmd_solve(
            problem,
            method,
            lambda,
            *tol,
            *max_iters,
            criterion,
            trace.as_ref(),
            format.parse()?,
        ),
        Command::Bench {
            problem,
            gen_dim,
            gen_kind,
            methods,
            shared_lambda,
            tol,
            max_iters,
            criterion,
            seed,
            out_dir,
            format,
        } => {
            let source = match problem {
                Some(path) => ProblemSource::Path(path.clone()),
                None => ProblemSource::Generated {
                    seed: *seed,
                    dim: *gen_dim,
                    kind: parse_kind(gen_kind)?,
                },
            };
            let parsed_methods = methods
                .split(',')
                .map(|s| parse_method(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let lambda_mode = match shared_lambda.as_deref() {
                None => LambdaMode::PerMethod,
                Some("auto") => LambdaMode::SharedAuto,
                Some(v) => LambdaMode::Shared(v.parse::<f64>().map_err(|_| {
                    HarnessError::Config(format!("invalid shared lambda `{v}`"))
                })?),
            };
            let config = RunConfig {
                source,
                methods: parsed_methods,
                lambda_mode,
                tol: *tol,
                max_iters: *max_iters,
                criterion: parse_criterion(criterion)?,
                seed: *seed,
                out_dir: out_dir.clone(),
                format: format.parse()?,
            };
            let summary = run_benchmark(&config)?;
            println!(
                "{:<10} {:>12} {:>9} {:>10} {:>14}",
                "method", "lambda", "iters", "converged", "final_resid"
            );
            for row in &summary.rows {
                println!(
                    "{:<10} {:>12.4e} {:>9} {:>10} {:>14}",
                    row.method,
                    row.lambda,
                    row.iterations,
                    if row.diverged_at.is_some() {
                        "diverged"
                    } else if row.converged {
                        "yes"
                    } else {
                        "no"
                    },
                    row.final_residual
                        .map(|r| format!("{r:.4e}"))
                        .unwrap_or_default()
                );
            }
            println!("traces written to {}", config.out_dir.display());
            if summary.any_diverged() {
                let k = summary
                    .rows
                    .iter()
                    .filter_map(|r| r.diverged_at)
                    .next()
                    .unwrap_or(0);
                return Err(HarnessError::Divergence(k));
            }
            Ok(())
        }
        Command::Certify {
            problem,
            composite,
            samples,
            seed,
        } => cmd_certify(problem, *composite, *samples, *seed),
        Command::PdSolve {
            problem,
            tol,
            max_iters,
            trace,
            lambda_probe,
            format,
        } => cmd_pd_solve(
            problem,
            *tol,
            *max_iters,
            trace.as_ref(),
            *lambda_probe,
            format.parse()?,
        ),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MONOSPLIT_LOG", "off"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not configuration errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
