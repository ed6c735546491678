//! End-to-end subcommand tests against the built binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monosplit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monosplit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn gen_then_solve_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = monosplit(
        &[
            "gen",
            "--seed",
            "1",
            "--dim",
            "4",
            "--kind",
            "affine-interior",
            "--out",
            "p.json",
        ],
        dir.path(),
    );
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    assert!(dir.path().join("p.json").exists());

    let solve = monosplit(
        &[
            "solve",
            "--problem",
            "p.json",
            "--method",
            "orfbs",
            "--lambda",
            "auto",
            "--trace",
            "trace.csv",
        ],
        dir.path(),
    );
    assert_eq!(solve.status.code(), Some(0), "{}", stderr(&solve));
    let text = stdout(&solve);
    assert!(text.contains("converged: true"), "{text}");

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header = trace.lines().next().unwrap();
    assert_eq!(
        header,
        "k,residual,step_norm,dist_to_ref,lyapunov,cum_c_err,wall_time_ns"
    );
    for line in trace.lines() {
        assert_eq!(line.split(',').count(), 7, "bad row: {line}");
    }
}

#[test]
fn trace_without_reference_leaves_fields_empty() {
    let dir = tempfile::tempdir().unwrap();
    // no known_solution, so the reference-dependent columns stay empty
    let problem = r#"{
        "dim": 2,
        "A": {"type": "box", "lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
        "B": {"type": "skew", "m": [[0.0, 0.5], [-0.5, 0.0]]},
        "C": {"type": "quad_grad", "q": [[1.0, 0.0], [0.0, 1.0]], "b": [0.3, -0.2]}
    }"#;
    fs::write(dir.path().join("p.json"), problem).unwrap();
    let out = monosplit(
        &[
            "solve",
            "--problem",
            "p.json",
            "--method",
            "orfbs",
            "--lambda",
            "auto",
            "--trace",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trace = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let row = trace.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 7);
    assert!(fields[3].is_empty() && fields[4].is_empty() && fields[5].is_empty());
}

#[test]
fn unknown_method_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    monosplit(
        &["gen", "--seed", "1", "--dim", "2", "--out", "p.json"],
        dir.path(),
    );
    let out = monosplit(
        &["solve", "--problem", "p.json", "--method", "bogus"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn missing_problem_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = monosplit(
        &["solve", "--problem", "nope.json", "--method", "orfbs"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oversized_step_exits_with_divergence_code() {
    let dir = tempfile::tempdir().unwrap();
    monosplit(
        &[
            "gen",
            "--seed",
            "3",
            "--dim",
            "3",
            "--kind",
            "affine-interior",
            "--out",
            "p.json",
        ],
        dir.path(),
    );
    let out = monosplit(
        &[
            "solve",
            "--problem",
            "p.json",
            "--method",
            "orfbs",
            "--lambda",
            "100.0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn oracle_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // eigenvalue ratio 1e-8 exhausts the reference iteration budget
    let problem = r#"{
        "dim": 2,
        "A": {"type": "ball", "center": [0.0, 0.0], "radius": 1e11},
        "B": {"type": "zero"},
        "C": {"type": "quad_grad", "q": [[1e-8, 0.0], [0.0, 1.0]], "b": [-1.0, 0.0]}
    }"#;
    fs::write(dir.path().join("slow.json"), problem).unwrap();
    let out = monosplit(
        &["solve", "--problem", "slow.json", "--method", "oracle"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn bench_writes_traces_and_reports_divergence_code() {
    let dir = tempfile::tempdir().unwrap();
    let ok = monosplit(
        &[
            "bench",
            "--gen-dim",
            "3",
            "--seed",
            "5",
            "--methods",
            "orfbs,fbhfs,sfrbs",
            "--out-dir",
            "runs",
        ],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    for m in ["orfbs", "fbhfs", "sfrbs"] {
        assert!(dir.path().join("runs").join(format!("trace_{m}.csv")).exists());
    }
    assert!(dir.path().join("runs/summary.json").exists());

    let div = monosplit(
        &[
            "bench",
            "--gen-dim",
            "3",
            "--seed",
            "5",
            "--methods",
            "orfbs,fbhfs",
            "--shared-lambda",
            "100.0",
            "--out-dir",
            "runs2",
        ],
        dir.path(),
    );
    assert_eq!(div.status.code(), Some(2), "{}", stderr(&div));
    let summary = fs::read_to_string(dir.path().join("runs2/summary.json")).unwrap();
    assert!(summary.contains("diverged_at"));
}

#[test]
fn bench_rejects_unknown_method_in_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = monosplit(
        &[
            "bench",
            "--gen-dim",
            "2",
            "--methods",
            "orfbs,nonsense",
            "--out-dir",
            "runs",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nonsense"));
}

#[test]
fn certify_reports_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    monosplit(
        &[
            "gen",
            "--seed",
            "2",
            "--dim",
            "3",
            "--kind",
            "affine-interior",
            "--out",
            "p.json",
        ],
        dir.path(),
    );
    let out = monosplit(
        &["certify", "--problem", "p.json", "--samples", "200"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("B monotone: PASS"), "{text}");
    assert!(text.contains("C cocoercive: PASS"), "{text}");
    assert!(text.contains("firmly-nonexpansive: PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn pd_solve_runs_composite_problem() {
    let dir = tempfile::tempdir().unwrap();
    // written through the library so the file matches the documented schema
    let problem = monosplit_core::product::synthesize_composite(3, 2, &[2]).unwrap();
    let desc = monosplit_core::json::CompositeDesc::from_problem(&problem);
    fs::write(
        dir.path().join("comp.json"),
        serde_json::to_string_pretty(&desc).unwrap(),
    )
    .unwrap();

    let out = monosplit(
        &[
            "pd-solve",
            "--problem",
            "comp.json",
            "--trace",
            "pd.csv",
            "--tol",
            "1e-9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("primal residual"), "{text}");
    assert!(dir.path().join("pd.csv").exists());

    let certify = monosplit(
        &[
            "certify",
            "--problem",
            "comp.json",
            "--composite",
            "--samples",
            "200",
        ],
        dir.path(),
    );
    assert_eq!(certify.status.code(), Some(0), "{}", stderr(&certify));
    assert!(stdout(&certify).contains("block0.C_inv cocoercive: PASS"));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = monosplit(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
