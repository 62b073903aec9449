//! End-to-end runs of the `privsyn` binary: every subcommand against real
//! files in temporary directories, exit codes, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use privsyn::formats::{load_certificate, load_sweep, load_values};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_privsyn")
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn grid10() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/grid10.txt")
}

/// Smaller 5x5 layout keeping the privacy and sweep runs quick.
fn write_grid5(dir: &Path) -> PathBuf {
    let path = dir.join("grid5.txt");
    fs::write(
        &path,
        "grid 5 5\ntarget 4 2\nobstacle 2 2\np_nominal 0.8\np_attack 0.6\n",
    )
    .unwrap();
    path
}

const FORMULA: &str = "GF tar & G !obs";

#[test]
fn synth_writes_artifacts_and_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let grid = grid10();

    let mut stdouts = Vec::new();
    for out in [&out_a, &out_b] {
        let output = run(&[
            "synth",
            "--grid",
            grid.to_str().unwrap(),
            "--formula",
            FORMULA,
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "stderr: {}", stderr_of(&output));
        stdouts.push(stdout_of(&output));
    }
    assert_eq!(stdouts[0], stdouts[1]);
    assert!(stdouts[0].contains("V(start) = 0.991516"));

    for name in ["values.csv", "policy.txt", "accepting.txt"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let values = load_values(out_a.join("values.csv")).unwrap();
    assert_eq!(values.len(), 300);
    assert!((values[0] - 0.991_515_701_155_187_8).abs() < 1e-9);
    let accepting = fs::read_to_string(out_a.join("accepting.txt")).unwrap();
    assert!(accepting.contains("e 178"));
}

#[test]
fn simulate_is_deterministic_and_close_to_the_value() {
    let grid = grid10();
    let args = [
        "simulate",
        "--grid",
        grid.to_str().unwrap(),
        "--formula",
        FORMULA,
        "--rollouts",
        "2000",
        "--horizon",
        "200",
        "--seed",
        "0",
    ];
    let first = run(&args);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    let second = run(&args);
    assert_eq!(stdout_of(&first), stdout_of(&second));
    let text = stdout_of(&first);
    assert!(text.contains("V(start) = 0.991516"), "stdout: {text}");
    assert!(text.contains("estimate"), "stdout: {text}");
}

#[test]
fn privacy_writes_a_certificate_meeting_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_grid5(dir.path());
    let out = dir.path().join("out");
    let output = run(&[
        "privacy",
        "--grid",
        grid.to_str().unwrap(),
        "--formula",
        FORMULA,
        "--epsilon",
        "1",
        "--delta",
        "0.001",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));

    let cert = load_certificate(out.join("certificate_eps1.txt")).unwrap();
    assert!((cert.epsilon - 1.0).abs() < 1e-12);
    assert!(cert.pairs > 0);
    let delta_min = cert.delta_min.expect("non-empty relation");
    assert!(delta_min <= 0.001 + 1e-12, "delta_min {delta_min}");
    assert!(cert.valid_for(0.001));
    assert!(out.join("dstar_eps1.txt").is_file());
    assert!(out.join("relation_eps1.txt").is_file());
}

#[test]
fn sweep_produces_a_monotone_grid_and_exit_three_on_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_grid5(dir.path());
    let out = dir.path().join("out");
    let base = [
        "sweep",
        "--grid",
        grid.to_str().unwrap(),
        "--formula",
        FORMULA,
        "--epsilon",
        "0.5,1",
        "--delta",
        "1e-3,1e-2",
        "--horizon",
        "40",
        "--seed",
        "0",
    ];

    let mut outputs = Vec::new();
    for run_dir in ["s1", "s2"] {
        let target = dir.path().join(run_dir);
        let mut args: Vec<String> = base.iter().map(|s| s.to_string()).collect();
        args.push("--out-dir".into());
        args.push(target.to_str().unwrap().into());
        let output = run(&args);
        assert!(output.status.success(), "stderr: {}", stderr_of(&output));
        outputs.push(fs::read(target.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "sweep.csv differs between reruns");

    let rows = load_sweep(dir.path().join("s1/sweep.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    // Non-decreasing counts along both axes of the 2x2 grid.
    assert!(rows[0].count <= rows[1].count);
    assert!(rows[2].count <= rows[3].count);
    assert!(rows[0].count <= rows[2].count);
    assert!(rows[1].count <= rows[3].count);

    // A one-node budget must truncate the count and exit 3, after writing
    // the capped results.
    let mut args: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    for extra in ["--node-budget", "1", "--out-dir", out.to_str().unwrap()] {
        args.push(extra.into());
    }
    let output = run(&args);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr_of(&output));
    assert!(out.join("sweep.csv").is_file());
}

#[test]
fn validate_formats_passes_produced_artifacts_and_flags_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = grid10();
    let out = dir.path().join("out");
    let synth = run(&[
        "synth",
        "--grid",
        grid.to_str().unwrap(),
        "--formula",
        FORMULA,
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(synth.status.success());

    let ok = run(&[
        "validate-formats",
        "--grid",
        grid.to_str().unwrap(),
        "--values",
        out.join("values.csv").to_str().unwrap(),
        "--policy",
        out.join("policy.txt").to_str().unwrap(),
        "--accepting",
        out.join("accepting.txt").to_str().unwrap(),
    ]);
    assert!(ok.status.success(), "stderr: {}", stderr_of(&ok));
    let text = stdout_of(&ok);
    assert_eq!(text.matches(": ok,").count(), 4, "stdout: {text}");

    let bad_path = dir.path().join("broken.txt");
    fs::write(&bad_path, "grid five five\n").unwrap();
    let bad = run(&[
        "validate-formats",
        "--grid",
        bad_path.to_str().unwrap(),
        "--values",
        out.join("values.csv").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout_of(&bad).contains("invalid grid"));
}

#[test]
fn usage_errors_exit_two() {
    // Missing input entirely.
    let none = run(&["synth", "--formula", FORMULA]);
    assert_eq!(none.status.code(), Some(2));
    assert!(stderr_of(&none).contains("error:"));

    // Nonexistent grid file.
    let missing = run(&["synth", "--grid", "/no/such/file", "--formula", FORMULA]);
    assert_eq!(missing.status.code(), Some(2));

    // Unknown subcommand is rejected by the parser.
    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
}
