//! End-to-end tests of the `avgcycles` binary: exit codes, artifact layout,
//! CSV headers, determinism, and the two bundled constructions.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_avgcycles"))
}

/// Fresh per-test scratch directory (process id + label keeps parallel test
/// binaries and repeated runs apart).
fn scratch(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("avgcycles-cli-{}-{label}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const GOOD_VERTICAL: &str = r#"{
  "center": {"a": 1, "b": 1, "c": "-1/4", "d": 3},
  "switching_line": "x=0",
  "perturbation": {
    "p_plus": [[0, 0, 1.0]],
    "p_minus": [], "q_plus": [], "q_minus": []
  }
}"#;

const GOOD_HORIZONTAL: &str = r#"{
  "center": {"a": 1, "b": 1, "c": "-1/4", "d": 3},
  "switching_line": "y=0",
  "perturbation": {
    "p_plus": [[1, 0, 1.0], [1, 1, -0.5]],
    "p_minus": [[1, 0, 1.0]], "q_plus": [[0, 0, 2.0]], "q_minus": []
  }
}"#;

/// Violates the center condition: (d-2a)^2 + 8bc = 1 + 2 = 3 > 0.
const BAD_CENTER: &str = r#"{
  "center": {"a": 1, "b": 1, "c": "1/4", "d": 3},
  "switching_line": "x=0"
}"#;

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn validate_accepts_a_center_and_reports_the_g_floor() {
    let dir = scratch("validate-ok");
    let cfg = write_config(&dir, "good.json", GOOD_VERTICAL);
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(dir.join("out")).arg("validate"));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("validate: OK"), "stdout: {text}");
    assert!(text.contains("min |g|"), "stdout: {text}");
}

#[test]
fn validate_rejects_defective_configs_with_exit_2() {
    let dir = scratch("validate-bad");
    let bad = write_config(&dir, "bad-center.json", BAD_CENTER);
    let out = run(bin().args(["--config"]).arg(&bad).args(["--out"]).arg(dir.join("o1")).arg("validate"));
    assert_eq!(code(&out), 2, "center violation must exit 2");
    assert!(String::from_utf8_lossy(&out.stderr).contains("center"));

    let malformed = write_config(&dir, "malformed.json", "{ this is not json");
    let out = run(bin().args(["--config"]).arg(&malformed).args(["--out"]).arg(dir.join("o2")).arg("validate"));
    assert_eq!(code(&out), 2, "parse failure must exit 2");

    let bad_line = write_config(
        &dir,
        "bad-line.json",
        r#"{"center": {"a": 1, "b": 1, "c": -0.25, "d": 3}, "switching_line": "x=1"}"#,
    );
    let out = run(bin().args(["--config"]).arg(&bad_line).args(["--out"]).arg(dir.join("o3")).arg("validate"));
    assert_eq!(code(&out), 2, "unknown switching line must exit 2");

    // No --config at all.
    let out = run(bin().args(["--out"]).arg(dir.join("o4")).arg("validate"));
    assert_eq!(code(&out), 2);

    // Config path that does not exist is an I/O failure, not a validation one.
    let out = run(bin().args(["--config"]).arg(dir.join("absent.json")).args(["--out"]).arg(dir.join("o5")).arg("validate"));
    assert_eq!(code(&out), 6);
}

#[test]
fn pipeline_stages_emit_their_artifacts_with_fixed_headers() {
    let dir = scratch("pipeline");
    let cfg = write_config(&dir, "single.json", GOOD_VERTICAL);

    let out_dir = dir.join("coeffs");
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(&out_dir).arg("coeffs"));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let coeffs = read(&out_dir.join("coeffs.csv"));
    assert!(coeffs.starts_with("i,j,value,err\n"), "coeffs.csv header: {coeffs}");
    assert!(!out_dir.join("averaged.csv").exists(), "coeffs stage stops before assembly");

    let out_dir = dir.join("averaged");
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(&out_dir).arg("averaged"));
    assert_eq!(code(&out), 0);
    let averaged = read(&out_dir.join("averaged.csv"));
    let mut lines = averaged.lines();
    assert_eq!(lines.next(), Some("n,coefficient"));
    // A single constant term in the + branch of the first polynomial feeds
    // exactly the n = 2 monomial of h.
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 1, "single slot -> single term: {averaged}");
    assert!(data[0].starts_with("2,"), "term must be n = 2: {averaged}");

    let out_dir = dir.join("roots");
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(&out_dir).arg("roots"));
    assert_eq!(code(&out), 0, "zero roots is still a successful run");
    let roots = read(&out_dir.join("roots.csv"));
    assert_eq!(roots, "z_star,h_deriv,simple\n", "C·z^2 has no positive zeros");
    let report: serde_json::Value = serde_json::from_str(&read(&out_dir.join("roots.json"))).unwrap();
    assert_eq!(report["roots"].as_array().unwrap().len(), 0);

    let out_dir = dir.join("verify");
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(&out_dir).arg("verify"));
    assert_eq!(code(&out), 0);
    let verify: serde_json::Value = serde_json::from_str(&read(&out_dir.join("verify.json"))).unwrap();
    assert_eq!(verify["roots"].as_array().unwrap().len(), 0);
    assert_eq!(verify["count_verified"], 0);

    // The manifest lists every file the run wrote (including itself).
    let manifest: serde_json::Value = serde_json::from_str(&read(&out_dir.join("manifest.json"))).unwrap();
    let listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for entry in std::fs::read_dir(&out_dir).unwrap() {
        let path = entry.unwrap().path();
        assert!(
            listed.iter().any(|l| Path::new(l) == path),
            "{} missing from manifest outputs {listed:?}",
            path.display()
        );
    }
    assert!(manifest["timings_ms"].as_object().unwrap().values().all(|v| v.as_f64().unwrap() >= 0.0));
    assert_eq!(manifest["subcommand"], "verify");
}

#[test]
fn skip_verify_suppresses_the_cycle_report() {
    let dir = scratch("skip-verify");
    let cfg = write_config(&dir, "cfg.json", GOOD_VERTICAL);
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["--config"]).arg(&cfg)
        .args(["--out"]).arg(&out_dir)
        .args(["--skip-verify", "verify"]));
    assert_eq!(code(&out), 0);
    assert!(stdout_of(&out).contains("verify: skipped"));
    assert!(!out_dir.join("verify.json").exists());
    assert!(out_dir.join("roots.csv").exists(), "earlier stages still run");
}

#[test]
fn eps_ladder_override_is_recorded_in_the_cycle_report() {
    let dir = scratch("eps-override");
    let cfg = write_config(&dir, "cfg.json", GOOD_VERTICAL);
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["--config"]).arg(&cfg)
        .args(["--out"]).arg(&out_dir)
        .args(["--eps", "1e-2,1e-3", "verify"]));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let verify: serde_json::Value = serde_json::from_str(&read(&out_dir.join("verify.json"))).unwrap();
    let ladder: Vec<f64> = verify["config"]["epsilons"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(ladder, vec![1e-2, 1e-3]);

    // A non-decreasing or non-numeric ladder is an argument failure.
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(dir.join("o2")).args(["--eps", "1e-4,1e-3", "verify"]));
    assert_eq!(code(&out), 2);
    let out = run(bin().args(["--config"]).arg(&cfg).args(["--out"]).arg(dir.join("o3")).args(["--eps", "pi", "verify"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn identical_runs_are_byte_identical_and_thread_count_invariant() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, "cfg.json", GOOD_HORIZONTAL);
    let (d1, d2, d3) = (dir.join("r1"), dir.join("r2"), dir.join("r3"));
    for (out_dir, threads) in [(&d1, None), (&d2, None), (&d3, Some("1"))] {
        let mut cmd = bin();
        cmd.args(["--config"]).arg(&cfg).args(["--out"]).arg(out_dir).arg("averaged");
        match threads {
            Some(n) => cmd.env("AVGCYCLES_THREADS", n),
            None => cmd.env_remove("AVGCYCLES_THREADS"),
        };
        let out = run(&mut cmd);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["coeffs.csv", "averaged.csv"] {
        let a = read(&d1.join(name));
        assert_eq!(a, read(&d2.join(name)), "{name} differs between identical runs");
        assert_eq!(a, read(&d3.join(name)), "{name} depends on the worker count");
    }

    let out = run(bin()
        .env("AVGCYCLES_THREADS", "0")
        .args(["--config"]).arg(&cfg).args(["--out"]).arg(dir.join("r4")).arg("coeffs"));
    assert_eq!(code(&out), 2, "a zero worker cap is rejected");
}

#[test]
fn orbit_exports_time_series_csv() {
    let dir = scratch("orbit");
    let cfg = write_config(&dir, "cfg.json", GOOD_VERTICAL);
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["--config"]).arg(&cfg)
        .args(["--out"]).arg(&out_dir)
        .args(["orbit", "--x0", "1", "--y0", "0", "--tmax", "5"]));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&out_dir.join("orbit.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    assert_eq!(lines.next(), Some("0,1,0"), "first sample is the initial state");
    assert!(lines.count() > 10, "a 5-time-unit orbit takes many steps");

    let out = run(bin()
        .args(["--config"]).arg(&cfg)
        .args(["--out"]).arg(dir.join("o2"))
        .args(["orbit", "--x0", "1", "--y0", "0", "--tmax", "-1"]));
    assert_eq!(code(&out), 2, "nonpositive horizon is an argument failure");
}

#[test]
fn reproduce_thm11_pipeline_checks_pass_without_verification() {
    let dir = scratch("repro11-skip");
    let out = run(bin().args(["--out"]).arg(dir.join("out")).args(["--skip-verify", "reproduce", "thm11"]));
    assert_eq!(code(&out), 0, "stdout: {}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("all checks passed"), "stdout: {text}");
    assert!(dir.join("out/reproduce-problem.json").exists());
    assert!(dir.join("out/reproduce-report.txt").exists());
}

#[test]
fn reproduce_thm12_passes_end_to_end() {
    let dir = scratch("repro12");
    let out = run(bin().args(["--out"]).arg(dir.join("out")).args(["reproduce", "thm12"]));
    let text = stdout_of(&out);
    assert_eq!(code(&out), 0, "stdout: {text}");
    assert!(text.contains("3 verified cycles"), "stdout: {text}");
    assert!(text.contains("even-i entries vanish"), "stdout: {text}");
    let verify: serde_json::Value =
        serde_json::from_str(&read(&dir.join("out/verify.json"))).unwrap();
    assert_eq!(verify["count_verified"], 3);
}

#[test]
fn reproduce_thm11_with_verification_fails_honestly() {
    // The verification stage cannot confirm the seven cycles at the default
    // ε ladder (the perturbation values are large enough that the first-order
    // window assumptions break down); the command must say so and exit 1
    // rather than hide it.
    let dir = scratch("repro11-full");
    let out = run(bin().args(["--out"]).arg(dir.join("out")).args(["reproduce", "thm11"]));
    let text = stdout_of(&out);
    assert_eq!(code(&out), 1, "stdout: {text}");
    assert!(text.contains("UNVERIFIED"), "stdout: {text}");
    assert!(text.contains("CHECKS FAILED"), "stdout: {text}");
    // The failure is reported as data, not as a crash: the report and
    // manifest are still written.
    let verify: serde_json::Value =
        serde_json::from_str(&read(&dir.join("out/verify.json"))).unwrap();
    assert_eq!(verify["count_verified"], 0);
    assert_eq!(verify["roots"].as_array().unwrap().len(), 7);
}

#[test]
fn tolerance_flag_reaches_the_quadrature_stage() {
    let dir = scratch("tol-flag");
    let cfg = write_config(&dir, "cfg.json", GOOD_VERTICAL);
    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["--config"]).arg(&cfg)
        .args(["--out"]).arg(&out_dir)
        .args(["--tol", "1e-6", "coeffs"]));
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out_dir.join("manifest.json"))).unwrap();
    assert_eq!(manifest["tolerances"]["quadrature"], 1e-6);
}
