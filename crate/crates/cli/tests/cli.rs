//! End-to-end tests of the `ellipcert` binary: exit-code contract, file
//! formats, summary output, and inter-command consistency.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ellipcert_cli::approx;
use ellipcert_cli::config::RunConfig;
use ellipcert_core::legendre::{LegendreFunction, Rectangle};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ellipcert"));
    // Isolate from the ambient environment.
    c.env_remove("ELLIPCERT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const EMDEN3_SMALL: &str = r#"
[problem]
lambda = "0"
terms = [{ exponent = 3, coeff = "1" }]

[solver]
n = 16

[rigor]
depth = 5
cert_basis = 24
"#;

#[test]
fn solve_writes_approx_and_reports_published_peak() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "emden3.toml",
        "[problem]\nlambda = \"0\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 16\n",
    );
    let approx_path = dir.path().join("emden3.approx");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        approx_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let max = extract_after(&text, "max |û| ≈ ");
    assert!((max - 6.6232).abs() < 2e-3, "peak {max}, summary: {text}");
    assert!(approx_path.exists());
    let (u, _) = approx::read(&approx_path).unwrap();
    assert_eq!(u.n(), 16);
}

#[test]
fn solve_rejects_zero_basis_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.toml",
        "[problem]\nlambda = \"0\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 0\n",
    );
    let out = run(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("at least 2"), "{err}");
    assert!(err.contains("stage: config"), "{err}");
}

#[test]
fn certify_small_emden_is_positive_with_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "emden3.toml", EMDEN3_SMALL);
    let cert_path = dir.path().join("emden3.cert.json");
    let out = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let table = stdout(&out);
    for row in ["‖F′(û)⁻¹‖", "‖F(û)‖_V*", "L ", "α", "β", "ρ", "condition", "C4"] {
        assert!(table.contains(row), "missing row {row:?} in:\n{table}");
    }
    assert!(table.contains("POSITIVE"), "{table}");
    let json = std::fs::read_to_string(&cert_path).unwrap();
    let cert = ellipcert_core::certify::Certificate::from_json(&json).unwrap();
    assert_eq!(cert.verdict, ellipcert_core::certify::Verdict::Positive);
    assert_eq!(cert.schema_version, 1);
}

#[test]
fn certify_accepts_matching_approx_file_and_rejects_foreign_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "emden3.toml", EMDEN3_SMALL);
    let approx_path = dir.path().join("emden3.approx");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        approx_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let cert_path = dir.path().join("emden3.cert.json");
    let out = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--approx",
        approx_path.to_str().unwrap(),
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    // Same approximation against a different problem: digest mismatch.
    let other = write_config(
        dir.path(),
        "other.toml",
        "[problem]\nlambda = \"1\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 8\n[rigor]\ncert_basis = 24\n",
    );
    let out = run(&[
        "certify",
        "--config",
        other.to_str().unwrap(),
        "--approx",
        approx_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("different problem"), "{}", stderr(&out));
}

#[test]
fn certify_reports_failing_stage_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // A 3-mode candidate cannot pass the Kantorovich product test.
    let config = write_config(
        dir.path(),
        "tiny.toml",
        "[problem]\nlambda = \"0\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 3\n[rigor]\ncert_basis = 20\n",
    );
    let cert_path = dir.path().join("tiny.cert.json");
    let out = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "stdout: {}", stdout(&out));
    let err = stderr(&out);
    assert!(err.contains("stage: kantorovich"), "{err}");
    assert!(err.contains("verdict: failed"), "{err}");
    let json = std::fs::read_to_string(&cert_path).unwrap();
    assert!(json.contains("\"failed\""), "{json}");
}

#[test]
fn certify_classifies_impossible_sign_pattern_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    // λ = 60 > λ₁ ≈ 19.74 with a₃ > 0: no positive solution exists.
    let config = write_config(
        dir.path(),
        "impossible.toml",
        "[problem]\nlambda = \"60\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 8\n",
    );
    let cert_path = dir.path().join("impossible.cert.json");
    let out = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    let json = std::fs::read_to_string(&cert_path).unwrap();
    assert!(json.contains("no-positive-solution"), "{json}");
    // Classified from the signs alone: no approximation was computed.
    assert!(!json.contains("\"approximation\""), "{json}");
}

#[test]
fn certify_exit_4_when_no_strategy_applies() {
    let dir = tempfile::tempdir().unwrap();
    // Linear problem with λ above λ₁: every positivity route is undefined.
    let config = write_config(
        dir.path(),
        "linear.toml",
        "[problem]\nlambda = \"60\"\n[solver]\nn = 8\n",
    );
    let out = run(&["certify", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("stage: strategy"), "{}", stderr(&out));
}

#[test]
fn plot_data_zero_function_emits_zero_column_and_4k_flag_rows() {
    let dir = tempfile::tempdir().unwrap();
    let zero = LegendreFunction::new(6, vec![0.0; 36], Rectangle::UNIT).unwrap();
    let approx_path = dir.path().join("zero.approx");
    approx::write(&approx_path, &zero, "unbound").unwrap();
    let flag_path = dir.path().join("zero.flags.csv");
    let config = write_config(
        dir.path(),
        "plot.toml",
        &format!(
            "[problem]\nlambda = \"0\"\n[output]\nplot_points = 9\nflag_grid = {:?}\n",
            flag_path.to_str().unwrap()
        ),
    );
    let csv_path = dir.path().join("zero.csv");
    let out = run(&[
        "plot-data",
        "--config",
        config.to_str().unwrap(),
        "--approx",
        approx_path.to_str().unwrap(),
        "--depth",
        "3",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,u");
    assert_eq!(lines.len(), 1 + 9 * 9);
    for l in &lines[1..] {
        assert!(l.ends_with(",0"), "non-zero sample: {l}");
    }

    let flags = std::fs::read_to_string(&flag_path).unwrap();
    assert_eq!(flags.lines().count(), 4usize.pow(3));
    assert!(flags.lines().all(|l| l.ends_with(",0")));
}

#[test]
fn plot_data_max_matches_solver_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config_body = "[problem]\nlambda = \"0\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n[solver]\nn = 16\n[output]\nplot_points = 129\n";
    let config = write_config(dir.path(), "emden3.toml", config_body);
    let approx_path = dir.path().join("emden3.approx");
    let out = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        approx_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let solve_text = stdout(&out);
    let solver_max = extract_after(&solve_text, "max |û| ≈ ");

    let csv_path = dir.path().join("emden3.csv");
    let out = run(&[
        "plot-data",
        "--config",
        config.to_str().unwrap(),
        "--approx",
        approx_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let csv_max = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0f64, f64::max);
    assert!(
        (csv_max - solver_max).abs() <= 1e-3,
        "csv max {csv_max} vs solver max {solver_max}"
    );
}

#[test]
fn constants_report_shows_enclosures_and_provenance() {
    let out = run(&["constants"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("lambda1"), "{text}");
    assert!(text.contains("19.739208802178"), "{text}");
    assert!(text.contains("0.2250790790"), "{text}");
    assert!(text.contains("0.31830989"), "{text}");
    assert!(text.contains("0.39585400"), "{text}");
    assert!(text.contains("closed-form"), "{text}");
    assert!(text.contains("pinned"), "{text}");
}

#[test]
fn constants_include_supplied_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "supplied.toml",
        "[problem]\nlambda = \"0\"\n[rigor]\nembeddings = [{ q = 8, lo = \"0.43\", hi = \"0.44\" }]\n",
    );
    let out = run(&["constants", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("C8"), "{text}");
    assert!(text.contains("supplied"), "{text}");
}

#[test]
fn jobs_cap_is_validated() {
    let out = bin().args(["constants", "--jobs", "0"]).output().unwrap();
    assert_eq!(code(&out), 2);
    let out = bin()
        .args(["constants"])
        .env("ELLIPCERT_THREADS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = bin()
        .args(["constants"])
        .env("ELLIPCERT_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn config_survives_round_trip_through_the_public_api() {
    let c1 = RunConfig::from_toml(EMDEN3_SMALL).unwrap();
    let s1 = c1.to_toml();
    let c2 = RunConfig::from_toml(&s1).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(s1, c2.to_toml());
}

fn extract_after(text: &str, marker: &str) -> f64 {
    let at = text.find(marker).unwrap_or_else(|| panic!("{marker:?} not in {text:?}"));
    let rest = &text[at + marker.len()..];
    let end = rest
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e'))
        .unwrap_or(rest.len());
    rest[..end].parse().expect("numeric summary value")
}
