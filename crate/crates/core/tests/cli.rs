use std::path::PathBuf;
use std::process::{Command, Output};

use qcontact::report::RunReport;

fn qcontact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcontact"))
        .args(args)
        .env_remove("QCONTACT_TOL")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
#[allow(clippy::approx_constant)] // matches the truncated value passed on the command line
fn simulate_contact_oscillator() {
    let out = qcontact(&[
        "simulate",
        "--builtin",
        "contact-r3",
        "--t0",
        "0",
        "--t1",
        "3.1415926",
        "--tol",
        "1e-10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["t", "q1", "v1", "z1"]);
    let last = rows.last().unwrap();
    let t: f64 = 3.1415926;
    let exact = [t.sin(), t.cos(), (2.0 * t).sin() / 4.0];
    for (a, b) in last[1..].iter().zip(exact) {
        assert!((a - b).abs() < 1e-8, "{last:?}");
    }
    assert!(last[1].abs() < 1e-6 && (last[2] + 1.0).abs() < 1e-8);
}

#[test]
fn simulate_rocket_energy_ratio() {
    let out = qcontact(&["simulate", "--builtin", "rocket", "--t1", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    let e = column(&header, "E_L");
    let ratio = rows.last().unwrap()[e] / rows[0][e];
    assert!((ratio - 0.5138).abs() < 1e-3, "{ratio}");
}

#[test]
fn simulate_writes_files_and_rk4_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e1.csv");
    let out = qcontact(&[
        "simulate",
        "--builtin",
        "e1",
        "--method",
        "rk4",
        "--step",
        "0.01",
        "--t1",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,q1,v1,z1,z2,E_L\n"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["simulate", "--builtin", "e1", "--t1", "2", "--sample-interval", "0.1"];
    assert_eq!(qcontact(&args).stdout, qcontact(&args).stdout);
    let args = ["verify", "--builtin", "two-contact-r4", "--suite", "structure"];
    assert_eq!(qcontact(&args).stdout, qcontact(&args).stdout);
}

#[test]
fn missing_config_exits_2_and_names_the_path() {
    let out = qcontact(&["simulate", "--config", "/no/such/model.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/model.json"));
}

#[test]
fn bad_inputs_exit_2() {
    assert_eq!(qcontact(&["simulate", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(
        qcontact(&["simulate", "--builtin", "e1", "--initial", "1,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qcontact(&["simulate", "--builtin", "e1", "--t1", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(qcontact(&["simulate"]).status.code(), Some(2));
    assert_eq!(qcontact(&["parse", "sin("]).status.code(), Some(2));
}

#[test]
fn integration_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blowup.json");
    std::fs::write(
        &path,
        r#"{"kind":"lagrangian","n":1,"qcount":1,"expressions":{"lagrangian":"v1^2/2 + q1^4"},"initial":[1,10,0],"t-span":[0,100]}"#,
    )
    .unwrap();
    let out = qcontact(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_e1_all() {
    let out = qcontact(&["verify", "--builtin", "e1", "--suite", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.pass);
    assert!(report.checks.len() >= 12);
    assert_eq!(report.config_digest.len(), 64);
}

#[test]
fn verify_two_contact_structure() {
    let out = qcontact(&["verify", "--builtin", "two-contact-r4", "--suite", "structure"]);
    assert_eq!(out.status.code(), Some(0));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    for name in ["duality", "uniformity", "nondegeneracy", "reeb-kernel", "independence"] {
        assert!(report.checks.iter().any(|c| c.name == name && c.pass), "{name}");
    }
}

#[test]
fn verify_broken_fixture_names_the_failure() {
    let out = qcontact(&[
        "verify",
        "--config",
        &fixture("broken_structure.json"),
        "--suite",
        "structure",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["duality"]);
    assert_eq!(
        report.checks.iter().find(|c| c.name == "duality").unwrap().max_residual,
        1.0
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("duality"));
}

#[test]
fn verify_config_file_and_tolerance_env() {
    let out = qcontact(&["verify", "--config", &fixture("damped_oscillator.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = Command::new(env!("CARGO_BIN_EXE_qcontact"))
        .args([
            "verify",
            "--config",
            &fixture("broken_structure.json"),
            "--suite",
            "structure",
        ])
        .env("QCONTACT_TOL", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_qcontact"))
        .args(["verify", "--builtin", "e1", "--suite", "structure"])
        .env("QCONTACT_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn m_at_start(args: &[&str]) -> (Output, f64) {
    let out = qcontact(args);
    let (header, rows) = csv_rows(&out);
    let m = rows[0][column(&header, "M")];
    (out, m)
}

#[test]
fn pontryagin_closed_forms() {
    let (out, m) = m_at_start(&["pontryagin", "--builtin", "e1", "--t1", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((m - 2.0 * (-3.0f64).exp()).abs() < 1e-4, "{m}");
    assert!((m - 0.0996).abs() < 1e-4);

    let (out, m) = m_at_start(&["pontryagin", "--builtin", "rocket", "--t1", "60"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((m - 1.542).abs() < 1e-3, "{m}");
}

#[test]
fn pontryagin_without_action_dependence_keeps_unit_multipliers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plain.json");
    std::fs::write(
        &path,
        r#"{"kind":"lagrangian","n":1,"qcount":2,"expressions":{"lagrangian":"v1^2/2 - q1^2/2"},"initial":[1,0,0,0]}"#,
    )
    .unwrap();
    let out = qcontact(&["pontryagin", "--config", path.to_str().unwrap(), "--t1", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    for name in ["mu1", "mu2"] {
        let c = column(&header, name);
        assert!(rows.iter().all(|r| r[c] == 1.0));
    }
}

#[test]
fn coarse_curve_is_not_an_extremal() {
    let out = qcontact(&[
        "pontryagin",
        "--builtin",
        "e1",
        "--method",
        "rk4",
        "--step",
        "1",
        "--sample-interval",
        "1",
        "--t1",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pontryagin_rejects_structure_models() {
    assert_eq!(
        qcontact(&["pontryagin", "--builtin", "contact-r3"]).status.code(),
        Some(2)
    );
}

#[test]
fn parse_prints_the_tree() {
    let out = qcontact(&["parse", "-q1^2 + 2*v1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("-q1 ^ 2 + 2 * v1\n"));
    assert!(text.contains("Neg"));
}

#[test]
fn models_lists_the_registry() {
    let out = qcontact(&["models"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["contact-r3", "rocket", "free2contact"] {
        assert!(text.contains(name));
    }
}
