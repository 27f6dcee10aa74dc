use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_halanay-cert"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&output.stdout).into_owned() + &String::from_utf8_lossy(&output.stderr);
    (output.status.code().expect("exit code"), text)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const CONSTANT: &str = r#"
seed = 3

[system.scalar]
a = "2"
b = "1"
tau_max = 1.0

[certify]
eta = 1.0
N = 1
horizon = 40.0

[simulate]
T = 10.0
h = 0.01
histories = ["random:2:1.0", [0.5]]
"#;

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["certify"], &fixture("sawtooth_delay.toml"), dir.path()).0, 0);
    assert_eq!(run(&["certify"], &fixture("classical.toml"), dir.path()).0, 0);
    assert_eq!(run(&["certify"], &fixture("unstable.toml"), dir.path()).0, 1);
}

#[test]
fn two_window_horizon_is_too_short() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "short.toml",
        &CONSTANT.replace("horizon = 40.0", "horizon = 4.0"),
    );
    let (code, text) = run(&["certify"], &cfg, dir.path());
    assert_eq!(code, 4, "{text}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        "unknown.toml",
        &format!("{CONSTANT}\n[outputs]\nformat = [\"csv\"]\n"),
    );
    assert_eq!(run(&["certify"], &unknown, dir.path()).0, 2);
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["certify"], &missing, dir.path()).0, 2);
    let bad_expr = write_config(dir.path(), "expr.toml", &CONSTANT.replace("a = \"2\"", "a = \"2 +\""));
    assert_eq!(run(&["certify"], &bad_expr, dir.path()).0, 2);
    let no_sim = write_config(dir.path(), "nosim.toml", CONSTANT.split("[simulate]").next().unwrap());
    assert_eq!(run(&["simulate"], &no_sim, dir.path()).0, 2);
    // periodic needs a network with a period
    assert_eq!(run(&["periodic"], &fixture("classical.toml"), dir.path()).0, 2);
    let one = write_config(
        dir.path(),
        "one.toml",
        &CONSTANT.replace("[\"random:2:1.0\", [0.5]]", "[[0.5]]"),
    );
    assert_eq!(run(&["sync"], &one, dir.path()).0, 2);
    let cfg = write_config(dir.path(), "ok.toml", CONSTANT);
    let output = Command::new(env!("CARGO_BIN_EXE_halanay-cert"))
        .args(["simulate", "--tolerance", "-1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bound_violation_is_an_evaluation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bound.toml",
        &CONSTANT.replace("tau_max = 1.0", "tau_max = 1.0\nM_a = 1.5"),
    );
    let (code, text) = run(&["certify"], &cfg, dir.path());
    assert_eq!(code, 3, "{text}");
}

#[test]
fn overflow_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
        [system.scalar]
        a = "-100"
        b = "0"
        M_a = 1.0
        M_b = 1.0
        tau_max = 1.0

        [simulate]
        T = 20.0
        h = 0.01
        histories = [[1.0]]
    "#;
    let cfg = write_config(dir.path(), "blowup.toml", body);
    let (code, text) = run(&["simulate"], &cfg, dir.path());
    assert_eq!(code, 5, "{text}");
}

#[test]
fn measure_table_and_footer() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&["measure"], &fixture("sawtooth_delay.toml"), dir.path());
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("measure.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let (footer, windows) = rows.split_last().unwrap();
    assert_eq!(windows.len(), 20);
    for w in windows {
        let mu_eta: f64 = w[2].parse().unwrap();
        assert!((mu_eta - 0.5).abs() < 1e-6, "mu_eta = {mu_eta}");
    }
    assert_eq!(footer[0], "total");
    let span: f64 = footer[1].parse().unwrap();
    let parts: f64 = footer[3..6].iter().map(|v| v.parse::<f64>().unwrap()).sum();
    assert_eq!(span, 40.0);
    assert!((parts - span).abs() < 1e-9, "{parts} vs {span}");
}

#[test]
fn constant_margin_has_no_unstable_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONSTANT);
    assert_eq!(run(&["measure"], &cfg, dir.path()).0, 0);
    let report = json(&dir.path().join("measure.json"));
    for w in report["windows"].as_array().unwrap() {
        assert_eq!(w["mu_minus"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn certificate_json_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(&["certify"], &fixture("sawtooth_delay.toml"), dir.path());
    assert_eq!(code, 0);
    assert!(text.contains("verdict: certified"));
    let cert = json(&dir.path().join("certificate.json"));
    for key in [
        "eta",
        "t0",
        "N",
        "tau_max",
        "M_a",
        "M_b",
        "delta",
        "windows",
        "C_star_est",
        "verdict",
        "epsilon",
        "C",
        "lambda0",
        "alpha",
        "K",
    ] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
    for key in ["k", "mu_eta", "mu_minus", "mu_plus", "ratio"] {
        assert!(cert["windows"][0].get(key).is_some(), "window missing {key}");
    }
    assert_eq!(cert["verdict"], "certified");
    assert!((cert["C_star_est"].as_f64().unwrap() - 0.0355).abs() < 5e-4);
    assert!((cert["stated"]["ratio"].as_f64().unwrap() - 0.0711).abs() < 5e-4);
    assert_eq!(cert["stated"]["below_half_eta"], true);
}

#[test]
fn refuted_certificate_serializes_infinite_ratio() {
    let dir = tempfile::tempdir().unwrap();
    run(&["certify"], &fixture("unstable.toml"), dir.path());
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["verdict"], "refuted");
    assert_eq!(cert["C_star_est"], "inf");
    assert!(cert["alpha"].is_null());
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONSTANT);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(run(&["simulate"], &cfg, &a).0, 0);
    assert_eq!(run(&["simulate"], &cfg, &b).0, 0);
    for f in ["trajectory_1.csv", "trajectory_2.csv", "trajectory_3.csv", "m0_1.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let output = Command::new(env!("CARGO_BIN_EXE_halanay-cert"))
        .args(["simulate", "--seed", "4", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&c)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_ne!(
        fs::read(a.join("trajectory_1.csv")).unwrap(),
        fs::read(c.join("trajectory_1.csv")).unwrap()
    );
    // constant histories do not depend on the seed
    assert_eq!(
        fs::read(a.join("trajectory_3.csv")).unwrap(),
        fs::read(c.join("trajectory_3.csv")).unwrap()
    );
}

#[test]
fn simulate_reports_oracles_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONSTANT);
    assert_eq!(run(&["simulate"], &cfg, dir.path()).0, 0);
    let csv = fs::read_to_string(dir.path().join("trajectory_1.csv")).unwrap();
    assert!(csv.starts_with("t,x1\n0,"));
    assert_eq!(csv.lines().count(), 1 + 1001);
    assert!(fs::read_to_string(dir.path().join("m0_1.csv"))
        .unwrap()
        .starts_with("t,value\n"));
    let svg = fs::read_to_string(dir.path().join("trajectory_1.svg")).unwrap();
    assert!(svg.contains("width=\"800\"") && svg.contains("height=\"500\"") && svg.contains("<polyline"));
    let report = json(&dir.path().join("simulate.json"));
    assert_eq!(report["passed"], true);
    let oracles = report["runs"][0]["oracles"].as_array().unwrap();
    let names: Vec<&str> = oracles.iter().map(|o| o["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "lemma1",
            "lemma2",
            "lemma3",
            "lemma4",
            "theorem1_envelope",
            "decay_rate"
        ]
    );
    for o in oracles {
        for key in ["name", "checks", "violations", "tolerance", "passed"] {
            assert!(o.get(key).is_some(), "oracle missing {key}");
        }
    }
}

#[test]
fn formats_restrict_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{CONSTANT}\n[outputs]\nformats = [\"json\"]\n"),
    );
    let out = dir.path().join("o");
    assert_eq!(run(&["simulate"], &cfg, &out).0, 0);
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["simulate.json"]);
}

#[test]
fn sync_of_unstable_pair_does_not_decay() {
    let dir = tempfile::tempdir().unwrap();
    run(&["sync"], &fixture("unstable.toml"), dir.path());
    let report = json(&dir.path().join("sync.json"));
    assert!(report["pairs"][0]["z_final"].as_f64().unwrap() > 1e-3);
    let z = fs::read_to_string(dir.path().join("z_1_2.csv")).unwrap();
    assert!(z.starts_with("t,value\n"));
}

#[test]
fn periodic_writes_residual_and_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(&["periodic"], &fixture("ring3.toml"), dir.path());
    assert_eq!(code, 0, "{text}");
    let report = json(&dir.path().join("periodic.json"));
    assert_eq!(report["check"]["verdict"], true);
    assert_eq!(report["check"]["lhs"].as_f64().unwrap(), 0.0);
    let orbit = fs::read_to_string(dir.path().join("orbit_1.csv")).unwrap();
    assert!(orbit.starts_with("t,x1,x2,x3\n0,"));
    // one period of samples at h = 1e-3
    assert_eq!(orbit.lines().count(), 1 + 2001);
    assert!(dir.path().join("v_1.csv").exists());
}
