use std::path::Path;
use std::process::{Command, Output};

fn uobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uobs")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn presets_listing() {
    let o = uobs(&["presets"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    for name in ["copenhagen-baseline", "unitary-D0.1", "probed-Λ4.6", "conditional-extension", "decoherence-profile", "error-asymmetric"] {
        assert!(s.contains(name), "{name}");
    }
    let o = uobs(&["presets", "--show", "unitary-D0.1"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("engine = \"unitary\""));
}

#[test]
fn run_writes_both_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = |d: &str| dir.path().join(d).to_str().unwrap().to_string();
    for d in ["a", "b"] {
        let o = uobs(&["run", "--preset", "unitary-D0.1", "--seed", "7", "--out-dir", &out(d)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["campaign"]["n_total"], 1600);
    assert!(std::fs::read_to_string(dir.path().join("a/report.txt")).unwrap().contains("closed form"));
}

#[test]
fn structured_output_on_stdout() {
    let o = uobs(&["run", "--preset", "copenhagen-baseline", "--format", "structured"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["closed_form"], 0.5);
    assert!(v.get("elapsed_secs").is_none());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "engine = \"unitary\"\nn_trials = 10\n[observer]\nd = 2.0\n");
    let o = uobs(&["run", "--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("observer.d"));

    let typo = write(dir.path(), "typo.toml", "engine = \"unitary\"\nn_trials = 10\n[observer]\nd = 0.1\nreset = true\n");
    let o = uobs(&["run", "--config", &typo]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("observer.reset"));

    assert_eq!(code(&uobs(&["run", "--preset", "nope"])), 2);
    assert_eq!(code(&uobs(&["run"])), 2);
    assert_eq!(code(&uobs(&["sweep", "--preset", "unitary-D0.1", "--param", "colour", "--values", "1"])), 2);
    assert_eq!(code(&uobs(&["frobnicate"])), 2);
    assert_eq!(code(&uobs(&["recoil", "--f", "1.5"])), 2);
}

#[test]
fn sweep_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", "engine = \"unitary\"\nn_trials = 400\nseed = 1\n[observer]\nd = 0.1\n");
    let out = dir.path().join("out");
    let o = uobs(&["sweep", "--config", &cfg, "--param", "d", "--values", "0,0.05,0.1,0.2", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep_d.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("value,closed_form,expected_s,required_trials"));
    let req: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(req, ["", "1600", "400", "100"]);

    let o = uobs(&["sweep", "--config", &cfg, "--param", "d", "--range", "0:0.2:3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
}

#[test]
fn recoil_reports_formula_value() {
    let o = uobs(&["recoil", "--format", "structured"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let vel = v["result"]["velocity"].as_f64().unwrap();
    assert!((vel - 0.0106).abs() < 2e-4, "{vel}");
    let o = uobs(&["recoil", "--f", "1"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("momentum   0.0000e0"));
}
