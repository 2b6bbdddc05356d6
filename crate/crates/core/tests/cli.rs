use std::path::Path;
use std::process::{Command, Output};

fn apsdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apsdet")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const DET_RATIO: &str = r#"{
  "model": {"type": "canonical", "l": 1, "positive_eigenvalues": [1.0]},
  "sigma1": {"type": "sigma_theta", "angles": [1.0471975511965976]},
  "sigma2": {"type": "sigma_theta", "angles": [0.5235987755982988]}
}"#;

#[test]
fn det_ratio_reports_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", DET_RATIO);
    let out = dir.path().join("r.json");
    let o = apsdet(&["det-ratio", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let v = rep["items"][0]["values"]["ratio"].as_f64().unwrap();
    assert!((v - 3.0).abs() < 1e-10);
    assert_eq!(rep["pass"], true);
}

#[test]
fn reruns_reproduce_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"cases": 5, "seed": 9}"#);
    let a = apsdet(&["identities", "--config", &cfg, "--format", "csv"]);
    let b = apsdet(&["identities", "--config", &cfg, "--format", "csv"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = apsdet(&["identities", "--config", &cfg, "--format", "csv", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bfk_kernel_only_passes_as_text() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "canonical", "l": 1}, "right": {"type": "sigma_theta", "angles": [0.7]}, "bulk_length": 2.0, "r": 1.0}"#,
    );
    let o = apsdet(&["bfk-check", "--config", &cfg, "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).trim_end().ends_with("PASS"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"model": {"type": "canonical", "l": 1}, "r": [1.0, 0.0], "right": {"type": "tau"}}"#);
    let o = apsdet(&["logdet", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r[1]"));
    assert_eq!(apsdet(&["validate", "--config", &bad]).status.code(), Some(2));

    let wrong_kind = write(dir.path(), "k.json", &DET_RATIO.replacen('{', r#"{"kind": "logdet","#, 1));
    assert_eq!(apsdet(&["det-ratio", "--config", &wrong_kind]).status.code(), Some(2));

    let singular = write(
        dir.path(),
        "s.json",
        r#"{"model": {"type": "canonical", "l": 1}, "sigma1": {"type": "tau"}, "sigma2": {"type": "sigma_theta", "angles": [0.5]}}"#,
    );
    assert_eq!(apsdet(&["det-ratio", "--config", &singular]).status.code(), Some(3));

    let strict = write(dir.path(), "t.json", &DET_RATIO.replacen('{', r#"{"tolerances": {"closed_form": 1e-300},"#, 1));
    assert_eq!(apsdet(&["det-ratio", "--config", &strict]).status.code(), Some(1));

    let ok = write(dir.path(), "ok.json", DET_RATIO);
    assert_eq!(apsdet(&["validate", "--config", &ok]).status.code(), Some(2), "validate needs a kind");
    let with_kind = write(dir.path(), "ok2.json", &DET_RATIO.replacen('{', r#"{"kind": "det-ratio","#, 1));
    assert_eq!(apsdet(&["validate", "--config", &with_kind]).status.code(), Some(0));
}

#[test]
fn adiabatic_sweep_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "canonical", "l": 2, "positive_eigenvalues": [0.5, 2.0]},
            "sigma1": {"type": "sigma_theta", "angles": [0.3, 1.2]},
            "sigma2": {"type": "sigma_theta", "angles": [0.8, 0.9]},
            "r": [0.5, 1, 2, 5]}"#,
    );
    let o = apsdet(&["adiabatic", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["items"].as_array().unwrap().len(), 4);
}

#[test]
fn shipped_configs_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let kind = serde_json::from_str::<serde_json::Value>(&text).unwrap()["kind"].as_str().unwrap().to_string();
        let p = path.to_str().unwrap();
        assert_eq!(apsdet(&["validate", "--config", p]).status.code(), Some(0), "{p}");
        let o = apsdet(&[&kind, "--config", p]);
        assert_eq!(o.status.code(), Some(0), "{p}: {}", String::from_utf8_lossy(&o.stdout));
        n += 1;
    }
    assert_eq!(n, 6);
}
