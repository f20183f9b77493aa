use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn capfilm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capfilm"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CAPFILM_OUT")
        .output()
        .expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn cap_writes_a_self_consistent_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = capfilm(&["cap", "--delta", "0.1", "--eps", "0.01", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j = read_json(&dir.path().join("o/cap.json"));
    assert_eq!(j["schema"], 1);
    assert_eq!(j["command"], "cap");
    let cap = &j["result"]["cap"];
    for key in ["lambda", "theta", "z_C", "R"] {
        assert!(num(&cap[key]).is_finite(), "{key}");
    }
    assert!(num(&j["result"]["volume_residual"]) <= 1e-11);
    let lambda = num(&cap["lambda"]);
    assert!((lambda * num(&cap["R"]) - 2.0).abs() < 1e-9);
    assert!(dir.path().join("o/cap.csv").exists());
}

#[test]
fn foliate_cap_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = capfilm(
        &["foliate", "--delta", "0.1", "--eps-grid", "1e-4:0.05:8", "--solver", "cap", "--out", "f"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j = read_json(&dir.path().join("f/sweep.json"));
    let r = &j["result"];
    for key in ["ordering_ok", "symmetry_ok", "curvature_bound_ok", "convergence_ok"] {
        assert_eq!(r[key]["ok"], true, "{key}");
    }
    assert_eq!(r["records"].as_array().unwrap().len(), 8);
    let csv = std::fs::read_to_string(dir.path().join("f/leaves.csv")).unwrap();
    let mut eps: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    eps.dedup();
    assert_eq!(eps.len(), 8);
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = capfilm(&["cap", "--delta", "0.7", "--eps", "0.01"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONFIG_INVALID"));
    let out = capfilm(&["foliate", "--eps-grid", "0.1:0.01:3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = capfilm(&["cap", "--eps", "nan"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_volume_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = capfilm(&["cap", "--delta", "0.1", "--eps", "10", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SOLVER_FAILED"));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"delta": 0.1, "eps": 0.01, "out": "from-file"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_capfilm"));
        c.args(["--config", cfg, "cap"]).args(extra).current_dir(dir.path());
        match env {
            Some(e) => c.env("CAPFILM_OUT", e),
            None => c.env_remove("CAPFILM_OUT"),
        };
        assert!(c.status().unwrap().success());
    };
    run(&[], None);
    assert!(dir.path().join("from-file/cap.json").exists());
    run(&[], Some("from-env"));
    assert!(dir.path().join("from-env/cap.json").exists());
    run(&["--out", "from-flag"], Some("from-env2"));
    assert!(dir.path().join("from-flag/cap.json").exists());
    assert!(!dir.path().join("from-env2").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"delta": 0.1, "eps": 0.01}"#).unwrap();
    let out = capfilm(&["--config", "run.json", "cap", "--eps", "0.02", "--out", "o"], dir.path());
    assert!(out.status.success());
    let j = read_json(&dir.path().join("o/cap.json"));
    assert_eq!(num(&j["config"]["delta"]), 0.1);
    assert_eq!(num(&j["config"]["eps"]), 0.02);

    std::fs::write(dir.path().join("bad.json"), r#"{"delta": 0.1, "nonsense": 1}"#).unwrap();
    let out = capfilm(&["--config", "bad.json", "cap"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    // same relative output path so the echoed config matches too
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = capfilm(
            &[
                "mesh", "--wire", "ellipse:1.3,0.8", "--delta", "0.05", "--eps", "0.02", "--target-edge", "0.025",
                "--out", "o",
            ],
            d.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["mesh.json", "mesh_upper.obj", "mesh_lower.obj"] {
        let a = std::fs::read(dirs[0].path().join("o").join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join("o").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn quick_verify_passes_within_a_minute() {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let out = capfilm(&["verify", "--quick", "--out", "v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(t.elapsed().as_secs_f64() < 60.0);
    let j = read_json(&dir.path().join("v/verify.json"));
    assert_eq!(j["result"]["passed"], true);
    assert_eq!(j["result"]["within_time_budget"], true);
}
