use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use wsregen_core::cli::bundled_design;
use wsregen_core::io::read_design_csv;

fn wsregen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsregen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn simulate_writes_artifacts_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str| {
        vec![
            "simulate",
            "--fixture",
            "two-state",
            "--a",
            "0.2",
            "--b",
            "0.3",
            "--n",
            "1000000",
            "--seed",
            "7",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([out.to_string()])
        .collect::<Vec<_>>()
    };
    for run in ["r1", "r2"] {
        let a = args(&p(&dir, run));
        let out = wsregen(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let r1 = dir.path().join("r1");
    for f in ["trace.csv", "tours.csv", "manifest.json"] {
        assert!(r1.join(f).exists(), "{f}");
    }
    assert_eq!(
        fs::read(r1.join("tours.csv")).unwrap(),
        fs::read(dir.path().join("r2/tours.csv")).unwrap()
    );
    let m = json_file(&r1.join("manifest.json"));
    assert_eq!(m["parameters"]["chain"]["a"], 0.2);
    assert_eq!(m["parameters"]["chain"]["b"], 0.3);
    assert_eq!(m["parameters"]["chain"]["fixture"], "two-state");
    assert_eq!(m["parameters"]["n"], 1_000_000);
    assert_eq!(m["parameters"]["seed"], 7);

    // estimate from the simulated files
    let out = wsregen(&[
        "estimate",
        "--tours",
        &p(&dir, "r1/tours.csv"),
        "--samples",
        &p(&dir, "r1/trace.csv"),
        "--nu",
        "0.6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let regen = v["regenerative"]["sigma_f"]["matrix"][0].as_f64().unwrap();
    let bm = v["batch_means"]["matrix"][0].as_f64().unwrap();
    assert!((regen - 0.72).abs() / 0.72 < 0.1, "{regen}");
    assert!((bm - 0.72).abs() / 0.72 < 0.1, "{bm}");
}

#[test]
fn missing_seed_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = wsregen(&["simulate", "--n", "100", "--out", &p(&dir, "x")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    assert_eq!(wsregen(&["probit-regen", "--steps", "1000"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"fixture": "two-state", "a": 0.4, "b": 0.6, "n": 2000, "seed": 3}"#,
    )
    .unwrap();
    let out_dir = p(&dir, "o");
    let out = wsregen(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--a",
        "0.1",
        "--out",
        &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = json_file(&dir.path().join("o/manifest.json"));
    assert_eq!(m["parameters"]["chain"]["a"], 0.1);
    assert_eq!(m["parameters"]["chain"]["b"], 0.6);
    assert_eq!(m["parameters"]["seed"], 3);

    fs::write(&cfg, r#"{"fixture": "two-state", "sede": 3}"#).unwrap();
    let out = wsregen(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_rates_and_schedule() {
    let out = wsregen(&["estimate", "--delta", "2", "--p", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["rates"]["beta"], 0.25);
    assert_eq!(v["rates"]["nu_lower"], 0.5);

    let out = wsregen(&["estimate", "--nu", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["schedule_check"]["part_a"], false);

    assert_eq!(wsregen(&["estimate", "--delta", "2"]).status.code(), Some(2));
}

#[test]
fn estimate_reports_parse_line() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("tours.csv");
    fs::write(&bad, "k,tau,z_1\n1,2,0.5\n2,3,oops\n").unwrap();
    let out = wsregen(&["estimate", "--tours", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn probit_regen_outputs_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("probit.json");
    fs::write(
        &cfg,
        r#"{"p_scan": 0.5, "steps": 4000, "seed": 5, "pilot_iters": 500, "quantile": 0.25}"#,
    )
    .unwrap();
    for run in ["a", "b"] {
        let out = wsregen(&[
            "probit-regen",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            &p(&dir, run),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(dir.path().join("a/summary.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/summary.json")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a/records.csv")).unwrap(),
        fs::read(dir.path().join("b/records.csv")).unwrap()
    );
    let s = json_file(&dir.path().join("a/summary.json"));
    assert_eq!(s["windows"], 1999);
    assert_eq!(s["clamped"], 0);
    let records = fs::read_to_string(dir.path().join("a/records.csv")).unwrap();
    assert!(records.starts_with("i,eta_i,bell\n"));

    let out = wsregen(&[
        "probit-regen",
        "--config",
        cfg.to_str().unwrap(),
        "--p-scan",
        "1",
        "--out",
        &p(&dir, "c"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = json_file(&dir.path().join("c/summary.json"));
    assert_eq!(s["regen_fraction"], 0.0);
    assert_eq!(s["residual_len"], 4000);
}

#[test]
fn probit_regen_rejects_rank_deficient_design() {
    let dir = TempDir::new().unwrap();
    let design = dir.path().join("design.csv");
    fs::write(&design, "x_1,x_2,y\n1,2,1\n2,4,0\n3,6,1\n").unwrap();
    let out = wsregen(&[
        "probit-regen",
        "--design",
        design.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        &p(&dir, "o"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn bundled_design_file_matches_generator() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/probit_n50_p2.csv");
    let (x, y) = read_design_csv(fs::File::open(path).unwrap()).unwrap();
    let (gx, gy) = bundled_design();
    assert_eq!((x.nrows(), x.ncols()), (50, 2));
    assert_eq!(x, gx);
    assert_eq!(y, gy);
}

#[test]
fn diagnose_fixture_passes() {
    let out = wsregen(&["diagnose", "--seed", "11", "--replications", "300", "--clt-n", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn diagnose_unsplit_is_inconclusive_not_failure() {
    let out = wsregen(&[
        "diagnose",
        "--fixture",
        "two-state-unsplit",
        "--seed",
        "1",
        "--n",
        "20000",
        "--replications",
        "200",
        "--clt-n",
        "5000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("regeneration_count_growth"));
    let v = stdout_json(&out);
    let growth = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "regeneration_count_growth")
        .unwrap();
    assert_eq!(growth["status"], "inconclusive");
}

#[test]
fn diagnose_corrupt_tours_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("tours.csv");
    fs::write(&bad, "k,tau,z_1\n1,2,0.5\n3,1,0.2\n").unwrap();
    let out = wsregen(&["diagnose", "--tours", bad.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
