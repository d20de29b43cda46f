use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gffi(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gffi"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GFFI_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn kernel_at_time_zero_is_packed_indicator() {
    let tmp = tempfile::tempdir().unwrap();
    let v = stdout_json(&gffi(
        &["kernel", "--n1", "1", "--a1", "-1/2", "--s1", "0", "--n2", "1", "--a2", "-1/2", "--s2", "0", "--t", "0"],
        tmp.path(),
    ));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let m = manifest(tmp.path());
    assert_eq!(m["command"], "kernel");
    assert_eq!(m["config"]["t"], 0.0);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"command": "omega", "nu": 0.5, "eta": 1.0, "tau": 2.0}"#).unwrap();
    let out = tmp.path().join("out");
    let o = gffi(&["omega", "--config", cfg.to_str().unwrap(), "--tau", "1"], &out);
    let v = stdout_json(&o);
    assert_eq!(v["point"]["tau"], 1.0);
    assert_eq!(manifest(&out)["config"]["nu"], 0.5);
}

#[test]
fn frozen_boundary_csv_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gffi(&["frozen-boundary", "--tau", "1"], tmp.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("frozen_boundary.csv")).unwrap();
    assert!(csv.starts_with("eta,tau,q1,q2\n"));
    assert!(!csv.contains('\r'));
    let row = csv.lines().find(|l| l.starts_with("1.0,1.0,")).expect("eta = tau = 1 row");
    let q2: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((q2 - 3.3302).abs() < 1e-4);
    assert!(fs::read_to_string(tmp.path().join("frozen_boundary.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn malformed_config_leaves_no_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"runs": "many"}"#).unwrap();
    let out = tmp.path().join("out");
    let o = gffi(&["simulate", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(!out.exists());
}

#[test]
fn numeric_domain_error_is_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = gffi(&["omega", "--nu", "9"], &out);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "domain");
    assert!(!out.exists());
}

#[test]
fn bad_thread_env_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gffi"))
        .args(["green", "--out"])
        .arg(tmp.path().join("o"))
        .env("GFFI_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--m",
        "6",
        "--t-end",
        "2",
        "--seed",
        "42",
        "--runs",
        "8",
        "--sample-time",
        "1",
        "--sample-time",
        "2",
        "--height-probe",
        "1,4",
        "--lozenge-probe",
        "2,3,II",
    ];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(gffi(&args, &a).status.success());
    assert!(gffi(&[&args[..], &["--threads", "1"]].concat(), &b).status.success());
    for f in ["observations.csv", "final_configuration.json", "tiling.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("observations.csv")).unwrap();
    assert!(csv.starts_with("trajectory_id,time,probe_id,value\n"));
    assert_eq!(csv.lines().count(), 1 + 8 * 2 * 2);
    assert_eq!(manifest(&a)["config_sha256"], manifest(&b)["config_sha256"]);
}

#[test]
fn packed_tiling_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(gffi(&["simulate", "--m", "4", "--t-end", "0"], tmp.path()).status.success());
    let got = fs::read_to_string(tmp.path().join("tiling.svg")).unwrap();
    let want = include_str!("snapshots/packed_m4_tiling.svg");
    assert_eq!(got, want);
}

#[test]
fn gff_verify_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["gff-verify", "--n", "12", "--runs", "400", "--seed", "7", "--probe", "0.3,0.5", "--probe", "0.6,0.5"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(gffi(&args, &a).status.success());
    assert!(gffi(&[&args[..], &["--threads", "3"]].concat(), &b).status.success());
    let csv = fs::read_to_string(a.join("gff_pairs.csv")).unwrap();
    assert!(csv.starts_with("nu1,eta1,nu2,eta2,cov_hat,se,prediction,zscore\n"));
    assert_eq!(csv, fs::read_to_string(b.join("gff_pairs.csv")).unwrap());
    assert_eq!(manifest(&a)["seed"], 7);
}

#[test]
fn green_direct_arguments() {
    let tmp = tempfile::tempdir().unwrap();
    let v = stdout_json(&gffi(&["green", "--z", "0,2", "--w", "0,3"], tmp.path()));
    assert!((v["green"].as_f64().unwrap() - 0.2026).abs() < 1e-4);
}

#[test]
fn accept_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let v = stdout_json(&gffi(&["accept", "--id", "1", "--id", "2", "--strict"], tmp.path()));
    assert_eq!(v["passed"], 2);
    assert!(tmp.path().join("acceptance.json").exists());
}

#[test]
fn saddle_compare_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let v = stdout_json(&gffi(&["saddle-compare", "--n-min", "40", "--n-max", "44"], tmp.path()));
    let r = v["rms_ratio"].as_f64().unwrap();
    assert!(r.is_finite() && r > 0.5 && r < 1.5, "{r}");
    assert!(tmp.path().join("saddle.csv").exists());
}
