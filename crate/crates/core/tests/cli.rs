use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stationary-light"))
}

fn write_config(dir: &Path, v: &Value) -> std::path::PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn small_dynamics() -> Value {
    json!({
        "mode": "dynamics",
        "medium": {"optical_depth_dimless": 50.0, "g2n_dimless": 1e4},
        "schedule": {"stages": [
            {"name": "write", "duration_dimless": 40.0, "omega_plus_dimless": 10.0},
            {"name": "release", "duration_dimless": 80.0, "omega_plus_dimless": 10.0}
        ]},
        "input": {"t0_dimless": 10.0, "sigma_t_dimless": 2.0},
        "grid": {"nz": 101},
        "output": {"stem": "small"}
    })
}

#[test]
fn dynamics_run_writes_listed_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_dynamics());
    let out = dir.path().join("out");
    let st = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("small_manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(
        files,
        ["small_trajectory.csv", "small_stages.csv", "small_snapshots.csv", "small_manifest.json"]
    );
    for f in files {
        assert!(out.join(f).is_file());
    }
    let traj = std::fs::read_to_string(out.join("small_trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,tau,stage,flux_fwd,flux_bwd,spin_norm,centroid,width,intensity_total\n"));
    assert_eq!(manifest["mode"], "dynamics");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_dynamics();
    v["medium"]["optical_depth_dimless"] = json!(-1.0);
    let cfg = write_config(dir.path(), &v);
    let out = dir.path().join("out");
    let st = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("medium.optical_depth_dimless"));
}

#[test]
fn missing_config_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .arg("--config")
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(4));
}

#[test]
fn numerical_failure_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_dynamics();
    // A fixed step above the stability bound of the fine grid.
    v["grid"] = json!({"nz": 4001, "dt_dimless": 0.05});
    let cfg = write_config(dir.path(), &v);
    let out = dir.path().join("out");
    let st = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(3), "{}", String::from_utf8_lossy(&st.stderr));
    let left: Vec<_> = std::fs::read_dir(&out).map(|d| d.collect()).unwrap_or_default();
    assert!(left.is_empty());
}

#[test]
fn no_config_and_no_preset_is_rejected() {
    let st = bin().output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn preset_with_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({"spectrum": {"n_detunings": 11}, "output": {"stem": "short"}}),
    );
    let st = bin()
        .args(["--preset", "fig2c", "--threads", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let csv = std::fs::read_to_string(dir.path().join("short_spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert_eq!(csv.lines().next().unwrap(), "delta_Hz,T,R,A,T_bd_off");
}
