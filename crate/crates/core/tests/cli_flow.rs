//! End-to-end batch flow through the real binary: build a vector, then run
//! the return and orbit-density experiments against the written file.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sector-fhc"))
}

fn write_config(dir: &Path, orbit_mode: Option<&str>) -> std::path::PathBuf {
    let vector = dir.join("vector.json");
    let config = serde_json::json!({
        "weight": "exp",
        "seed": 4,
        "construct": {
            "targets": [
                {"radius": 1.0, "value": 1.0},
                {"radius": 1.0, "value": 0.5}
            ],
            "horizon": 200.0
        },
        "orbit": {
            "vector": vector,
            "mode": orbit_mode.unwrap_or("verify-return"),
            "level": 1,
            "radius": 1.8,
            "horizons": [10.0, 20.0],
            "samples": 300,
            "sample_count": 8
        }
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn construct_then_orbit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), None);
    let out = dir.path().to_str().unwrap();

    let status = bin()
        .args(["construct", "--config"])
        .arg(&config)
        .args(["--out", out])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let vector_text = std::fs::read_to_string(dir.path().join("vector.json")).unwrap();
    let vector: serde_json::Value = serde_json::from_str(&vector_text).unwrap();
    assert!(vector["terms"].as_array().unwrap().len() > 10);
    assert!(vector["plan_digest"].as_str().unwrap().len() == 16);

    let status = bin()
        .args(["orbit", "--config"])
        .arg(&config)
        .args(["--out", out])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let orbit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("orbit.json")).unwrap())
            .unwrap();
    assert_eq!(orbit["mode"], "verify-return");
    assert!(orbit["report"]["worst_error"].as_f64().unwrap() <= orbit["report"]["bound"].as_f64().unwrap());

    let config_density = write_config(dir.path(), Some("orbit-density"));
    let status = bin()
        .args(["orbit", "--config"])
        .arg(&config_density)
        .args(["--out", out])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let orbit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("orbit.json")).unwrap())
            .unwrap();
    assert_eq!(orbit["mode"], "orbit-density");
    assert!(orbit["csv"].as_str().unwrap().starts_with("horizon,ratio,halfwidth"));
}

#[test]
fn construct_rejects_divergent_weight() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), None);
    let status = bin()
        .args(["construct", "--config"])
        .arg(&config)
        .args(["--weight", "chaouchi", "--out", dir.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn construct_rejects_empty_targets() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, br#"{"weight": "exp"}"#).unwrap();
    let status = bin()
        .args(["construct", "--config"])
        .arg(&config)
        .args(["--out", dir.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn orbit_horizon_beyond_truncation_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), Some("orbit-density"));
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        bin()
            .args(["construct", "--config"])
            .arg(&config)
            .args(["--out", out])
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    // Override pushes the largest density horizon past the truncation.
    let status = bin()
        .args(["orbit", "--config"])
        .arg(&config)
        .args(["--out", out, "--horizon", "5000"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
