//! End-to-end tests of the CLI against generated fixture files.

use handeye::motion::MotionSequence;
use handeye::se3::{conjugate_camera_motion, RigidMotion};
use nalgebra::{Rotation3, Unit, Vector3};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_handeye"))
}

fn rot(axis: [f64; 3], angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle)
}

fn hand_eye() -> RigidMotion {
    RigidMotion::new(rot([0.4, -0.1, 0.8], 1.2), Vector3::new(0.12, -0.05, 0.2))
}

fn write_fixture(dir: &Path, name: &str, robot: &[RigidMotion], lambda: f64) -> PathBuf {
    let x = hand_eye();
    let camera: Vec<RigidMotion> = robot.iter().map(|b| conjugate_camera_motion(&x, b)).collect();
    let seq = MotionSequence::strip_scale(&camera, robot, lambda).unwrap();
    let path = dir.join(name);
    let mut metadata = BTreeMap::new();
    metadata.insert("units".to_string(), "m".to_string());
    handeye::io::save_motions(&path, &seq, metadata).unwrap();
    path
}

fn general_motions() -> Vec<RigidMotion> {
    vec![
        RigidMotion::new(rot([0.0, 0.0, 1.0], 0.9), Vector3::new(0.4, -0.1, 0.2)),
        RigidMotion::new(rot([1.0, 0.0, 0.0], 0.6), Vector3::new(-0.2, 0.5, 0.1)),
        RigidMotion::new(rot([0.0, 1.0, 0.3], 1.1), Vector3::new(0.1, 0.2, -0.4)),
    ]
}

fn translation_motions() -> Vec<RigidMotion> {
    vec![
        RigidMotion::new(Rotation3::identity(), Vector3::new(0.5, 0.1, 0.0)),
        RigidMotion::new(Rotation3::identity(), Vector3::new(-0.1, 0.6, 0.2)),
        RigidMotion::new(Rotation3::identity(), Vector3::new(0.2, 0.0, 0.7)),
    ]
}

fn rotation_motions() -> Vec<RigidMotion> {
    vec![
        RigidMotion::new(rot([0.0, 0.0, 1.0], 0.8), Vector3::zeros()),
        RigidMotion::new(rot([1.0, 0.0, 0.0], 1.1), Vector3::zeros()),
    ]
}

fn planar_motions() -> Vec<RigidMotion> {
    vec![
        RigidMotion::new(rot([0.0, 0.0, 1.0], 0.9), Vector3::new(0.4, -0.2, 0.0)),
        RigidMotion::new(Rotation3::identity(), Vector3::new(1.0, 0.0, 0.5)),
    ]
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn calibrate_general_fixture_reports_full_solution() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "general.json", &general_motions(), 1.3);
    let result = dir.path().join("result.json");
    let out = bin()
        .args(["calibrate"])
        .arg(&input)
        .args(["--output"])
        .arg(&result)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("sequence class: General"), "{text}");
    assert!(text.contains("full calibration"), "{text}");
    assert!(text.contains("lambda: 1.3000000000"), "{text}");
    assert!(text.contains("units: m"), "{text}");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(json["solution"]["kind"], "full");
    assert_eq!(json["provenance"]["solver"], "auto");
    assert_eq!(json["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
    assert!((json["solution"]["scale"].as_f64().unwrap() - 1.3).abs() < 1e-9);
}

#[test]
fn calibrate_translations_with_forced_general_solver_fails_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "translations.json", &translation_motions(), 1.0);
    let out = bin()
        .args(["calibrate"])
        .arg(&input)
        .args(["--solver", "general"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("insufficient-motion"), "{}", stderr(&out));
}

#[test]
fn calibrate_planar_fixture_reports_axis() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "planar.json", &planar_motions(), 0.8);
    let out = bin().args(["calibrate"]).arg(&input).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("translation determined up to axis"), "{text}");
    assert!(text.contains("lambda: 0.8000000000"), "{text}");
}

#[test]
fn calibrate_rotations_fixture_reports_scaled_translation() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "rotations.json", &rotation_motions(), 1.0);
    let out = bin().args(["calibrate"]).arg(&input).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("translation determined up to scale"), "{text}");
    assert!(text.contains("t_X/lambda"), "{text}");
}

#[test]
fn classify_reports_classes_and_expected_kind() {
    let dir = tempfile::tempdir().unwrap();

    let input = write_fixture(dir.path(), "general.json", &general_motions(), 1.0);
    let out = bin().args(["classify"]).arg(&input).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("sequence: General"), "{text}");
    assert!(text.contains("expected solution kind: Full"), "{text}");

    let input = write_fixture(dir.path(), "rotations.json", &rotation_motions(), 1.0);
    let out = bin().args(["classify"]).arg(&input).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("sequence: PureRotation"), "{text}");
    assert!(text.contains("TranslationUpToScale"), "{text}");
}

#[test]
fn classify_degenerate_fixture_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(
        dir.path(),
        "degenerate.json",
        &[RigidMotion::identity(), RigidMotion::identity()],
        1.0,
    );
    let out = bin().args(["classify"]).arg(&input).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
    assert!(stdout(&out).contains("sequence: Degenerate"));
    assert!(stderr(&out).contains("degenerate-data"));
}

#[test]
fn malformed_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = bin().args(["calibrate"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("parse"));

    // Reflections are rejected with the pair named.
    let bad = serde_json::json!({
        "version": "1",
        "pairs": [{
            "camera": {"rotation": [1,0,0, 0,1,0, 0,0,-1], "direction": [1,0,0]},
            "robot": {"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0.5,0,0]}
        }]
    });
    std::fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
    let out = bin().args(["calibrate"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("pair 0"), "{}", stderr(&out));
}

#[test]
fn simulate_usage_errors_exit_2() {
    let out = bin()
        .args(["simulate", "--sweep", "noise", "--trials", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("usage"));
}

#[test]
fn simulate_noise_sweep_has_the_documented_shape() {
    let out = bin()
        .args([
            "simulate", "--sweep", "noise", "--seed", "7", "--trials", "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_value,method,rotation_error_median,rotation_error_mean,translation_error_median,translation_error_mean,lambda_error_median,failures"
    );
    // Default grid 0..0.2 step 0.02: 11 values, one row per method each.
    assert_eq!(lines.len(), 1 + 11 * 2);
    assert_eq!(text.matches(",pose,").count(), 11);
    assert_eq!(text.matches(",sfm,").count(), 11);
}

#[test]
fn simulate_motions_sweep_has_14_rows_per_method() {
    let out = bin()
        .args([
            "simulate", "--sweep", "motions", "--seed", "7", "--trials", "3", "--nu", "0.01",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 14 * 2);
    assert_eq!(text.matches(",pose,").count(), 14);
    assert_eq!(text.matches(",sfm,").count(), 14);
}

#[test]
fn simulate_zero_noise_single_trial_is_exact() {
    let out = bin()
        .args([
            "simulate", "--sweep", "noise", "--seed", "1", "--trials", "1", "--nu-max", "0.0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "0");
        for value in &fields[2..7] {
            let v: f64 = value.parse().unwrap();
            assert!(v < 1e-8, "expected exact recovery, got {line}");
        }
        assert_eq!(fields[7], "0");
    }
}

#[test]
fn config_file_is_honored_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        serde_json::json!({"seed": 9, "trials": 2, "nu_max": 0.02, "nu_step": 0.02}).to_string(),
    )
    .unwrap();

    // Config alone.
    let from_config = bin()
        .args(["simulate", "--sweep", "noise", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(from_config.status.success());
    let equivalent = bin()
        .args([
            "simulate", "--sweep", "noise", "--seed", "9", "--trials", "2", "--nu-max", "0.02",
            "--nu-step", "0.02",
        ])
        .output()
        .unwrap();
    assert_eq!(stdout(&from_config), stdout(&equivalent));

    // A flag overrides the config value.
    let overridden = bin()
        .args(["simulate", "--sweep", "noise", "--seed", "11", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let expected = bin()
        .args([
            "simulate", "--sweep", "noise", "--seed", "11", "--trials", "2", "--nu-max", "0.02",
            "--nu-step", "0.02",
        ])
        .output()
        .unwrap();
    assert_eq!(stdout(&overridden), stdout(&expected));
    assert_ne!(stdout(&overridden), stdout(&from_config));
}
