//! File formats: motion files, result files, and sweep CSVs.
//!
//! Motion data and results are stored as versioned JSON. Rotations are
//! serialized as 9 row-major reals rather than quaternions, matching the
//! matrix-first formulation and avoiding convention mismatches with external
//! tools. JSON numbers round-trip `f64` exactly, so save/load is lossless.

use crate::linalg;
use crate::motion::{MotionPair, MotionSequence, SolutionKind};
use crate::se3::{orthogonality_deviation, RigidMotion, ScaledMotion};
use crate::sim::SweepTable;
use crate::solvers::{HandEyeSolution, SolveDiagnostics};
use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

/// Format version accepted by this build.
pub const MOTION_FILE_VERSION: &str = "1";

/// Orthogonality deviation below which a stored rotation is silently
/// re-orthogonalized.
const ROTATION_SILENT_TOL: f64 = 1e-6;
/// Deviation above which a stored rotation is rejected outright.
const ROTATION_REJECT_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported motion file version {found:?} (expected {MOTION_FILE_VERSION:?})")]
    Version { found: String },
    #[error("pair {pair} ({side}): {reason}")]
    Validation {
        pair: usize,
        side: &'static str,
        reason: String,
    },
    #[error("motion file contains no pairs")]
    Empty,
}

/// On-disk motion record: rotation as 9 row-major reals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraMotionRecord {
    pub rotation: [f64; 9],
    pub direction: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotMotionRecord {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotionPairRecord {
    pub camera: CameraMotionRecord,
    pub robot: RobotMotionRecord,
}

/// The motion file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotionFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub pairs: Vec<MotionPairRecord>,
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Validates and re-orthogonalizes a stored rotation.
fn rotation_from_record(
    raw: &[f64; 9],
    pair: usize,
    side: &'static str,
) -> Result<Rotation3<f64>, IoError> {
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(IoError::Validation {
            pair,
            side,
            reason: "rotation has non-finite entries".into(),
        });
    }
    let m = Matrix3::from_row_slice(raw);
    let det = m.determinant();
    if det <= 0.0 {
        return Err(IoError::Validation {
            pair,
            side,
            reason: format!("rotation determinant is {det:.6}, expected +1"),
        });
    }
    let deviation = orthogonality_deviation(&m);
    if deviation > ROTATION_REJECT_TOL {
        return Err(IoError::Validation {
            pair,
            side,
            reason: format!(
                "matrix deviates from orthogonality by {deviation:.2e} (limit {ROTATION_REJECT_TOL:.0e})"
            ),
        });
    }
    if deviation > ROTATION_SILENT_TOL {
        log::warn!(
            "pair {pair} ({side}): rotation deviates from orthogonality by {deviation:.2e}; projecting onto SO(3)"
        );
    }
    // Matrices that are orthogonal to machine precision are kept bit-exact,
    // so a save/load roundtrip is lossless.
    if deviation < 1e-12 {
        return Ok(Rotation3::from_matrix_unchecked(m));
    }
    linalg::nearest_rotation(&m).map_err(|e| IoError::Validation {
        pair,
        side,
        reason: e.to_string(),
    })
}

fn finite_vec3(raw: &[f64; 3], pair: usize, side: &'static str) -> Result<Vector3<f64>, IoError> {
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(IoError::Validation {
            pair,
            side,
            reason: "vector has non-finite entries".into(),
        });
    }
    Ok(Vector3::from(*raw))
}

/// Converts a parsed motion file into a validated sequence.
pub fn motion_file_to_sequence(file: &MotionFile) -> Result<MotionSequence, IoError> {
    if file.version != MOTION_FILE_VERSION {
        return Err(IoError::Version {
            found: file.version.clone(),
        });
    }
    if file.pairs.is_empty() {
        return Err(IoError::Empty);
    }
    let mut pairs = Vec::with_capacity(file.pairs.len());
    for (i, rec) in file.pairs.iter().enumerate() {
        let camera = ScaledMotion::new(
            rotation_from_record(&rec.camera.rotation, i, "camera")?,
            finite_vec3(&rec.camera.direction, i, "camera")?,
        );
        let robot = RigidMotion::new(
            rotation_from_record(&rec.robot.rotation, i, "robot")?,
            finite_vec3(&rec.robot.translation, i, "robot")?,
        );
        pairs.push(MotionPair::new(camera, robot));
    }
    MotionSequence::new(pairs).map_err(|_| IoError::Empty)
}

pub fn sequence_to_motion_file(
    s: &MotionSequence,
    metadata: BTreeMap<String, String>,
) -> MotionFile {
    MotionFile {
        version: MOTION_FILE_VERSION.to_string(),
        metadata,
        pairs: s
            .pairs()
            .iter()
            .map(|p| MotionPairRecord {
                camera: CameraMotionRecord {
                    rotation: row_major(p.camera.rotation.matrix()),
                    direction: vec3(&p.camera.direction),
                },
                robot: RobotMotionRecord {
                    rotation: row_major(p.robot.rotation.matrix()),
                    translation: vec3(&p.robot.translation),
                },
            })
            .collect(),
    }
}

pub fn read_motion_file(path: &Path) -> Result<MotionFile, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads and validates a motion file.
pub fn load_motions(path: &Path) -> Result<MotionSequence, IoError> {
    motion_file_to_sequence(&read_motion_file(path)?)
}

pub fn save_motions(
    path: &Path,
    s: &MotionSequence,
    metadata: BTreeMap<String, String>,
) -> Result<(), IoError> {
    let file = sequence_to_motion_file(s, metadata);
    let text = serde_json::to_string_pretty(&file).expect("schema serializes");
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Solution serialization. `kind` fixes which optional fields are present:
/// `translation_up_to_axis` carries `axis`; `full` and
/// `translation_up_to_axis` carry `translation`; every kind except
/// `translation_up_to_scale` carries `scale`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub kind: String,
    pub rotation: [f64; 9],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub rotation_singular_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_space_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation_condition: Option<f64>,
    pub near_pi_pairs: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assembled_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub input_path: String,
    pub input_sha256: String,
    pub solver: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub version: String,
    pub solution: SolutionRecord,
    pub diagnostics: DiagnosticsRecord,
    pub provenance: Provenance,
}

pub fn solution_kind_name(kind: &SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Full => "full",
        SolutionKind::TranslationUpToScale => "translation_up_to_scale",
        SolutionKind::TranslationUpToAxis(_) => "translation_up_to_axis",
        SolutionKind::RotationAndScaleOnly => "rotation_and_scale_only",
    }
}

pub fn solution_to_record(sol: &HandEyeSolution) -> SolutionRecord {
    let axis = match sol.kind {
        SolutionKind::TranslationUpToAxis(a) => Some(vec3(&a.into_inner())),
        _ => None,
    };
    SolutionRecord {
        kind: solution_kind_name(&sol.kind).to_string(),
        rotation: row_major(sol.rotation.matrix()),
        translation: sol.translation.map(|t| vec3(&t)),
        axis,
        scale: sol.scale,
    }
}

pub fn diagnostics_to_record(d: &SolveDiagnostics) -> DiagnosticsRecord {
    DiagnosticsRecord {
        rotation_singular_values: d.rotation_singular_values.clone(),
        null_space_gap: d.null_space_gap,
        translation_condition: d.translation_condition,
        near_pi_pairs: d.near_pi_pairs.clone(),
        assembled_residual: d.assembled_residual,
    }
}

/// SHA-256 of a file's bytes, hex-encoded, for result provenance.
pub fn file_sha256(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("writing to a string");
    }
    Ok(hex)
}

pub fn save_result(path: &Path, result: &ResultFile) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(result).expect("schema serializes");
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Renders a sweep table as CSV. Column order and header are fixed; floats
/// use Rust's shortest round-trip formatting, so identical tables give
/// byte-identical output.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(
        "sweep_value,method,rotation_error_median,rotation_error_mean,translation_error_median,translation_error_mean,lambda_error_median,failures\n",
    );
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.sweep_value,
            row.method.as_str(),
            row.rotation_error_median,
            row.rotation_error_mean,
            row.translation_error_median,
            row.translation_error_mean,
            row.lambda_error_median,
            row.failures
        )
        .expect("writing to a string");
    }
    out
}

pub fn save_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), IoError> {
    fs::write(path, sweep_csv(table)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::conjugate_camera_motion;
    use crate::sim::{Method, SweepRow};
    use nalgebra::Unit;

    fn rot(axis: [f64; 3], angle: f64) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle)
    }

    fn sample_sequence() -> MotionSequence {
        let x = RigidMotion::new(rot([0.4, 0.3, -0.9], 1.0), Vector3::new(0.1, 0.2, 0.3));
        let robot = [
            RigidMotion::new(rot([0.0, 0.0, 1.0], 0.9), Vector3::new(0.4, -0.1, 0.2)),
            RigidMotion::new(rot([1.0, 0.0, 0.0], 0.6), Vector3::new(-0.2, 0.5, 0.1)),
        ];
        let camera: Vec<RigidMotion> = robot
            .iter()
            .map(|b| conjugate_camera_motion(&x, b))
            .collect();
        MotionSequence::from_rigid_pairs(&camera, &robot).unwrap().0
    }

    #[test]
    fn save_load_roundtrip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("motions.json");
        let s = sample_sequence();
        let mut metadata = BTreeMap::new();
        metadata.insert("units".to_string(), "m".to_string());
        save_motions(&path, &s, metadata).unwrap();
        let loaded = load_motions(&path).unwrap();
        assert_eq!(loaded.len(), s.len());
        for (a, b) in loaded.pairs().iter().zip(s.pairs()) {
            assert_eq!(a.camera.direction, b.camera.direction);
            assert_eq!(a.robot.translation, b.robot.translation);
            assert_eq!(a.robot.rotation.matrix(), b.robot.rotation.matrix());
            assert_eq!(a.camera.rotation.matrix(), b.camera.rotation.matrix());
        }
    }

    #[test]
    fn single_pair_file_loads() {
        let file = MotionFile {
            version: "1".into(),
            metadata: BTreeMap::new(),
            pairs: vec![MotionPairRecord {
                camera: CameraMotionRecord {
                    rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    direction: [1.0, 0.0, 0.0],
                },
                robot: RobotMotionRecord {
                    rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    translation: [0.5, 0.0, 0.0],
                },
            }],
        };
        let s = motion_file_to_sequence(&file).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn reflection_is_rejected_with_pair_index() {
        let mut file = MotionFile {
            version: "1".into(),
            metadata: BTreeMap::new(),
            pairs: vec![MotionPairRecord {
                camera: CameraMotionRecord {
                    rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
                    direction: [1.0, 0.0, 0.0],
                },
                robot: RobotMotionRecord {
                    rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    translation: [0.5, 0.0, 0.0],
                },
            }],
        };
        match motion_file_to_sequence(&file) {
            Err(IoError::Validation { pair: 0, side: "camera", .. }) => {}
            other => panic!("expected camera validation error, got {other:?}"),
        }
        file.pairs[0].camera.rotation = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        file.pairs[0].robot.rotation[8] = f64::NAN;
        assert!(matches!(
            motion_file_to_sequence(&file),
            Err(IoError::Validation { pair: 0, side: "robot", .. })
        ));
    }

    #[test]
    fn near_orthogonal_rotations_are_projected() {
        let mut rotation = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        rotation[1] = 1e-7; // within the silent tolerance
        let file = MotionFile {
            version: "1".into(),
            metadata: BTreeMap::new(),
            pairs: vec![MotionPairRecord {
                camera: CameraMotionRecord {
                    rotation,
                    direction: [1.0, 0.0, 0.0],
                },
                robot: RobotMotionRecord {
                    rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                    translation: [0.5, 0.0, 0.0],
                },
            }],
        };
        let s = motion_file_to_sequence(&file).unwrap();
        let m = s.pairs()[0].camera.rotation.matrix().clone_owned();
        assert!(orthogonality_deviation(&m) < 1e-14);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let file = MotionFile {
            version: "0".into(),
            metadata: BTreeMap::new(),
            pairs: vec![],
        };
        assert!(matches!(
            motion_file_to_sequence(&file),
            Err(IoError::Version { .. })
        ));
    }

    #[test]
    fn csv_layout_is_fixed() {
        let table = SweepTable {
            rows: vec![SweepRow {
                sweep_value: 0.02,
                method: Method::Pose,
                rotation_error_median: 1e-3,
                rotation_error_mean: 2e-3,
                translation_error_median: 0.5,
                translation_error_mean: 0.25,
                lambda_error_median: 0.125,
                failures: 1,
            }],
        };
        let csv = sweep_csv(&table);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sweep_value,method,rotation_error_median,rotation_error_mean,translation_error_median,translation_error_mean,lambda_error_median,failures"
        );
        assert_eq!(lines.next().unwrap(), "0.02,pose,0.001,0.002,0.5,0.25,0.125,1");
        assert_eq!(lines.next(), None);
    }
}
