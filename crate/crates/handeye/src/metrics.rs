//! Error measures and consistency diagnostics.
//!
//! The orientation error is the **squared** Euclidean distance between
//! canonical unit quaternions, minimized over the double cover:
//! `min(||q1 - q2||^2, ||q1 + q2||^2) = 2 - 2 |<q1, q2>|`. For a residual
//! rotation of angle `alpha` this equals `2 - 2 cos(alpha / 2)` exactly,
//! which is strictly increasing in `alpha`; the double-cover minimization
//! restricts `alpha` to `[0, pi]`, so values lie in `[0, 2]`. (Without the
//! squaring the `2 - 2 cos(alpha / 2)` identity would only hold for the
//! squared norm, and without the sign minimization two representations of
//! the same rotation could measure as far apart as 4.)

use crate::linalg;
use crate::motion::{MotionSequence, SolutionKind};
use crate::se3::{rotation_to_quaternion, RigidMotion};
use crate::solvers::HandEyeSolution;
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("relative translation error is undefined for a zero ground-truth vector")]
    ZeroTruthTranslation,
    #[error("consistency check needs a full solution, got {0:?}")]
    UnsupportedKind(SolutionKind),
    #[error("cannot average an empty list of transforms")]
    EmptyAverage,
    #[error("rotation averaging hit a singular mean matrix")]
    SingularMean,
}

/// Squared quaternion distance minimized over the double cover, in `[0, 2]`.
pub fn quaternion_error(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let dot = a.coords.dot(&b.coords);
    (2.0 - 2.0 * dot.abs()).max(0.0)
}

/// Orientation error between two rotations: `2 - 2 cos(alpha / 2)` where
/// `alpha` in `[0, pi]` is the residual rotation angle.
pub fn rotation_error(estimated: &Rotation3<f64>, truth: &Rotation3<f64>) -> f64 {
    quaternion_error(
        &rotation_to_quaternion(estimated),
        &rotation_to_quaternion(truth),
    )
}

/// Relative translation error `||t_est - t_true|| / ||t_true||`.
pub fn translation_error(
    estimated: &Vector3<f64>,
    truth: &Vector3<f64>,
) -> Result<f64, MetricError> {
    let denom = truth.norm();
    if denom == 0.0 {
        return Err(MetricError::ZeroTruthTranslation);
    }
    Ok((estimated - truth).norm() / denom)
}

/// Errors of a solution against ground truth. Translation and scale entries
/// are present only when the solution kind determines them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub rotation_error: f64,
    pub translation_rel_error: Option<f64>,
    pub lambda_rel_error: Option<f64>,
}

/// Compares a solution against the true hand-eye transform and scale,
/// interpreting the translation field according to the solution kind:
/// full solutions compare `t_X` directly, up-to-scale solutions compare
/// against `t_X / lambda`, and up-to-axis solutions measure only the error
/// component orthogonal to the undetermined axis (relative to `||t_X||`).
pub fn solution_errors(
    sol: &HandEyeSolution,
    truth: &RigidMotion,
    truth_lambda: f64,
) -> ErrorReport {
    let rotation = rotation_error(&sol.rotation, &truth.rotation);
    let lambda_rel_error = sol
        .scale
        .map(|l| (l - truth_lambda).abs() / truth_lambda.abs());
    let translation_rel_error = match (sol.kind, sol.translation) {
        (SolutionKind::Full, Some(t)) => translation_error(&t, &truth.translation).ok(),
        (SolutionKind::TranslationUpToScale, Some(t)) => {
            translation_error(&t, &(truth.translation / truth_lambda)).ok()
        }
        (SolutionKind::TranslationUpToAxis(axis), Some(t)) => {
            let diff = t - truth.translation;
            let off_axis = diff - diff.dot(&axis) * axis.into_inner();
            let denom = truth.translation.norm();
            (denom > 0.0).then(|| off_axis.norm() / denom)
        }
        _ => None,
    };
    ErrorReport {
        rotation_error: rotation,
        translation_rel_error,
        lambda_rel_error,
    }
}

/// Per-pair residuals of `A_i X = X B_i` at a full solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResidual {
    pub rotation: f64,
    pub translation: f64,
}

/// RMS consistency of a full solution with the motion data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rms_rotation: f64,
    pub rms_translation: f64,
    pub per_pair: Vec<PairResidual>,
}

/// Compares `A_i X` and `X B_i` for every pair. The rotation residual uses
/// the quaternion metric on `R_Ai R_X` vs `R_X R_Bi`; the translation
/// residual is `||R_Ai t_X + lambda u_Ai - R_X t_Bi - t_X||`, normalized by
/// the camera translation magnitude `lambda ||u_Ai||` when that is non-zero
/// and taken absolutely otherwise.
pub fn consistency(
    s: &MotionSequence,
    sol: &HandEyeSolution,
) -> Result<ConsistencyReport, MetricError> {
    if sol.kind != SolutionKind::Full {
        return Err(MetricError::UnsupportedKind(sol.kind));
    }
    let t_x = sol.translation.expect("full solutions carry a translation");
    let lambda = sol.scale.expect("full solutions carry a scale");
    let r_x = sol.rotation;

    let per_pair: Vec<PairResidual> = s
        .pairs()
        .iter()
        .map(|p| {
            let rot_lhs = p.camera.rotation * r_x;
            let rot_rhs = r_x * p.robot.rotation;
            let rotation = rotation_error(&rot_lhs, &rot_rhs);

            let residual = p.camera.rotation * t_x + lambda * p.camera.direction
                - r_x * p.robot.translation
                - t_x;
            let denom = lambda * p.camera.direction.norm();
            let translation = if denom >= 1e-12 {
                residual.norm() / denom
            } else {
                residual.norm()
            };
            PairResidual {
                rotation,
                translation,
            }
        })
        .collect();

    let rms = |f: fn(&PairResidual) -> f64| {
        (per_pair.iter().map(|r| f(r) * f(r)).sum::<f64>() / per_pair.len() as f64).sqrt()
    };
    Ok(ConsistencyReport {
        rms_rotation: rms(|r| r.rotation),
        rms_translation: rms(|r| r.translation),
        per_pair,
    })
}

/// Componentwise-mean translation and the nearest rotation to the mean
/// rotation matrix. A plain plumbing-level average for combining repeated
/// estimates.
pub fn mean_rigid_transform(estimates: &[RigidMotion]) -> Result<RigidMotion, MetricError> {
    if estimates.is_empty() {
        return Err(MetricError::EmptyAverage);
    }
    let n = estimates.len() as f64;
    let translation = estimates
        .iter()
        .map(|m| m.translation)
        .sum::<Vector3<f64>>()
        / n;
    let mean_rotation = estimates
        .iter()
        .map(|m| *m.rotation.matrix())
        .sum::<Matrix3<f64>>()
        / n;
    let rotation =
        linalg::nearest_rotation(&mean_rotation).map_err(|_| MetricError::SingularMean)?;
    Ok(RigidMotion::new(rotation, translation))
}
