//! Calibration data model: paired camera/robot motion sequences, scale
//! handling, and motion-class detection.
//!
//! Classification runs on the **robot** motions, which come from joint
//! encoders and are exact, never on the noisy camera estimates. Rotation
//! axes are compared as lines (up to sign), since two rotations about `n`
//! and `-n` constrain the hand-eye problem identically.

use crate::se3::{rotation_to_axis_angle, RigidMotion, ScaledMotion};
use nalgebra::{UnitVector3, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("motion sequence is empty")]
    Empty,
    #[error("operation needs at least {needed} motion pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("non-finite value in motion pair {pair}")]
    NonFinite { pair: usize },
    #[error("degenerate motion sequence carries no calibration information")]
    NoInformation,
}

/// One corresponding (camera, robot) motion: the camera side is known up to
/// the global scale factor, the robot side exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPair {
    pub camera: ScaledMotion,
    pub robot: RigidMotion,
}

impl MotionPair {
    pub fn new(camera: ScaledMotion, robot: RigidMotion) -> Self {
        Self { camera, robot }
    }
}

/// Which pair, if any, anchors the scale convention `||u_A|| = 1`.
///
/// When camera motions come from a reconstruction, the first motion with a
/// non-zero translation is conventionally rescaled to a unit direction and
/// the scale factor becomes the norm of that first translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleConvention {
    pub anchor: Option<usize>,
}

/// An ordered list of motion pairs sharing one global scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pairs: Vec<MotionPair>,
    scale: ScaleConvention,
}

impl MotionSequence {
    /// Wraps raw pairs, recording whether the data follow the unit-anchor
    /// convention (first non-zero camera direction has unit norm).
    pub fn new(pairs: Vec<MotionPair>) -> Result<Self, MotionError> {
        if pairs.is_empty() {
            return Err(MotionError::Empty);
        }
        for (i, p) in pairs.iter().enumerate() {
            let finite = p.camera.direction.iter().all(|x| x.is_finite())
                && p.robot.translation.iter().all(|x| x.is_finite())
                && p.camera.rotation.matrix().iter().all(|x| x.is_finite())
                && p.robot.rotation.matrix().iter().all(|x| x.is_finite());
            if !finite {
                return Err(MotionError::NonFinite { pair: i });
            }
        }
        let anchor = pairs
            .iter()
            .position(|p| p.camera.direction.norm() > 0.0)
            .filter(|&i| (pairs[i].camera.direction.norm() - 1.0).abs() <= 1e-9);
        Ok(Self {
            pairs,
            scale: ScaleConvention { anchor },
        })
    }

    /// Builds a sequence from exact camera and robot motions by stripping a
    /// known scale factor from the camera translations: `u_i = t_Ai / lambda`.
    pub fn strip_scale(
        camera: &[RigidMotion],
        robot: &[RigidMotion],
        lambda: f64,
    ) -> Result<Self, MotionError> {
        assert_eq!(camera.len(), robot.len(), "paired inputs must align");
        assert!(lambda > 0.0, "scale factor must be positive");
        let pairs = camera
            .iter()
            .zip(robot)
            .map(|(a, b)| {
                MotionPair::new(ScaledMotion::new(a.rotation, a.translation / lambda), *b)
            })
            .collect();
        Self::new(pairs)
    }

    /// Builds a sequence the way a reconstruction pipeline would: the first
    /// camera motion with non-zero translation anchors `||u|| = 1` and the
    /// returned scale factor is that translation's norm. When every camera
    /// translation is zero the directions stay zero and the scale is 1.
    pub fn from_rigid_pairs(
        camera: &[RigidMotion],
        robot: &[RigidMotion],
    ) -> Result<(Self, f64), MotionError> {
        assert_eq!(camera.len(), robot.len(), "paired inputs must align");
        let lambda = camera
            .iter()
            .map(|a| a.translation.norm())
            .find(|&n| n > 0.0)
            .unwrap_or(1.0);
        let seq = Self::strip_scale(camera, robot, lambda)?;
        Ok((seq, lambda))
    }

    pub fn pairs(&self) -> &[MotionPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn scale_convention(&self) -> ScaleConvention {
        self.scale
    }

    /// Largest robot translation norm, the reference for relative
    /// translation tolerances.
    pub fn max_robot_translation(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.robot.translation.norm())
            .fold(0.0, f64::max)
    }
}

/// Motion class of a pair or sequence, following the two-motion taxonomy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionClass {
    PureTranslation,
    PureRotation,
    /// All rotation-bearing motions share this robot rotation axis.
    Planar(UnitVector3<f64>),
    General,
    Degenerate,
}

/// Which components of `(R_X, t_X, lambda)` a motion class determines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolutionKind {
    /// Rotation, translation, and scale all recovered.
    Full,
    /// Rotation recovered; translation known only as `t_X / lambda`.
    TranslationUpToScale,
    /// Rotation and scale recovered; translation determined only up to an
    /// unknown offset along this camera-frame axis.
    TranslationUpToAxis(UnitVector3<f64>),
    /// Rotation and scale recovered; translation unobservable.
    RotationAndScaleOnly,
}

/// Thresholds for motion classification. The translation threshold is
/// relative to the largest robot translation in the sequence under scrutiny.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyTolerances {
    /// Rotations with angle at or below this count as identity (radians).
    pub angle: f64,
    /// Translations at or below `trans_rel * scale` count as zero.
    pub trans_rel: f64,
    /// Two rotation axes within this angle (as lines) count as parallel
    /// (radians).
    pub axis: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            angle: 1e-6,
            trans_rel: 1e-6,
            axis: 1e-4,
        }
    }
}

/// Angle between two axes treated as lines (sign-insensitive), in `[0, pi/2]`.
fn axis_line_angle(a: &UnitVector3<f64>, b: &UnitVector3<f64>) -> f64 {
    a.dot(b).abs().clamp(0.0, 1.0).acos()
}

/// Classifies a single pair given the translation scale of its sequence.
///
/// `trans_scale` is typically [`MotionSequence::max_robot_translation`]; the
/// pair's own translation norm is a sensible fallback for isolated pairs.
pub fn classify_pair(p: &MotionPair, tol: &ClassifyTolerances, trans_scale: f64) -> MotionClass {
    let aa = rotation_to_axis_angle(&p.robot.rotation);
    let has_rotation = aa.angle > tol.angle;
    let has_translation = p.robot.translation.norm() > tol.trans_rel * trans_scale;
    match (has_rotation, has_translation) {
        (false, true) => MotionClass::PureTranslation,
        (true, false) => MotionClass::PureRotation,
        (false, false) => MotionClass::Degenerate,
        (true, true) => MotionClass::General,
    }
}

/// Classifies a whole sequence. Degenerate pairs (identity motions) carry no
/// information and are ignored when combining the rest.
pub fn classify_sequence(
    s: &MotionSequence,
    tol: &ClassifyTolerances,
) -> Result<MotionClass, MotionError> {
    if s.is_empty() {
        return Err(MotionError::Empty);
    }
    if s.len() < 2 {
        return Err(MotionError::TooFewPairs {
            needed: 2,
            got: s.len(),
        });
    }
    let trans_scale = s.max_robot_translation();

    let mut any_translation = false;
    let mut rotation_axes: Vec<UnitVector3<f64>> = Vec::new();
    for p in s.pairs() {
        match classify_pair(p, tol, trans_scale) {
            MotionClass::Degenerate => {}
            MotionClass::PureTranslation => any_translation = true,
            MotionClass::PureRotation => {
                rotation_axes.push(rotation_to_axis_angle(&p.robot.rotation).axis)
            }
            MotionClass::General => {
                any_translation = true;
                rotation_axes.push(rotation_to_axis_angle(&p.robot.rotation).axis);
            }
            MotionClass::Planar(_) => unreachable!("pairs are never classified planar"),
        }
    }

    if rotation_axes.is_empty() && !any_translation {
        return Ok(MotionClass::Degenerate);
    }
    if rotation_axes.is_empty() {
        return Ok(MotionClass::PureTranslation);
    }

    let axes_parallel = rotation_axes
        .iter()
        .skip(1)
        .all(|a| axis_line_angle(a, &rotation_axes[0]) <= tol.axis);

    if axes_parallel {
        if any_translation {
            // Common rotation axis plus translations: the planar-motion
            // machinery applies (the translations need not lie in the plane).
            Ok(MotionClass::Planar(common_axis(s, tol)))
        } else {
            Ok(MotionClass::PureRotation)
        }
    } else if any_translation {
        Ok(MotionClass::General)
    } else {
        Ok(MotionClass::PureRotation)
    }
}

/// Canonical common robot rotation axis of a (planar) sequence: the axis of
/// the rotation-bearing pair with the largest angle, which is the most
/// stable one to extract.
fn common_axis(s: &MotionSequence, tol: &ClassifyTolerances) -> UnitVector3<f64> {
    reference_rotation_pair(s, tol)
        .map(|i| rotation_to_axis_angle(&s.pairs()[i].robot.rotation).axis)
        .unwrap_or_else(Vector3::x_axis)
}

/// Index of the rotation-bearing pair with the largest robot rotation angle.
pub(crate) fn reference_rotation_pair(
    s: &MotionSequence,
    tol: &ClassifyTolerances,
) -> Option<usize> {
    s.pairs()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let angle = rotation_to_axis_angle(&p.robot.rotation).angle;
            (angle > tol.angle).then_some((i, angle))
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite angles"))
        .map(|(i, _)| i)
}

/// Maps a classified sequence onto the components its class determines.
///
/// For planar sequences the undetermined axis is the **camera** rotation
/// axis, extracted from the camera rotation of the reference pair (camera
/// rotations are recovered exactly by reconstruction, only translations are
/// scaled).
pub fn expected_solution_kind(
    c: &MotionClass,
    s: &MotionSequence,
) -> Result<SolutionKind, MotionError> {
    match c {
        MotionClass::Degenerate => Err(MotionError::NoInformation),
        MotionClass::PureTranslation => Ok(SolutionKind::RotationAndScaleOnly),
        MotionClass::PureRotation => Ok(SolutionKind::TranslationUpToScale),
        MotionClass::General => Ok(SolutionKind::Full),
        MotionClass::Planar(_) => {
            let tol = ClassifyTolerances::default();
            let idx = reference_rotation_pair(s, &tol).ok_or(MotionError::NoInformation)?;
            let n_a = rotation_to_axis_angle(&s.pairs()[idx].camera.rotation).axis;
            Ok(SolutionKind::TranslationUpToAxis(n_a))
        }
    }
}
