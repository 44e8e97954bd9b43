//! Rotations, rigid motions, scaled motions, and conversions.
//!
//! Conventions fixed here and used everywhere else:
//! - RPY angles compose as `R = Rz(yaw) * Ry(pitch) * Rx(roll)` (intrinsic
//!   Z-Y-X). Noise injection decomposes and rebuilds rotations in this same
//!   convention.
//! - Axis/angle uses `angle` in `[0, pi]`; the identity rotation reports the
//!   conventional axis `(1, 0, 0)`.
//! - Canonical quaternions have a non-negative scalar part. The `angle = pi`
//!   case goes through the quaternion route, which has no `sin(angle)`
//!   division.

use nalgebra::{Matrix3, Matrix4, Quaternion, Rotation3, Unit, UnitQuaternion, UnitVector3, Vector3};

/// A rigid motion `(R, t)`: rotation plus translation, in the length unit of
/// the input data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidMotion {
    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vector3::zeros())
    }

    /// Homogeneous-matrix product: `self` applied after `other`.
    ///
    /// `rotation = R1 R2`, `translation = R1 t2 + t1`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    /// Inverse motion `(R^T, -R^T t)`.
    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation.inverse();
        RigidMotion::new(rt, -(rt * self.translation))
    }

    /// The motion as a 4x4 homogeneous matrix.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }
}

/// A camera motion known up to the global reconstruction scale: rotation plus
/// a direction vector `u` such that the true translation is `lambda * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMotion {
    pub rotation: Rotation3<f64>,
    pub direction: Vector3<f64>,
}

impl ScaledMotion {
    pub fn new(rotation: Rotation3<f64>, direction: Vector3<f64>) -> Self {
        Self {
            rotation,
            direction,
        }
    }
}

/// Rotation as a unit axis and an angle in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: UnitVector3<f64>,
    pub angle: f64,
}

/// Builds `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rpy_to_rotation(roll: f64, pitch: f64, yaw: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), yaw)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), pitch)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), roll)
}

/// Recovers `(roll, pitch, yaw)` such that [`rpy_to_rotation`] rebuilds `r`.
///
/// At the `pitch = ±pi/2` gimbal singularity one of the infinitely many
/// decompositions is returned.
pub fn rotation_to_rpy(r: &Rotation3<f64>) -> (f64, f64, f64) {
    r.euler_angles()
}

/// Canonical unit quaternion (scalar part `w >= 0`) of a rotation.
pub fn rotation_to_quaternion(r: &Rotation3<f64>) -> UnitQuaternion<f64> {
    let q = UnitQuaternion::from_rotation_matrix(r);
    if q.scalar() < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

pub fn quaternion_to_rotation(q: &UnitQuaternion<f64>) -> Rotation3<f64> {
    q.to_rotation_matrix()
}

/// Axis/angle of a rotation with `angle` in `[0, pi]`.
///
/// Goes through the canonical quaternion, so `angle = pi` is handled without
/// hitting the `sin(angle)` singularity of the matrix logarithm. The identity
/// rotation reports axis `(1, 0, 0)` by convention.
pub fn rotation_to_axis_angle(r: &Rotation3<f64>) -> AxisAngle {
    let q = rotation_to_quaternion(r);
    let v = q.imag();
    let s = v.norm();
    if s < 1e-14 {
        AxisAngle {
            axis: Vector3::x_axis(),
            angle: 0.0,
        }
    } else {
        AxisAngle {
            axis: Unit::new_normalize(v),
            angle: 2.0 * s.atan2(q.scalar()),
        }
    }
}

/// Rotation angle of `r` in `[0, pi]`.
pub fn rotation_angle(r: &Rotation3<f64>) -> f64 {
    rotation_to_axis_angle(r).angle
}

/// The camera motion conjugate to a robot motion: `A = X B X^-1`, so that
/// `A X = X B` holds exactly.
pub fn conjugate_camera_motion(x: &RigidMotion, b: &RigidMotion) -> RigidMotion {
    x.compose(b).compose(&x.inverse())
}

/// Frobenius deviation of a raw 3x3 matrix from orthogonality,
/// `|| M^T M - I ||_F`.
pub fn orthogonality_deviation(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).norm()
}

/// Canonical quaternion from scalar-first components, normalized.
pub fn quaternion_from_wxyz(w: f64, x: f64, y: f64, z: f64) -> UnitQuaternion<f64> {
    let q = UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z));
    if q.scalar() < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}
