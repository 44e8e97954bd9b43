//! Linear hand-eye calibration from scaled camera motions.
//!
//! A camera rigidly mounted on a robot end-effector observes the world while
//! the robot moves. Each camera motion `A` and the corresponding end-effector
//! motion `B` are conjugated by the fixed hand-eye transformation `X`:
//! `A X = X B`. When the camera motions come from structure-from-motion
//! rather than pose estimation, their translations are only known up to a
//! single global scale factor `lambda`, which becomes an extra unknown.
//!
//! This crate vectorizes the rotation constraint with the Kronecker product
//! and solves the resulting homogeneous linear system. The formulation avoids
//! minimal rotation parameterizations, so it stays well-behaved for small
//! calibration motions, and it degrades gracefully on singular motion
//! classes: pure translations, pure rotations, and planar motions each admit
//! a partial calibration whose recoverable components are reported
//! explicitly through [`motion::SolutionKind`].
//!
//! Module map:
//! - [`linalg`]: row-major `vec`, Kronecker product, SVD null space, nearest
//!   rotation.
//! - [`se3`]: rotations, rigid motions, scaled motions, conversions.
//! - [`motion`]: calibration data model and motion-class taxonomy.
//! - [`solvers`]: system assembly and the per-class solvers.
//! - [`metrics`]: rotation/translation error measures and consistency
//!   diagnostics.
//! - [`sim`]: Monte-Carlo ground-truth generation, noise injection, and
//!   experiment sweeps.
//! - [`io`]: motion/result file formats and CSV emission for sweeps.
//!
//! # Example
//!
//! ```
//! use handeye::motion::{MotionSequence, SolutionKind};
//! use handeye::se3::{conjugate_camera_motion, RigidMotion};
//! use handeye::solvers::{solve_auto, SolveConfig};
//! use nalgebra::{Rotation3, Vector3};
//!
//! // Ground-truth hand-eye transform and reconstruction scale factor.
//! let x = RigidMotion::new(
//!     Rotation3::from_euler_angles(0.2, -0.4, 0.9),
//!     Vector3::new(0.1, -0.05, 0.2),
//! );
//! let lambda = 1.7;
//!
//! // Two robot motions with non-parallel rotation axes, and the camera
//! // motions they induce; the camera translations are stripped down to
//! // scale-free directions, as a reconstruction would deliver them.
//! let robot = [
//!     RigidMotion::new(
//!         Rotation3::from_euler_angles(0.0, 0.0, 0.8),
//!         Vector3::new(0.4, -0.1, 0.2),
//!     ),
//!     RigidMotion::new(
//!         Rotation3::from_euler_angles(0.7, 0.0, 0.0),
//!         Vector3::new(-0.2, 0.5, 0.1),
//!     ),
//! ];
//! let camera: Vec<RigidMotion> =
//!     robot.iter().map(|b| conjugate_camera_motion(&x, b)).collect();
//! let sequence = MotionSequence::strip_scale(&camera, &robot, lambda)?;
//!
//! let solution = solve_auto(&sequence, &SolveConfig::default())?;
//! assert_eq!(solution.kind, SolutionKind::Full);
//! assert!((solution.scale.unwrap() - lambda).abs() < 1e-9);
//! assert!((solution.translation.unwrap() - x.translation).norm() < 1e-9);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod io;
pub mod linalg;
pub mod metrics;
pub mod motion;
pub mod se3;
pub mod sim;
pub mod solvers;

pub use motion::{
    classify_pair, classify_sequence, expected_solution_kind, ClassifyTolerances, MotionClass,
    MotionPair, MotionSequence, SolutionKind,
};
pub use se3::{AxisAngle, RigidMotion, ScaledMotion};
pub use solvers::{
    assemble, solve_auto, solve_general, solve_planar, solve_rotation_nullspace, solve_rotations,
    solve_translations, solve_translations_closed_form, solve_translations_two, HandEyeSolution,
    SolveConfig, SolveError,
};
