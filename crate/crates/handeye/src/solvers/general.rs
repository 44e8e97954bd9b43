//! General-motion solver: the two-step route.
//!
//! Step one estimates the rotation from the null space of the stacked
//! rotation blocks, which keeps the estimate orthogonal by construction.
//! Step two solves the stacked `3n x 4` system
//! `(I3 - R_Ai | -u_Ai) (t_X; lambda) = -R_X t_Bi` by least squares. Two
//! motions with non-parallel rotation axes make it full rank.

use super::{
    assemble, expect_class, near_pi_pairs, rotation_from_nullspace, svd_solve, HandEyeSolution,
    SolveConfig, SolveDiagnostics, SolveError,
};
use crate::motion::{MotionClass, MotionSequence, SolutionKind};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

pub fn solve_general(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<HandEyeSolution, SolveError> {
    expect_class(
        s,
        cfg,
        |c| matches!(c, MotionClass::General),
        "general motions",
    )?;

    let rot = rotation_from_nullspace(s, cfg)?;
    let r_x = rot.rotation;

    let n = s.len();
    let mut m = DMatrix::zeros(3 * n, 4);
    let mut rhs = DVector::zeros(3 * n);
    for (i, p) in s.pairs().iter().enumerate() {
        let block = Matrix3::identity() - p.camera.rotation.matrix();
        m.view_mut((3 * i, 0), (3, 3)).copy_from(&block);
        m.view_mut((3 * i, 3), (3, 1))
            .copy_from(&(-p.camera.direction));
        rhs.rows_mut(3 * i, 3)
            .copy_from(&(-(r_x * p.robot.translation)));
    }

    let svd_check = m.clone().svd(false, false);
    let sigma_max = svd_check.singular_values.max();
    let sigma_min = svd_check.singular_values.min();
    if sigma_min <= cfg.rank_tol * sigma_max {
        return Err(SolveError::DegenerateTranslation(
            "translation/scale system is rank deficient".into(),
        ));
    }
    let (z, condition) = svd_solve(&m, &rhs, cfg.rank_tol)?;

    let mut t_x = Vector3::new(z[0], z[1], z[2]);
    let mut lambda = z[3];
    // The reconstruction scale is positive by convention; a negative
    // least-squares sign means the direction vectors were stored negated,
    // which flips (t_X, lambda) jointly.
    if lambda < 0.0 {
        t_x = -t_x;
        lambda = -lambda;
    }

    let residual = assemble(s).residual(&r_x, &t_x, lambda);

    Ok(HandEyeSolution {
        rotation: r_x,
        translation: Some(t_x),
        scale: Some(lambda),
        kind: SolutionKind::Full,
        residuals: SolveDiagnostics {
            rotation_singular_values: rot.singular_values,
            null_space_gap: Some(rot.gap),
            translation_condition: Some(condition),
            near_pi_pairs: near_pi_pairs(s, cfg.near_pi_margin),
            assembled_residual: Some(residual),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::sequence_from_truth;
    use super::*;
    use crate::metrics::rotation_error;
    use crate::se3::RigidMotion;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};

    fn rot(axis: [f64; 3], angle: f64) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle)
    }

    fn x_truth() -> RigidMotion {
        RigidMotion::new(rot([0.25, -0.6, 1.0], 1.05), Vector3::new(0.09, 0.17, -0.06))
    }

    #[test]
    fn noise_free_recovery_is_exact() {
        let x = x_truth();
        let lambda = 1.45;
        let robot = [
            RigidMotion::new(rot([0.0, 0.0, 1.0], 0.9), Vector3::new(0.4, -0.1, 0.2)),
            RigidMotion::new(rot([1.0, 0.0, 0.0], 0.6), Vector3::new(-0.2, 0.5, 0.1)),
        ];
        let s = sequence_from_truth(&x, &robot, lambda);
        let sol = solve_general(&s, &SolveConfig::default()).unwrap();

        assert!(rotation_error(&sol.rotation, &x.rotation) < 1e-9);
        assert_relative_eq!(sol.translation.unwrap(), x.translation, epsilon = 1e-9);
        assert_relative_eq!(sol.scale.unwrap(), lambda, epsilon = 1e-9);
        assert_eq!(sol.kind, SolutionKind::Full);
        assert!(sol.residuals.assembled_residual.unwrap() < 1e-10);
    }

    #[test]
    fn unit_scale_input_recovers_lambda_one() {
        // Camera motions taken at true scale (pose-style input).
        let x = x_truth();
        let robot = [
            RigidMotion::new(rot([0.3, 0.0, 1.0], 1.2), Vector3::new(0.1, 0.3, -0.4)),
            RigidMotion::new(rot([1.0, 0.4, 0.0], 0.7), Vector3::new(0.6, -0.1, 0.2)),
            RigidMotion::new(rot([0.0, 1.0, 0.2], 1.6), Vector3::new(-0.3, 0.2, 0.5)),
        ];
        let s = sequence_from_truth(&x, &robot, 1.0);
        let sol = solve_general(&s, &SolveConfig::default()).unwrap();
        assert_relative_eq!(sol.scale.unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn scaling_directions_rescales_lambda_only() {
        // Multiplying every u_Ai by s divides the recovered scale by s and
        // leaves rotation and translation unchanged.
        let x = x_truth();
        let robot = [
            RigidMotion::new(rot([0.0, 0.2, 1.0], 0.8), Vector3::new(0.4, -0.1, 0.2)),
            RigidMotion::new(rot([1.0, 0.0, 0.3], 0.5), Vector3::new(-0.2, 0.5, 0.1)),
        ];
        let cfg = SolveConfig::default();
        let base = sequence_from_truth(&x, &robot, 1.0);
        let scaled = sequence_from_truth(&x, &robot, 2.5);
        let sol_base = solve_general(&base, &cfg).unwrap();
        let sol_scaled = solve_general(&scaled, &cfg).unwrap();

        assert!(rotation_error(&sol_base.rotation, &sol_scaled.rotation) < 1e-12);
        assert_relative_eq!(
            sol_base.translation.unwrap(),
            sol_scaled.translation.unwrap(),
            epsilon = 1e-9
        );
        assert_relative_eq!(
            sol_scaled.scale.unwrap(),
            sol_base.scale.unwrap() * 2.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn translation_only_input_is_refused() {
        let x = x_truth();
        let robot = [
            RigidMotion::new(Rotation3::identity(), Vector3::new(0.5, 0.0, 0.0)),
            RigidMotion::new(Rotation3::identity(), Vector3::new(0.0, 0.4, 0.0)),
        ];
        let s = sequence_from_truth(&x, &robot, 1.0);
        assert!(matches!(
            solve_general(&s, &SolveConfig::default()),
            Err(SolveError::WrongMotionClass { .. })
        ));
    }
}
