//! Planar-motion solver.
//!
//! All rotation-bearing motions share one robot axis `n_b` (camera axis
//! `n_a = R_X n_b`). The rotation and scale are recovered from one
//! translation constraint `R_X t = lambda u` plus the axis constraint; the
//! translation source is either a pure-translation pair or, when both
//! motions rotate, the virtual translation
//! `t' = (I - R_B2) t_B1 - (I - R_B1) t_B2` with camera counterpart
//! `u' = (I - R_A2) u_A1 - (I - R_A1) u_A2`.
//!
//! Since `(I - R_Ai)` annihilates `n_a` for every motion in the class, the
//! component of `t_X` along `n_a` never enters the equations: the
//! translation is only determined up to that axis, and the reported value is
//! the minimum-norm representative `t_perp`.

use super::{
    expect_class, near_pi_pairs, svd_solve, svd_solve_truncated, HandEyeSolution, SolveConfig,
    SolveDiagnostics, SolveError,
};
use crate::linalg;
use crate::motion::{MotionClass, MotionSequence, SolutionKind};
use crate::se3::rotation_to_axis_angle;
use nalgebra::{DMatrix, DVector, Matrix3, Unit, UnitVector3, Vector3};

/// The translation constraint feeding the planar solve: robot-side vector
/// and its (scaled) camera counterpart.
struct TranslationConstraint {
    t_b: Vector3<f64>,
    u_a: Vector3<f64>,
}

pub fn solve_planar(s: &MotionSequence, cfg: &SolveConfig) -> Result<HandEyeSolution, SolveError> {
    expect_class(s, cfg, |c| matches!(c, MotionClass::Planar(_)), "planar motions")?;

    let trans_scale = s.max_robot_translation();
    let trans_threshold = cfg.classify.trans_rel * trans_scale;

    // Rotation-bearing pairs and pure-translation pairs.
    let mut rot_pairs: Vec<usize> = Vec::new();
    let mut trans_pairs: Vec<usize> = Vec::new();
    for (i, p) in s.pairs().iter().enumerate() {
        let angle = rotation_to_axis_angle(&p.robot.rotation).angle;
        if angle > cfg.classify.angle {
            rot_pairs.push(i);
        } else if p.robot.translation.norm() > trans_threshold {
            trans_pairs.push(i);
        }
    }
    let reference = *rot_pairs
        .iter()
        .max_by(|&&a, &&b| {
            let aa = rotation_to_axis_angle(&s.pairs()[a].robot.rotation).angle;
            let ab = rotation_to_axis_angle(&s.pairs()[b].robot.rotation).angle;
            aa.partial_cmp(&ab).expect("finite angles")
        })
        .expect("planar class implies a rotation-bearing pair");
    let n_b = rotation_to_axis_angle(&s.pairs()[reference].robot.rotation).axis;
    let n_a = rotation_to_axis_angle(&s.pairs()[reference].camera.rotation).axis;

    let constraint = pick_translation_constraint(s, &rot_pairs, &trans_pairs, &n_b)?;

    // Scale from norm preservation on the chosen constraint.
    let u_norm = constraint.u_a.norm();
    if u_norm <= 1e-12 * constraint.t_b.norm().max(1.0) {
        return Err(SolveError::Numerical(
            "camera counterpart of the translation constraint vanishes".into(),
        ));
    }
    let lambda = constraint.t_b.norm() / u_norm;

    // Rotation from the full-rank 9x9 system built on (t, n_b, t x n_b).
    let (rotation, n_a, condition) = solve_planar_rotation(&constraint, &n_b, &n_a, lambda, cfg)?;

    // Minimum-norm translation from the stacked rank-2 system
    // (I3 - R_Ai) t_X = lambda u_Ai - R_X t_Bi over rotation-bearing pairs.
    let mut m = DMatrix::zeros(3 * rot_pairs.len(), 3);
    let mut rhs = DVector::zeros(3 * rot_pairs.len());
    for (k, &i) in rot_pairs.iter().enumerate() {
        let p = &s.pairs()[i];
        let block = Matrix3::identity() - p.camera.rotation.matrix();
        m.view_mut((3 * k, 0), (3, 3)).copy_from(&block);
        rhs.rows_mut(3 * k, 3)
            .copy_from(&(lambda * p.camera.direction - rotation * p.robot.translation));
    }
    // The stack has rank 2 exactly: every block shares the kernel n_a.
    let t = svd_solve_truncated(&m, &rhs, 2);
    let t_perp = Vector3::new(t[0], t[1], t[2]);

    Ok(HandEyeSolution {
        rotation,
        translation: Some(t_perp),
        scale: Some(lambda),
        kind: SolutionKind::TranslationUpToAxis(n_a),
        residuals: SolveDiagnostics {
            translation_condition: Some(condition),
            near_pi_pairs: near_pi_pairs(s, cfg.near_pi_margin),
            ..Default::default()
        },
    })
}

fn pick_translation_constraint(
    s: &MotionSequence,
    rot_pairs: &[usize],
    trans_pairs: &[usize],
    n_b: &UnitVector3<f64>,
) -> Result<TranslationConstraint, SolveError> {
    let trans_scale = s.max_robot_translation();

    // A pure-translation pair can be used directly, provided it is not
    // parallel to the rotation axis.
    let best_real = trans_pairs
        .iter()
        .map(|&i| {
            let p = &s.pairs()[i];
            (i, p.robot.translation.cross(n_b).norm())
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"));
    if let Some((i, score)) = best_real {
        if score > 1e-10 * trans_scale {
            let p = &s.pairs()[i];
            return Ok(TranslationConstraint {
                t_b: p.robot.translation,
                u_a: p.camera.direction,
            });
        }
    }

    // Otherwise synthesize the virtual translation from the best pair of
    // rotation-bearing motions. It is orthogonal to n_b by construction.
    let mut best_virtual: Option<(TranslationConstraint, f64)> = None;
    for (a, &i) in rot_pairs.iter().enumerate() {
        for &j in rot_pairs.iter().skip(a + 1) {
            let pi = &s.pairs()[i];
            let pj = &s.pairs()[j];
            let t = (Matrix3::identity() - pj.robot.rotation.matrix()) * pi.robot.translation
                - (Matrix3::identity() - pi.robot.rotation.matrix()) * pj.robot.translation;
            let u = (Matrix3::identity() - pj.camera.rotation.matrix()) * pi.camera.direction
                - (Matrix3::identity() - pi.camera.rotation.matrix()) * pj.camera.direction;
            let score = t.norm();
            if best_virtual.as_ref().is_none_or(|(_, b)| score > *b) {
                best_virtual = Some((TranslationConstraint { t_b: t, u_a: u }, score));
            }
        }
    }
    if let Some((c, score)) = best_virtual {
        if score > 1e-10 * trans_scale {
            return Ok(c);
        }
    }

    Err(SolveError::InsufficientMotion(
        "planar solve needs a translation not parallel to the rotation axis or a non-zero \
         virtual translation (I - R_B2) t_B1 - (I - R_B1) t_B2"
            .into(),
    ))
}

/// Solves `R_X [t, n_b, t x n_b] = [lambda u, n_a, lambda (u x n_a)]` for the
/// rotation. The sign pairing of the axes is ambiguous only for half-turn
/// rotations; a reflection (negative determinant) in the linear solution
/// reveals the wrong sign, in which case the axis is flipped.
fn solve_planar_rotation(
    constraint: &TranslationConstraint,
    n_b: &UnitVector3<f64>,
    n_a: &UnitVector3<f64>,
    lambda: f64,
    cfg: &SolveConfig,
) -> Result<(nalgebra::Rotation3<f64>, UnitVector3<f64>, f64), SolveError> {
    let build = |n_a: &UnitVector3<f64>| -> Result<(Matrix3<f64>, f64), SolveError> {
        // Each block row is scaled by 1/||t||: the constraint vectors can be
        // orders of magnitude apart (a small virtual translation against the
        // unit axis) and unbalanced rows would squander precision.
        let rows = [
            constraint.t_b,
            n_b.into_inner(),
            constraint.t_b.cross(n_b),
        ];
        let rhs_vecs = [
            lambda * constraint.u_a,
            n_a.into_inner(),
            lambda * constraint.u_a.cross(n_a),
        ];
        let mut m = DMatrix::zeros(9, 9);
        let mut rhs = DVector::zeros(9);
        for (block, t) in rows.iter().enumerate() {
            let scale = t.norm();
            if scale <= 0.0 {
                return Err(SolveError::Numerical(
                    "degenerate constraint row in the planar rotation system".into(),
                ));
            }
            for r in 0..3 {
                for c in 0..3 {
                    m[(3 * block + r, 3 * r + c)] = t[c] / scale;
                }
            }
            rhs.rows_mut(3 * block, 3)
                .copy_from(&(rhs_vecs[block] / scale));
        }
        let (x, condition) = svd_solve(&m, &rhs, cfg.rank_tol)?;
        Ok((linalg::unvec_mat3(&x)?, condition))
    };

    let (estimate, condition) = build(n_a)?;
    let (estimate, n_a) = if estimate.determinant() < 0.0 {
        let flipped = Unit::new_unchecked(-n_a.into_inner());
        (build(&flipped)?.0, flipped)
    } else {
        (estimate, *n_a)
    };
    let rotation = linalg::nearest_rotation(&estimate)?;
    Ok((rotation, n_a, condition))
}
