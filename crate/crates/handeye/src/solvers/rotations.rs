//! Pure-rotation solver.
//!
//! With zero robot translations the system decouples: the rotation comes
//! from the null space of the stacked `I9 - R_Ai ⊗ R_Bi` blocks, and the
//! translation satisfies `(I3 - R_Ai) t_X = lambda u_Ai`. Pure rotations
//! carry no metric information, so only the ratio `t_X0 = t_X / lambda` is
//! observable; it is the least-squares solution of
//! `(I3 - R_Ai) t_X0 = u_Ai`.

use super::{
    expect_class, near_pi_pairs, rotation_from_nullspace, svd_solve, HandEyeSolution, SolveConfig,
    SolveDiagnostics, SolveError,
};
use crate::motion::{MotionClass, MotionSequence, SolutionKind};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

pub fn solve_rotations(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<HandEyeSolution, SolveError> {
    expect_class(
        s,
        cfg,
        |c| matches!(c, MotionClass::PureRotation),
        "pure rotations",
    )?;

    let rot = rotation_from_nullspace(s, cfg)?;

    let n = s.len();
    let mut m = DMatrix::zeros(3 * n, 3);
    let mut rhs = DVector::zeros(3 * n);
    for (i, p) in s.pairs().iter().enumerate() {
        let block = Matrix3::identity() - p.camera.rotation.matrix();
        m.view_mut((3 * i, 0), (3, 3)).copy_from(&block);
        rhs.rows_mut(3 * i, 3).copy_from(&p.camera.direction);
    }

    let svd_check = m.clone().svd(false, false);
    let sigma_max = svd_check.singular_values.max();
    let sigma_min = svd_check.singular_values.min();
    if sigma_min <= cfg.rank_tol * sigma_max {
        return Err(SolveError::InsufficientMotion(
            "camera rotation axes are parallel; t_X/lambda is not determined".into(),
        ));
    }
    let (t0, condition) = svd_solve(&m, &rhs, cfg.rank_tol)?;

    Ok(HandEyeSolution {
        rotation: rot.rotation,
        translation: Some(Vector3::new(t0[0], t0[1], t0[2])),
        scale: None,
        kind: SolutionKind::TranslationUpToScale,
        residuals: SolveDiagnostics {
            rotation_singular_values: rot.singular_values,
            null_space_gap: Some(rot.gap),
            translation_condition: Some(condition),
            near_pi_pairs: near_pi_pairs(s, cfg.near_pi_margin),
            assembled_residual: None,
        },
    })
}
