//! Pure-translation solvers.
//!
//! With identity robot rotations the camera rotations are identity too and
//! each pair reduces to `R_X t_Bi = lambda u_Ai`. The hand-eye translation
//! drops out of the equations entirely, so only `(R_X, lambda)` can be
//! recovered.
//!
//! Three non-coplanar translations give a closed form whose columns are
//! exactly orthogonal on noise-free data; two independent translations still
//! suffice by first fixing the scale through norm preservation and then
//! augmenting the system with the cross-product row
//! `R_X (t_B1 x t_B2) = (R_X t_B1) x (R_X t_B2)`.

use super::{
    expect_class, near_pi_pairs, svd_solve, HandEyeSolution, SolveConfig, SolveDiagnostics,
    SolveError,
};
use crate::linalg;
use crate::motion::{MotionClass, MotionSequence, SolutionKind};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Scale factor from norm preservation: least-squares fit of
/// `lambda * ||u_Ai|| = ||t_Bi||` over all pairs.
fn scale_from_norms(s: &MotionSequence) -> Result<f64, SolveError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in s.pairs() {
        let un = p.camera.direction.norm();
        num += un * p.robot.translation.norm();
        den += un * un;
    }
    if den <= 0.0 {
        return Err(SolveError::Numerical(
            "all camera directions are zero; scale is unobservable".into(),
        ));
    }
    Ok(num / den)
}

/// Unorthogonalized closed-form rotation estimate from one translation
/// triple, together with the scale factor fixed by the unit-determinant
/// constraint.
///
/// Returns `(R~_X, lambda)` where
/// `R~_X = (lambda / det(t_B1, t_B2, t_B3)) * (u_A1 (t_B2 x t_B3)^T + u_A2 (t_B3 x t_B1)^T + u_A3 (t_B1 x t_B2)^T)`.
/// On noise-free data the columns of `R~_X` are orthogonal before any
/// correction.
pub fn closed_form_rotation_estimate(
    t_b: [&Vector3<f64>; 3],
    u_a: [&Vector3<f64>; 3],
) -> Result<(Matrix3<f64>, f64), SolveError> {
    let delta = t_b[0].cross(t_b[1]).dot(t_b[2]);
    let norm_product: f64 = t_b.iter().map(|t| t.norm()).product();
    if delta.abs() <= 1e-10 * norm_product || norm_product == 0.0 {
        return Err(SolveError::DegenerateTranslation(
            "translation triple is coplanar".into(),
        ));
    }
    let s_mat = (u_a[0] * t_b[1].cross(t_b[2]).transpose()
        + u_a[1] * t_b[2].cross(t_b[0]).transpose()
        + u_a[2] * t_b[0].cross(t_b[1]).transpose())
        / delta;
    let det = s_mat.determinant();
    if det <= 0.0 {
        return Err(SolveError::Numerical(format!(
            "closed-form estimate has non-positive determinant {det:.3e}; data inconsistent"
        )));
    }
    // det(lambda * S) = 1 fixes lambda.
    let lambda = det.powf(-1.0 / 3.0);
    Ok((lambda * s_mat, lambda))
}

/// Closed-form solver for three or more pure translations.
///
/// When more than three pairs are available, the triple with the largest
/// normalized determinant is used.
pub fn solve_translations_closed_form(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<HandEyeSolution, SolveError> {
    expect_class(
        s,
        cfg,
        |c| matches!(c, MotionClass::PureTranslation),
        "pure translations",
    )?;
    let n = s.len();
    if n < 3 {
        return Err(SolveError::InsufficientMotion(format!(
            "closed-form translation solver needs 3 pairs, got {n}"
        )));
    }

    let mut best: Option<([usize; 3], f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (ti, tj, tk) = (
                    &s.pairs()[i].robot.translation,
                    &s.pairs()[j].robot.translation,
                    &s.pairs()[k].robot.translation,
                );
                let norm_product = ti.norm() * tj.norm() * tk.norm();
                if norm_product == 0.0 {
                    continue;
                }
                let score = ti.cross(tj).dot(tk).abs() / norm_product;
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some(([i, j, k], score));
                }
            }
        }
    }
    let (idx, _) = best.ok_or_else(|| {
        SolveError::DegenerateTranslation("no usable translation triple".into())
    })?;

    let t_b = idx.map(|i| s.pairs()[i].robot.translation);
    let u_a = idx.map(|i| s.pairs()[i].camera.direction);
    let (estimate, lambda) =
        closed_form_rotation_estimate([&t_b[0], &t_b[1], &t_b[2]], [&u_a[0], &u_a[1], &u_a[2]])?;
    let rotation = linalg::nearest_rotation(&estimate)?;

    Ok(HandEyeSolution {
        rotation,
        translation: None,
        scale: Some(lambda),
        kind: SolutionKind::RotationAndScaleOnly,
        residuals: SolveDiagnostics {
            near_pi_pairs: near_pi_pairs(s, cfg.near_pi_margin),
            ..Default::default()
        },
    })
}

/// Two-step solver for two or more linearly independent pure translations.
pub fn solve_translations_two(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<HandEyeSolution, SolveError> {
    expect_class(
        s,
        cfg,
        |c| matches!(c, MotionClass::PureTranslation),
        "pure translations",
    )?;
    if s.len() < 2 {
        return Err(SolveError::InsufficientMotion(format!(
            "translation solver needs 2 pairs, got {}",
            s.len()
        )));
    }

    let lambda = scale_from_norms(s)?;

    // Best-conditioned independent pair.
    let n = s.len();
    let mut best: Option<([usize; 2], f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let (ti, tj) = (
                &s.pairs()[i].robot.translation,
                &s.pairs()[j].robot.translation,
            );
            let denom = ti.norm() * tj.norm();
            if denom == 0.0 {
                continue;
            }
            let score = ti.cross(tj).norm() / denom;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some(([i, j], score));
            }
        }
    }
    let (idx, score) = best.ok_or_else(|| {
        SolveError::DegenerateTranslation("no non-zero translation pair".into())
    })?;
    if score <= 1e-8 {
        return Err(SolveError::DegenerateTranslation(
            "translations are parallel".into(),
        ));
    }

    let t1 = s.pairs()[idx[0]].robot.translation;
    let t2 = s.pairs()[idx[1]].robot.translation;
    let u1 = s.pairs()[idx[0]].camera.direction;
    let u2 = s.pairs()[idx[1]].camera.direction;

    // Full-rank 9x9 system with the cross-product row appended:
    // R_X t_B1 = lambda u_A1, R_X t_B2 = lambda u_A2,
    // R_X (t_B1 x t_B2) = lambda^2 (u_A1 x u_A2).
    // Block rows are scaled to unit constraint vectors so translations of
    // very different magnitudes do not unbalance the system.
    let rows = [t1, t2, t1.cross(&t2)];
    let rhs_vecs = [lambda * u1, lambda * u2, lambda * lambda * u1.cross(&u2)];
    let mut m = DMatrix::zeros(9, 9);
    let mut rhs = DVector::zeros(9);
    for (block, t) in rows.iter().enumerate() {
        let scale = t.norm();
        for r in 0..3 {
            for c in 0..3 {
                m[(3 * block + r, 3 * r + c)] = t[c] / scale;
            }
        }
        rhs.rows_mut(3 * block, 3).copy_from(&(rhs_vecs[block] / scale));
    }
    let (x, condition) = svd_solve(&m, &rhs, cfg.rank_tol)?;
    let estimate = linalg::unvec_mat3(&x)?;
    let rotation = linalg::nearest_rotation(&estimate)?;

    Ok(HandEyeSolution {
        rotation,
        translation: None,
        scale: Some(lambda),
        kind: SolutionKind::RotationAndScaleOnly,
        residuals: SolveDiagnostics {
            translation_condition: Some(condition),
            near_pi_pairs: near_pi_pairs(s, cfg.near_pi_margin),
            ..Default::default()
        },
    })
}

/// Translation-class dispatcher: closed form when a usable triple exists,
/// the two-translation route otherwise.
pub fn solve_translations(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<HandEyeSolution, SolveError> {
    if s.len() >= 3 {
        match solve_translations_closed_form(s, cfg) {
            Err(SolveError::DegenerateTranslation(_)) => solve_translations_two(s, cfg),
            other => other,
        }
    } else {
        solve_translations_two(s, cfg)
    }
}
