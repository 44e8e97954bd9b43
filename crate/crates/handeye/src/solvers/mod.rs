//! Hand-eye solvers: homogeneous system assembly, null-space rotation
//! estimation, and one solver per motion class.
//!
//! Every motion pair `i` contributes a `12 x 13` block to the assembled
//! system acting on the unknown `z = (vec(R_X), t_X, lambda)`:
//!
//! ```text
//! | I9 - R_Ai ⊗ R_Bi     0_{9x3}      0_{9x1} |
//! | I3 ⊗ t_Bi^T          I3 - R_Ai   -u_Ai    |  *  z = 0
//! ```
//!
//! Solving the full 13-unknown system in one shot would not keep the
//! rotation block orthogonal and couples the conditioning to the physical
//! translation unit, so it is kept only as a residual diagnostic. The actual
//! solvers split the problem: the rotation comes from the null space of the
//! stacked upper blocks (orthogonalized afterwards), and the remaining
//! unknowns from class-specific linear systems on the lower blocks.

mod general;
mod planar;
mod rotations;
mod translations;

pub use general::solve_general;
pub use planar::solve_planar;
pub use rotations::solve_rotations;
pub use translations::{
    closed_form_rotation_estimate, solve_translations, solve_translations_closed_form,
    solve_translations_two,
};

use crate::linalg::{self, LinalgError};
use crate::motion::{
    classify_sequence, ClassifyTolerances, MotionClass, MotionError, MotionSequence, SolutionKind,
};
use crate::se3::rotation_angle;
use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Vector3};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("motion class {found:?} does not match the requested solver (needs {expected})")]
    WrongMotionClass { expected: &'static str, found: MotionClass },
    #[error("insufficient motion: {0}")]
    InsufficientMotion(String),
    #[error("degenerate translations: {0}")]
    DegenerateTranslation(String),
    #[error("camera/robot pairing is inconsistent: no approximate null direction (sigma_min/sigma_max = {ratio:.3})")]
    InconsistentData { ratio: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Knobs shared by the solvers. The defaults match the classification
/// defaults and a conservative SVD rank policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub classify: ClassifyTolerances,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Gap ratio `sigma_8 / sigma_9` above which the rotation stack is
    /// declared to have a clean 1-dimensional null space.
    pub gap_ratio: f64,
    /// Rotations within this margin of `pi` trigger a conditioning warning.
    pub near_pi_margin: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            classify: ClassifyTolerances::default(),
            rank_tol: 1e-8,
            gap_ratio: 1e3,
            near_pi_margin: 1e-3,
        }
    }
}

/// Numerical evidence recorded alongside a solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// Singular values of the stacked rotation system, non-increasing
    /// (empty when the solver did not use the null-space route).
    pub rotation_singular_values: Vec<f64>,
    /// `sigma_8 / sigma_9` of the rotation stack.
    pub null_space_gap: Option<f64>,
    /// Condition number of the translation/scale subsystem.
    pub translation_condition: Option<f64>,
    /// Pairs whose robot rotation angle is within the configured margin of
    /// `pi`, where the rank analysis of the rotation stack degrades.
    pub near_pi_pairs: Vec<usize>,
    /// `|| M z ||` of the assembled full system at the returned solution
    /// (only for full solutions).
    pub assembled_residual: Option<f64>,
}

/// A hand-eye calibration estimate. Which fields are populated is dictated
/// by `kind`:
///
/// - `Full`: `translation` is `t_X`, `scale` is `lambda`.
/// - `TranslationUpToScale`: `translation` holds `t_X / lambda`, no scale.
/// - `TranslationUpToAxis(n_a)`: `translation` is the minimum-norm solution
///   `t_perp` (any multiple of `n_a` may be added), `scale` is `lambda`.
/// - `RotationAndScaleOnly`: no translation, `scale` is `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct HandEyeSolution {
    pub rotation: Rotation3<f64>,
    pub translation: Option<Vector3<f64>>,
    pub scale: Option<f64>,
    pub kind: SolutionKind,
    pub residuals: SolveDiagnostics,
}

/// The stacked homogeneous system of all motion pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    /// `12n x 13` matrix annihilating `(vec(R_X), t_X, lambda)`.
    pub matrix: DMatrix<f64>,
    pub pair_count: usize,
}

impl AssembledSystem {
    /// `|| M z ||` for `z = (vec(R_X), t_X, lambda)`; zero for an exact
    /// solution on noise-free data.
    pub fn residual(&self, rotation: &Rotation3<f64>, translation: &Vector3<f64>, lambda: f64) -> f64 {
        let mut z = DVector::zeros(13);
        z.rows_mut(0, 9).copy_from(&linalg::vec_mat3(rotation.matrix()));
        z.rows_mut(9, 3).copy_from(translation);
        z[12] = lambda;
        (&self.matrix * z).norm()
    }
}

/// Builds the `12n x 13` homogeneous system from a motion sequence.
pub fn assemble(s: &MotionSequence) -> AssembledSystem {
    let n = s.len();
    let mut m = DMatrix::zeros(12 * n, 13);
    for (i, p) in s.pairs().iter().enumerate() {
        let ra = p.camera.rotation.matrix();
        let rb = p.robot.rotation.matrix();
        let tb = p.robot.translation;
        let ua = p.camera.direction;

        let upper = nalgebra::SMatrix::<f64, 9, 9>::identity() - ra.kronecker(rb);
        m.view_mut((12 * i, 0), (9, 9)).copy_from(&upper);

        // I3 ⊗ t_B^T is block-diagonal with t_B^T repeated.
        for r in 0..3 {
            for c in 0..3 {
                m[(12 * i + 9 + r, 3 * r + c)] = tb[c];
            }
        }
        let lower_mid = Matrix3::identity() - ra;
        m.view_mut((12 * i + 9, 9), (3, 3)).copy_from(&lower_mid);
        m.view_mut((12 * i + 9, 12), (3, 1)).copy_from(&(-ua));
    }
    AssembledSystem {
        matrix: m,
        pair_count: n,
    }
}

/// Result of the null-space rotation estimation, before and after
/// orthogonalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceRotation {
    pub rotation: Rotation3<f64>,
    /// `V = unvec(v)` scaled by `sign(det V) / |det V|^{1/3}`, prior to the
    /// orthogonalization step.
    pub scaled_estimate: Matrix3<f64>,
    pub singular_values: Vec<f64>,
    pub gap: f64,
}

/// Estimates the hand-eye rotation from the 1-dimensional null space of the
/// stacked `I9 - R_Ai ⊗ R_Bi` blocks.
///
/// The null-space matrix `V` is proportional to `R_X` on consistent data;
/// the determinant rescaling lands it on a unit-determinant matrix and the
/// orthogonalization step absorbs noise (it is the identity on noise-free
/// data).
pub fn solve_rotation_nullspace(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<Rotation3<f64>, SolveError> {
    Ok(rotation_from_nullspace(s, cfg)?.rotation)
}

/// Like [`solve_rotation_nullspace`] but keeps the intermediate quantities,
/// for diagnostics and verification.
pub fn rotation_from_nullspace(
    s: &MotionSequence,
    cfg: &SolveConfig,
) -> Result<NullSpaceRotation, SolveError> {
    if s.len() < 2 {
        return Err(SolveError::InsufficientMotion(format!(
            "rotation estimation needs at least 2 motion pairs, got {}",
            s.len()
        )));
    }
    let n = s.len();
    let mut stack = DMatrix::zeros(9 * n, 9);
    for (i, p) in s.pairs().iter().enumerate() {
        let block = nalgebra::SMatrix::<f64, 9, 9>::identity()
            - p.camera.rotation.matrix().kronecker(p.robot.rotation.matrix());
        stack.view_mut((9 * i, 0), (9, 9)).copy_from(&block);
    }

    let ns = linalg::null_space(&stack, cfg.rank_tol);
    let sv = &ns.singular_values;
    let sigma_max = sv[0];
    if sigma_max <= 0.0 {
        return Err(SolveError::InsufficientMotion(
            "all rotation blocks vanish (no rotations in the sequence)".into(),
        ));
    }
    // A second small singular direction means the rotation axes are parallel
    // and the solution manifold is larger than one dimension.
    if sv[7] <= 1e-6 * sigma_max {
        return Err(SolveError::InsufficientMotion(
            "rotation axes are parallel: the null space is more than 1-dimensional".into(),
        ));
    }
    // No approximately-null direction at all: the pairing cannot come from a
    // common hand-eye transform.
    let ratio = sv[8] / sigma_max;
    if ratio > 0.5 {
        return Err(SolveError::InconsistentData { ratio });
    }
    let gap = if sv[8] > 0.0 { sv[7] / sv[8] } else { f64::INFINITY };
    if gap < cfg.gap_ratio {
        // Noisy data: no clean 1-dimensional kernel. The smallest singular
        // direction is still the least-squares choice; the gap is recorded
        // in the diagnostics for the caller to judge.
        log::debug!(
            "rotation null space weakly separated (gap {gap:.2e} < {:.0e})",
            cfg.gap_ratio
        );
    }

    // Smallest right singular direction, whether or not the gap criterion
    // declares a clean kernel (noisy data still has a best-fit direction).
    let v = if let Some(b) = ns.basis.last() {
        b.clone()
    } else {
        let full = linalg::null_space(&stack, 1.0 + ratio);
        full.basis.last().expect("at least one direction").clone()
    };

    let v_mat = linalg::unvec_mat3(&v)?;
    let det = v_mat.determinant();
    if det.abs() < 1e-300 {
        return Err(SolveError::Numerical(
            "null-space matrix has zero determinant".into(),
        ));
    }
    let scaled = (det.signum() / det.abs().powf(1.0 / 3.0)) * v_mat;
    let rotation = linalg::nearest_rotation(&scaled)?;
    Ok(NullSpaceRotation {
        rotation,
        scaled_estimate: scaled,
        singular_values: sv.clone(),
        gap,
    })
}

/// Minimum-norm least-squares solve keeping only the `keep` largest singular
/// directions.
pub(crate) fn svd_solve_truncated(m: &DMatrix<f64>, b: &DVector<f64>, keep: usize) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("SVD with u requested");
    let v_t = svd.v_t.as_ref().expect("SVD with v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let mut x = DVector::zeros(m.ncols());
    for &k in order.iter().take(keep) {
        let sigma = svd.singular_values[k];
        if sigma <= 0.0 {
            continue;
        }
        let coeff = u.column(k).dot(b) / sigma;
        x += coeff * v_t.row(k).transpose();
    }
    x
}

/// Least-squares solve via SVD pseudo-inverse with a relative rank cutoff.
/// Returns the solution and the condition number `sigma_max / sigma_min_kept`.
pub(crate) fn svd_solve(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    rank_tol: f64,
) -> Result<(DVector<f64>, f64), SolveError> {
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max <= 0.0 {
        return Err(SolveError::Numerical("all-zero system matrix".into()));
    }
    let x = svd
        .solve(b, rank_tol * sigma_max)
        .map_err(|e| SolveError::Numerical(e.to_string()))?;
    let sigma_min_kept = svd
        .singular_values
        .iter()
        .copied()
        .filter(|&s| s > rank_tol * sigma_max)
        .fold(sigma_max, f64::min);
    Ok((x, sigma_max / sigma_min_kept))
}

/// Indices of pairs whose robot rotation angle is within `margin` of `pi`.
pub(crate) fn near_pi_pairs(s: &MotionSequence, margin: f64) -> Vec<usize> {
    s.pairs()
        .iter()
        .enumerate()
        .filter(|(_, p)| (rotation_angle(&p.robot.rotation) - PI).abs() < margin)
        .map(|(i, _)| i)
        .collect()
}

/// Classifies the sequence and routes it to the matching solver.
pub fn solve_auto(s: &MotionSequence, cfg: &SolveConfig) -> Result<HandEyeSolution, SolveError> {
    let class = classify_sequence(s, &cfg.classify)?;
    match class {
        MotionClass::Degenerate => Err(MotionError::NoInformation.into()),
        MotionClass::PureTranslation => solve_translations(s, cfg),
        MotionClass::PureRotation => solve_rotations(s, cfg),
        MotionClass::Planar(_) => solve_planar(s, cfg),
        MotionClass::General => solve_general(s, cfg),
    }
}

pub(crate) fn expect_class(
    s: &MotionSequence,
    cfg: &SolveConfig,
    want: fn(&MotionClass) -> bool,
    expected: &'static str,
) -> Result<MotionClass, SolveError> {
    let class = classify_sequence(s, &cfg.classify)?;
    if want(&class) {
        Ok(class)
    } else {
        Err(SolveError::WrongMotionClass {
            expected,
            found: class,
        })
    }
}
