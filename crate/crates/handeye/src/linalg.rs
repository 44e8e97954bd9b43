//! Small dense-matrix utilities the linear formulation is built on.
//!
//! Everything here works on `f64` matrices of modest size (the largest
//! system is `12n x 13` for `n` motion pairs), so dense storage and plain
//! SVDs are used throughout.
//!
//! The `vec` operator is **row-major**: it reads a matrix one row after the
//! other. This matches the identity `vec(C D E) = (C ⊗ E^T) vec(D)` used to
//! turn `R_A R_X = R_X R_B` into a linear system on `vec(R_X)`; a
//! column-major `vec` would silently transpose the Kronecker factors.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3};
use thiserror::Error;

/// Default relative tolerance on singular values when deciding numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular or near-singular matrix (smallest singular value {sigma_min:e})")]
    SingularMatrix { sigma_min: f64 },
}

/// Reorders a matrix row-by-row into a single vector.
///
/// Entry `(i, j)` of `m` lands at output index `i * cols + j`.
pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    let (rows, cols) = m.shape();
    DVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vec()`]: rebuilds a `rows x cols` matrix from a row-major vector.
pub fn unvec(v: &DVector<f64>, rows: usize, cols: usize) -> Result<DMatrix<f64>, LinalgError> {
    if v.len() != rows * cols {
        return Err(LinalgError::DimensionMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(DMatrix::from_row_slice(rows, cols, v.as_slice()))
}

/// Row-major `vec` of a 3x3 matrix as a length-9 dynamic vector.
pub fn vec_mat3(m: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_fn(9, |k, _| m[(k / 3, k % 3)])
}

/// Rebuilds a 3x3 matrix from the first 9 entries of a row-major vector.
pub fn unvec_mat3(v: &DVector<f64>) -> Result<Matrix3<f64>, LinalgError> {
    if v.len() < 9 {
        return Err(LinalgError::DimensionMismatch {
            expected: 9,
            got: v.len(),
        });
    }
    Ok(Matrix3::from_row_slice(&v.as_slice()[..9]))
}

/// Kronecker product `m ⊗ n`: block `(i, j)` equals `m[(i, j)] * n`.
pub fn kron(m: &DMatrix<f64>, n: &DMatrix<f64>) -> DMatrix<f64> {
    m.kronecker(n)
}

/// Right null space of a matrix, with the singular values that justify it.
#[derive(Debug, Clone)]
pub struct NullSpaceResult {
    /// Orthonormal basis of the numerical null space (unit right singular
    /// vectors whose singular value is at most `rank_tol * sigma_max`).
    pub basis: Vec<DVector<f64>>,
    /// All `cols` singular values, non-increasing. Wide matrices are padded
    /// with zero rows before the SVD so the full right basis is available;
    /// the padding contributes the trailing zero singular values.
    pub singular_values: Vec<f64>,
    /// Number of singular values above the rank threshold.
    pub numerical_rank: usize,
}

/// Computes the numerical right null space of `m` via SVD.
///
/// A direction counts as null when its singular value is at most
/// `rank_tol * sigma_max`. An all-zero matrix yields the full space
/// (rank 0), not an error.
pub fn null_space(m: &DMatrix<f64>, rank_tol: f64) -> NullSpaceResult {
    assert!(rank_tol > 0.0, "rank_tol must be positive");
    let (rows, cols) = m.shape();

    // Pad wide matrices with zero rows so the thin SVD still produces all
    // `cols` right singular vectors.
    let work = if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };

    let svd = work.svd(true, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });

    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rank_tol * sigma_max;
    let numerical_rank = singular_values.iter().filter(|&&s| s > threshold).count();

    let basis = order[numerical_rank..]
        .iter()
        .map(|&k| v_t.row(k).transpose())
        .collect();

    NullSpaceResult {
        basis,
        singular_values,
        numerical_rank,
    }
}

/// Orthogonal matrix with determinant +1 closest to `m` in Frobenius norm.
///
/// Uses the SVD polar factor with the determinant sign corrected on the
/// smallest singular direction. Fails when `m` is (numerically) singular,
/// because the projection is then not unique.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Result<Rotation3<f64>, LinalgError> {
    let svd = (*m).svd(true, true);
    let u = svd.u.expect("SVD with u requested");
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if sigma_min <= 1e-12 * sigma_max || sigma_max == 0.0 {
        return Err(LinalgError::SingularMatrix { sigma_min });
    }
    let sign = (u * v_t).determinant().signum();
    let r = u * Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, sign)) * v_t;
    Ok(Rotation3::from_matrix_unchecked(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn random_rotation(axis: [f64; 3], angle: f64) -> Matrix3<f64> {
        let axis = nalgebra::Unit::new_normalize(Vector3::from(axis));
        *Rotation3::from_axis_angle(&axis, angle).matrix()
    }

    #[test]
    fn vec_identity() {
        let m = DMatrix::<f64>::identity(3, 3);
        let v = vec(&m);
        assert_eq!(
            v.as_slice(),
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn vec_is_row_major() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn unvec_rebuilds_row_major() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let m = unvec(&v, 2, 3).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));

        let id = unvec(
            &DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            3,
            3,
        )
        .unwrap();
        assert_eq!(id, DMatrix::identity(3, 3));
    }

    #[test]
    fn unvec_rejects_length_mismatch() {
        let v = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(
            unvec(&v, 2, 3),
            Err(LinalgError::DimensionMismatch { expected: 6, got: 2 })
        ));
    }

    #[test]
    fn kron_identity() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(kron(&i3, &i3), DMatrix::identity(9, 9));
    }

    #[test]
    fn kron_matches_hand_expansion() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 2.0, //
                1.0, 0.0, 2.0, 0.0, //
                0.0, 3.0, 0.0, 4.0, //
                3.0, 0.0, 4.0, 0.0,
            ],
        );
        assert_eq!(kron(&m, &n), expected);
    }

    #[test]
    fn null_space_of_identity_is_empty() {
        let res = null_space(&DMatrix::identity(3, 3), DEFAULT_RANK_TOL);
        assert_eq!(res.numerical_rank, 3);
        assert!(res.basis.is_empty());
    }

    #[test]
    fn null_space_of_zero_matrix_is_full() {
        let res = null_space(&DMatrix::zeros(4, 3), DEFAULT_RANK_TOL);
        assert_eq!(res.numerical_rank, 0);
        assert_eq!(res.basis.len(), 3);
        for (i, a) in res.basis.iter().enumerate() {
            assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
            for b in res.basis.iter().skip(i + 1) {
                assert!(a.dot(b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn null_space_handles_wide_matrices() {
        // 2x4 with rank 2: null space dimension must be 2.
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let res = null_space(&m, DEFAULT_RANK_TOL);
        assert_eq!(res.numerical_rank, 2);
        assert_eq!(res.basis.len(), 2);
        for b in &res.basis {
            assert!((&m * b).norm() < 1e-12);
        }
    }

    #[test]
    fn null_space_of_rotation_commutator_has_rank_6() {
        // I9 - R ⊗ R for a rotation with angle away from 0 and pi.
        let r = random_rotation([0.3, -0.5, 0.8], 1.1);
        let rd = DMatrix::from_fn(3, 3, |i, j| r[(i, j)]);
        let m = DMatrix::identity(9, 9) - kron(&rd, &rd);
        let res = null_space(&m, DEFAULT_RANK_TOL);
        assert_eq!(res.numerical_rank, 6);
        assert_eq!(res.basis.len(), 3);
    }

    #[test]
    fn null_space_of_two_pair_stack_has_rank_8() {
        // Conjugate rotation pairs with non-parallel axes: rank 8, 1-dim kernel.
        let rx = random_rotation([0.2, 0.9, -0.1], 0.7);
        let mut stack = DMatrix::zeros(18, 9);
        for (k, (axis, angle)) in [([0.0, 0.0, 1.0], 0.7), ([1.0, 0.0, 0.0], 1.2)]
            .iter()
            .enumerate()
        {
            let rb = random_rotation(*axis, *angle);
            let ra = rx * rb * rx.transpose();
            let rad = DMatrix::from_fn(3, 3, |i, j| ra[(i, j)]);
            let rbd = DMatrix::from_fn(3, 3, |i, j| rb[(i, j)]);
            let block = DMatrix::identity(9, 9) - kron(&rad, &rbd);
            stack.view_mut((9 * k, 0), (9, 9)).copy_from(&block);
        }
        let res = null_space(&stack, DEFAULT_RANK_TOL);
        assert_eq!(res.numerical_rank, 8);
        assert_eq!(res.basis.len(), 1);
    }

    #[test]
    fn nearest_rotation_fixes_rotations() {
        let r = random_rotation([1.0, 2.0, 3.0], 0.9);
        let p = nearest_rotation(&r).unwrap();
        assert_relative_eq!(*p.matrix(), r, epsilon = 1e-12);
    }

    #[test]
    fn nearest_rotation_is_scale_invariant() {
        let r = random_rotation([0.1, -0.7, 0.4], 2.2);
        let p = nearest_rotation(&(2.0 * r)).unwrap();
        assert_relative_eq!(*p.matrix(), r, epsilon = 1e-12);
    }

    #[test]
    fn nearest_rotation_absorbs_small_perturbations() {
        let r = random_rotation([0.5, 0.5, -1.0], 1.4);
        let mut e = Matrix3::zeros();
        e[(0, 1)] = 1.0;
        e[(2, 0)] = -1.0;
        let p = nearest_rotation(&(r + 0.01 * e)).unwrap();
        assert!((p.matrix() - r).norm() < 0.05);
    }

    #[test]
    fn nearest_rotation_rejects_singular_input() {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        assert!(matches!(
            nearest_rotation(&m),
            Err(LinalgError::SingularMatrix { .. })
        ));
    }

    proptest! {
        #[test]
        fn vec_is_linear(
            a in proptest::collection::vec(-10.0f64..10.0, 6),
            b in proptest::collection::vec(-10.0f64..10.0, 6),
            alpha in -5.0f64..5.0,
            beta in -5.0f64..5.0,
        ) {
            let m = DMatrix::from_row_slice(2, 3, &a);
            let n = DMatrix::from_row_slice(2, 3, &b);
            let lhs = vec(&(alpha * &m + beta * &n));
            let rhs = alpha * vec(&m) + beta * vec(&n);
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn vec_unvec_roundtrip(entries in proptest::collection::vec(-10.0f64..10.0, 9)) {
            let m = DMatrix::from_row_slice(3, 3, &entries);
            let back = unvec(&vec(&m), 3, 3).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn kron_mixed_product(
            a in proptest::collection::vec(-3.0f64..3.0, 6),
            b in proptest::collection::vec(-3.0f64..3.0, 6),
            c in proptest::collection::vec(-3.0f64..3.0, 6),
            d in proptest::collection::vec(-3.0f64..3.0, 6),
        ) {
            // (A ⊗ B)(C ⊗ D) = (A C) ⊗ (B D) with conformable rectangles.
            let a = DMatrix::from_row_slice(2, 3, &a);
            let b = DMatrix::from_row_slice(3, 2, &b);
            let c = DMatrix::from_row_slice(3, 2, &c);
            let d = DMatrix::from_row_slice(2, 3, &d);
            let lhs = kron(&a, &b) * kron(&c, &d);
            let rhs = kron(&(&a * &c), &(&b * &d));
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn kron_inverse_rule(
            a in proptest::collection::vec(-3.0f64..3.0, 9),
            b in proptest::collection::vec(-3.0f64..3.0, 9),
        ) {
            let a = DMatrix::from_row_slice(3, 3, &a);
            let b = DMatrix::from_row_slice(3, 3, &b);
            prop_assume!(a.determinant().abs() > 0.1);
            prop_assume!(b.determinant().abs() > 0.1);
            let ai = a.clone().try_inverse().unwrap();
            let bi = b.clone().try_inverse().unwrap();
            let lhs = kron(&a, &b).try_inverse().unwrap();
            let rhs = kron(&ai, &bi);
            prop_assert!((lhs - rhs).norm() < 1e-6);
        }

        #[test]
        fn kron_vectorization_identity(
            c in proptest::collection::vec(-3.0f64..3.0, 9),
            d in proptest::collection::vec(-3.0f64..3.0, 9),
            e in proptest::collection::vec(-3.0f64..3.0, 9),
        ) {
            // vec(C D E) = (C ⊗ E^T) vec(D), both sides computed independently.
            let c = DMatrix::from_row_slice(3, 3, &c);
            let d = DMatrix::from_row_slice(3, 3, &d);
            let e = DMatrix::from_row_slice(3, 3, &e);
            let lhs = vec(&(&c * &d * &e));
            let rhs = kron(&c, &e.transpose()) * vec(&d);
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn nearest_rotation_output_is_orthogonal(
            axis in proptest::collection::vec(-1.0f64..1.0, 3),
            angle in 0.0f64..3.1,
            noise in proptest::collection::vec(-0.05f64..0.05, 9),
        ) {
            prop_assume!(axis.iter().map(|x| x * x).sum::<f64>() > 1e-3);
            let r = random_rotation([axis[0], axis[1], axis[2]], angle);
            let m = r + Matrix3::from_row_slice(&noise);
            let p = nearest_rotation(&m).unwrap();
            let rt_r = p.matrix().transpose() * p.matrix();
            prop_assert!((rt_r - Matrix3::identity()).norm() < 1e-12);
            prop_assert!((p.matrix().determinant() - 1.0).abs() < 1e-12);
        }
    }
}
