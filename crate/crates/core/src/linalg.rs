//! Dense helpers over [`Scalar`] matrices and small `f64` tensors.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

use crate::jet::Scalar;

/// Gauss-Jordan inverse with partial pivoting on the real part.
///
/// Returns `None` when a pivot vanishes exactly.
pub fn invert<S: Scalar>(a: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let mut work: Vec<Vec<S>> = a.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| S::from_f64(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            work[i][col]
                .re()
                .abs()
                .total_cmp(&work[j][col].re().abs())
        })?;
        if work[pivot][col].re() == 0.0 {
            return None;
        }
        work.swap(col, pivot);
        inv.swap(col, pivot);
        let p = work[col][col].recip();
        for j in 0..n {
            work[col][j] = work[col][j].clone() * p.clone();
            inv[col][j] = inv[col][j].clone() * p.clone();
        }
        for row in 0..n {
            if row == col || work[row][col].is_zero() {
                continue;
            }
            let f = work[row][col].clone();
            for j in 0..n {
                let w = work[col][j].clone() * f.clone();
                work[row][j] -= w;
                let v = inv[col][j].clone() * f.clone();
                inv[row][j] -= v;
            }
        }
    }
    Some(inv)
}

pub fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn determinant(a: &Array2<f64>) -> f64 {
    to_dmatrix(a).determinant()
}

pub fn inverse(a: &Array2<f64>) -> Option<Array2<f64>> {
    to_dmatrix(a).try_inverse().map(|m| from_dmatrix(&m))
}

/// `(positive, negative)` eigenvalue counts of a symmetric matrix.
pub fn inertia(a: &Array2<f64>) -> (usize, usize) {
    let eig = to_dmatrix(a).symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let pos = eig.eigenvalues.iter().filter(|&&v| v > 1e-12 * scale).count();
    let neg = eig.eigenvalues.iter().filter(|&&v| v < -1e-12 * scale).count();
    (pos, neg)
}

pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn mat_vec(a: &Array2<f64>, v: &Array1<f64>) -> Array1<f64> {
    a.dot(v)
}
