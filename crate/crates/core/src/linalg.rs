//! Dense floating point linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not numerically positive definite")]
    NotPositiveDefinite,
}

/// Relative symmetry tolerance used by the checked entry points.
const SYM_TOL: f64 = 1e-9;

pub fn check_symmetric<T: Real>(a: &DMatrix<T>) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let scale = a.iter().fold(T::one(), |m, &v| m.max(v.abs()));
    let tol = T::lit(SYM_TOL) * scale;
    for i in 0..a.nrows() {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > tol {
                return Err(LinalgError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.transpose()) * T::lit(0.5)
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn sym_eigen<T: Real>(a: &DMatrix<T>) -> Result<(Vec<T>, DMatrix<T>), LinalgError> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = symmetrize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Smallest eigenvalue of a symmetric matrix (`+inf` for the empty matrix).
pub fn min_eigenvalue<T: Real>(a: &DMatrix<T>) -> Result<T, LinalgError> {
    let (vals, _) = sym_eigen(a)?;
    Ok(vals.first().copied().unwrap_or(T::lit(f64::INFINITY)))
}

/// Lower Cholesky factor of `A + shift·I`; fails unless that matrix is
/// numerically positive definite.
pub fn cholesky_psd<T: Real>(a: &DMatrix<T>, shift: T) -> Result<DMatrix<T>, LinalgError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let shifted = symmetrize(a) + DMatrix::<T>::identity(n, n) * shift;
    shifted.cholesky().map(|c| c.l()).ok_or(LinalgError::NotPositiveDefinite)
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &DMatrix<T>) -> Vec<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Number of singular values above `tol · max(σ_max, 1)`.
pub fn numeric_rank<T: Real>(a: &DMatrix<T>, tol: T) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or_else(T::zero).max(T::one());
    s.iter().filter(|&&v| v > tol * top).count()
}

/// Moore–Penrose pseudo-inverse, truncating singular values below
/// `rtol · σ_max`.
pub fn pseudo_inverse<T: Real>(a: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(T::zero(), |m, &v| m.max(v));
    let cut = rtol * smax;
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > T::zero() {
            let vk = vt.row(k).transpose();
            let uk = u.column(k);
            out += (vk * uk.transpose()) * (T::one() / s);
        }
    }
    out
}

/// Orthonormal basis for the column space of `a`, dropping directions with
/// singular value below `rtol · σ_max`.
pub fn orthonormal_columns<T: Real>(a: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().fold(T::zero(), |m, &v| m.max(v));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rtol * smax && svd.singular_values[k] > T::zero())
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Least-squares solution of `A x ≈ b` (minimum norm).
pub fn lstsq<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> DVector<T> {
    pseudo_inverse(a, T::lit(1e-13)) * b
}

/// Frobenius inner product `⟨A, B⟩ = tr(AᵀB)`.
pub fn frob_dot<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |s, (&x, &y)| s + x * y)
}
