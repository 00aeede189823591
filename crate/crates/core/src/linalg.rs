use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use crate::C64;

/// Eigen-decomposition of a Hermitian matrix. Only the lower triangle is
/// trusted by the solver, so callers symmetrize first.
pub(crate) fn eigh(a: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let eig = SymmetricEigen::new(m);
    let values = eig.eigenvalues.iter().copied().collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, j)]);
    (values, vectors)
}

pub(crate) fn eigvalsh(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

pub(crate) fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// max |a − a†| / 2
pub(crate) fn anti_hermitian_norm(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm() / 2.0);
        }
    }
    worst
}

pub(crate) fn hermitian_part(a: &Array2<C64>) -> Array2<C64> {
    (a + &dagger(a)).mapv(|z| z * 0.5)
}

/// Positive square root of a positive semidefinite Hermitian matrix;
/// negative rounding noise in the spectrum is clipped.
pub(crate) fn psd_sqrt(a: &Array2<C64>) -> Array2<C64> {
    let (vals, vecs) = eigh(a);
    let scaled = Array2::from_shape_fn(vecs.dim(), |(i, j)| vecs[[i, j]] * vals[j].max(0.0).sqrt());
    scaled.dot(&dagger(&vecs))
}

/// Sum of singular values.
pub(crate) fn trace_norm(a: &Array2<C64>) -> f64 {
    let (r, c) = a.dim();
    let m = DMatrix::from_fn(r, c, |i, j| a[[i, j]]);
    m.singular_values().iter().sum()
}
