//! Dense complex helpers shared by the operator builders and propagators.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix. Only the lower triangle is read.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `V diag(f(λ)) V†`.
pub(crate) fn spectral_map(
    values: &[f64],
    vectors: &CMatrix,
    f: impl Fn(f64) -> Complex64,
) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let factor = f(lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= factor;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(-i s K)` for Hermitian `K`.
pub(crate) fn exp_minus_i(k: &CMatrix, s: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(k);
    spectral_map(&values, &vectors, |lambda| {
        Complex64::from_polar(1.0, -lambda * s)
    })
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
pub(crate) fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry of `m` over the rows and columns listed in `idx`.
pub(crate) fn max_abs_restricted(m: &CMatrix, idx: &[usize]) -> f64 {
    let mut acc = 0.0f64;
    for &i in idx {
        for &j in idx {
            acc = acc.max(m[(i, j)].norm());
        }
    }
    acc
}
