//! Small dense complex linear algebra shared by the propagators.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
/// 4x4 complex matrix over the spin basis documented in [`crate::spin`].
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest entry of |H - H^dagger|.
pub fn hermitian_defect<R, Cc, S>(m: &nalgebra::Matrix<C64, R, Cc, S>) -> f64
where
    R: nalgebra::Dim,
    Cc: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, Cc>,
{
    let (rows, cols) = m.shape();
    let mut worst = 0.0_f64;
    for i in 0..rows {
        for j in 0..cols {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian 4x4 matrix: real eigenvalues and unitary eigenvector
/// matrix whose columns are the eigenvectors.
pub fn eigh4(h: &Mat4) -> (Vector4<f64>, Mat4) {
    let eig = SymmetricEigen::new(*h);
    (eig.eigenvalues, eig.eigenvectors)
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// Independent of any eigendecomposition, so it doubles as the reference path for checking
/// eigenvector-based propagators and the master-equation integrator.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scale = C64::new(0.5_f64.powi(squarings), 0.0);
    let b = a * scale;

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..40 {
        term = &term * &b * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if one_norm(&term) < 1e-18 * one_norm(&result).max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn expm4(a: &Mat4) -> Mat4 {
    let d = DMatrix::from_iterator(4, 4, a.iter().copied());
    let e = expm(&d);
    Mat4::from_iterator(e.iter().copied())
}
