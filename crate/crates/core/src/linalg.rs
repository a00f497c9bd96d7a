//! Dense complex matrix helpers shared by every module.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Builds a matrix from real entries given row by row.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

/// Kronecker product `a ⊗ b`, left factor major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    frobenius_diff(m, &m.adjoint())
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// The input is symmetrized first, so tiny anti-Hermitian noise is ignored.
/// Returns `(eigenvalues, eigenvectors as columns)`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// Rotates a vector so its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let Some(pivot) = v
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, z)| match best {
            Some((_, n)) if n >= z.norm() => best,
            _ => Some((i, z.norm())),
        })
    else {
        return;
    };
    let z = v[pivot.0];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    for x in v.iter_mut() {
        *x *= phase;
    }
}

/// Orthonormal basis for the range of the projector-like Hermitian matrix `m`,
/// keeping eigenvectors whose eigenvalue exceeds `threshold`.
pub fn range_basis(m: &CMatrix, threshold: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] > threshold)
        .collect();
    CMatrix::from_fn(m.nrows(), keep.len(), |i, j| vectors[(i, keep[j])])
}
