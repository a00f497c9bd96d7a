//! Density operators, partial traces, supports and seeded sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::SpaceDecomposition;
use crate::linalg::{
    c, dagger, frobenius_diff, hermitian_eigen, hermitian_residual, min_eigenvalue, trace, zeros,
    CMatrix, ONE,
};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        validate_density(&matrix, tol)?;
        Ok(Self { matrix })
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                index: k,
                bound: dim,
            });
        }
        Ok(Self {
            matrix: crate::linalg::matrix_unit(dim, k, k),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            matrix: crate::linalg::identity(dim) / c(dim as f64, 0.0),
        })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let n = psi.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

impl AsRef<CMatrix> for DensityOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.matrix
    }
}

pub fn validate_density(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidDensity(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidDensity("non-finite entry".into()));
    }
    let herm = hermitian_residual(m);
    if herm > tol {
        return Err(Error::NotHermitian { residual: herm });
    }
    let min = min_eigenvalue(m);
    if min < -tol {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    let tr = trace(m);
    if (tr - ONE).norm() > tol {
        return Err(Error::InvalidDensity(format!(
            "trace {:.6} is not 1",
            tr.re
        )));
    }
    Ok(())
}

/// A subspace given by orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * dagger(&self.basis)
    }

    /// Whether `other ⊆ self`, measured as `‖(I − Π_self) Π_other‖₂ ≤ tol`.
    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        if other.dim() == 0 {
            return true;
        }
        let n = self.ambient_dim();
        let outside = (crate::linalg::identity(n) - self.projector()) * other.projector();
        spectral_norm(&outside) <= tol
    }
}

fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = dagger(m) * m;
    hermitian_eigen(&gram)
        .0
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// Span of the eigenvectors whose eigenvalue exceeds `tol`.
pub fn support(rho: &CMatrix, tol: f64) -> Result<Subspace> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", rho.nrows(), rho.ncols()),
        });
    }
    let herm = hermitian_residual(rho);
    if herm > tol.max(1e-12) {
        return Err(Error::NotHermitian { residual: herm });
    }
    Ok(Subspace {
        basis: crate::linalg::range_basis(rho, tol),
    })
}

pub fn tensor(left: &DensityOperator, right: &DensityOperator) -> DensityOperator {
    DensityOperator {
        matrix: left.matrix.kronecker(&right.matrix),
    }
}

fn check_code_block(rho_c: &CMatrix, decomp: &SpaceDecomposition) -> Result<()> {
    let d = decomp.code_dim();
    if rho_c.nrows() != d || rho_c.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", rho_c.nrows(), rho_c.ncols()),
        });
    }
    Ok(())
}

/// Traces out `H^A` from an operator on `C`.
pub fn partial_trace_a(rho_c: &CMatrix, decomp: &SpaceDecomposition) -> Result<CMatrix> {
    check_code_block(rho_c, decomp)?;
    let (da, db) = (decomp.dim_a(), decomp.dim_b());
    let mut out = zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            out[(k, l)] = (0..da)
                .map(|a| rho_c[(decomp.index(a, k), decomp.index(a, l))])
                .sum();
        }
    }
    Ok(out)
}

/// Traces out `H^B` from an operator on `C`.
pub fn partial_trace_b(rho_c: &CMatrix, decomp: &SpaceDecomposition) -> Result<CMatrix> {
    check_code_block(rho_c, decomp)?;
    let (da, db) = (decomp.dim_a(), decomp.dim_b());
    let mut out = zeros(da, da);
    for a in 0..da {
        for b in 0..da {
            out[(a, b)] = (0..db)
                .map(|k| rho_c[(decomp.index(a, k), decomp.index(b, k))])
                .sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Restriction {
    /// The `C × C` sub-block.
    pub block: CMatrix,
    /// `1 − tr(block)`: weight outside `C`.
    pub leak: f64,
}

pub fn restrict_to_c(rho: &CMatrix, decomp: &SpaceDecomposition) -> Result<Restriction> {
    decomp.check_square(rho)?;
    let d = decomp.code_dim();
    let block = rho.view((0, 0), (d, d)).into_owned();
    let leak = 1.0 - trace(&block).re;
    Ok(Restriction { block, leak })
}

/// Outcome of testing whether an operator on `C` is a product `ρ^A ⊗ σ^B`.
#[derive(Debug, Clone)]
pub struct ProductCheck {
    pub rho_a: CMatrix,
    pub sigma_b: CMatrix,
    /// `‖ρ_C − ρ^A ⊗ σ^B‖_F` for the partial-trace candidates.
    pub residual: f64,
    pub holds: bool,
}

/// Product test for a validated density operator on `C`.
pub fn factor_product(
    rho_c: &CMatrix,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<ProductCheck> {
    check_code_block(rho_c, decomp)?;
    validate_density(rho_c, tol)?;
    product_candidate(rho_c, decomp, tol)
}

/// Product test without the density-operator validation; the candidate factors
/// are the partial traces, rescaled so that `ρ^A ⊗ σ^B` has the trace of `ρ_C`.
/// `rho_a` keeps the full trace and `sigma_b` is normalized to unit trace when
/// possible.
pub(crate) fn product_candidate(
    rho_c: &CMatrix,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<ProductCheck> {
    let rho_a = partial_trace_b(rho_c, decomp)?;
    let mut sigma_b = partial_trace_a(rho_c, decomp)?;
    let t = trace(rho_c);
    if t.norm() > f64::EPSILON {
        sigma_b /= t;
    }
    let residual = frobenius_diff(rho_c, &rho_a.kronecker(&sigma_b));
    Ok(ProductCheck {
        rho_a,
        sigma_b,
        residual,
        holds: residual <= tol,
    })
}

/// Matrix of independent standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random state `G G† / tr(G G†)`.
pub fn sample_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let mut m = &g * dagger(&g);
    let t = trace(&m);
    m /= t;
    DensityOperator {
        matrix: crate::linalg::hermitize(&m),
    }
}

/// Random pure state from a normalized complex Gaussian vector.
pub fn sample_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, 1);
    DensityOperator::pure(g.as_slice()).expect("Gaussian vector is almost surely nonzero")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic Ginibre-ensemble state.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(sample_density(&mut seeded_rng(seed), dim))
}

pub fn random_pure_state(dim: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(sample_pure(&mut seeded_rng(seed), dim))
}
