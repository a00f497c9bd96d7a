//! Decomposition `H = (H^A ⊗ H^B) ⊕ C^⊥` with `H^B = H^{B1} ⊕ H^{B2}`, plus
//! the projector and partial-isometry constructions built on it.
//!
//! Index convention: the basis state `|e_α⟩ ⊗ |β_k⟩` of the code space `C`
//! sits at `α · dim_b + k` (A-major), and the `dim_perp` trailing indices span
//! `C^⊥`. `H^{B1}` is spanned by the first `dim_b1` basis states of `H^B`.
//! All indices in this crate are zero-based.

use crate::error::{Error, Result};
use crate::linalg::{frobenius_diff, identity, zeros, CMatrix, ONE};

/// Dimensions of the nested decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDecomposition {
    dim_a: usize,
    dim_b: usize,
    dim_b1: usize,
    dim_perp: usize,
}

impl SpaceDecomposition {
    pub fn new(dim_a: usize, dim_b: usize, dim_b1: usize, dim_perp: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidDecomposition(
                "dim_A and dim_B must be positive".into(),
            ));
        }
        if dim_b1 == 0 || dim_b1 > dim_b {
            return Err(Error::InvalidDecomposition(format!(
                "need 1 <= dim_B1 <= dim_B, got dim_B1 = {dim_b1}, dim_B = {dim_b}"
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            dim_b1,
            dim_perp,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    /// `r` in the usual notation.
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `r₁` in the usual notation.
    pub fn dim_b1(&self) -> usize {
        self.dim_b1
    }

    pub fn dim_perp(&self) -> usize {
        self.dim_perp
    }

    /// Dimension of the code space `C = H^A ⊗ H^B`.
    pub fn code_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn total_dim(&self) -> usize {
        self.code_dim() + self.dim_perp
    }

    /// Composite index of `|e_α⟩ ⊗ |β_k⟩`.
    #[inline]
    pub fn index(&self, alpha: usize, k: usize) -> usize {
        alpha * self.dim_b + k
    }

    /// Index of the `m`-th basis state of `C^⊥`.
    #[inline]
    pub fn perp_index(&self, m: usize) -> usize {
        self.code_dim() + m
    }

    pub(crate) fn check_square(&self, m: &CMatrix) -> Result<()> {
        let n = self.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(())
    }

    fn check_b_index(&self, k: usize) -> Result<()> {
        if k >= self.dim_b {
            return Err(Error::IndexOutOfRange {
                index: k,
                bound: self.dim_b,
            });
        }
        Ok(())
    }

    /// Places a `code_dim × code_dim` block into the top-left corner of a
    /// `total_dim × total_dim` zero matrix.
    pub fn embed_code_block(&self, block: &CMatrix) -> Result<CMatrix> {
        let d = self.code_dim();
        if block.nrows() != d || block.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d}"),
                found: format!("{}x{}", block.nrows(), block.ncols()),
            });
        }
        let mut out = zeros(self.total_dim(), self.total_dim());
        out.view_mut((0, 0), (d, d)).copy_from(block);
        Ok(out)
    }

    /// Pads an operator on `H^{B1}` to `H^B` (zero on `H^{B2}`).
    pub fn pad_b1(&self, m: &CMatrix) -> Result<CMatrix> {
        let r1 = self.dim_b1;
        if m.nrows() != r1 || m.ncols() != r1 {
            return Err(Error::DimensionMismatch {
                expected: format!("{r1}x{r1}"),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        let mut out = zeros(self.dim_b, self.dim_b);
        out.view_mut((0, 0), (r1, r1)).copy_from(m);
        Ok(out)
    }

    /// `x_A ⊗ y_B` placed on `C` inside `H`.
    pub fn embed_product(&self, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
        if a.shape() != (self.dim_a, self.dim_a) || b.shape() != (self.dim_b, self.dim_b) {
            return Err(Error::DimensionMismatch {
                expected: format!("A {0}x{0}, B {1}x{1}", self.dim_a, self.dim_b),
                found: format!("A {:?}, B {:?}", a.shape(), b.shape()),
            });
        }
        self.embed_code_block(&a.kronecker(b))
    }

    /// The uniform state `I^{B1} / r₁` written on `H^B`.
    pub fn uniform_b1(&self) -> CMatrix {
        let mut m = zeros(self.dim_b, self.dim_b);
        let w = 1.0 / self.dim_b1 as f64;
        for k in 0..self.dim_b1 {
            m[(k, k)] = ONE * w;
        }
        m
    }

    /// The isometry `|ψ⟩ ↦ |ψ⟩ ⊗ |β_k⟩` from `H^A` into `H` (`total_dim × dim_a`).
    pub fn b_embedding(&self, k: usize) -> Result<CMatrix> {
        self.check_b_index(k)?;
        let mut j = zeros(self.total_dim(), self.dim_a);
        for alpha in 0..self.dim_a {
            j[(self.index(alpha, k), alpha)] = ONE;
        }
        Ok(j)
    }

    /// The decomposition that treats `H^{B1}` as the whole noisy factor, and
    /// the basis permutation that realizes it.
    ///
    /// In the new ordering `H^A ⊗ H^{B1}` comes first (A-major), followed by
    /// `H^A ⊗ H^{B2}` and the old `C^⊥`, which together form the new `C^⊥`.
    pub fn b1_reading(&self) -> (SpaceDecomposition, Permutation) {
        let reduced = SpaceDecomposition {
            dim_a: self.dim_a,
            dim_b: self.dim_b1,
            dim_b1: self.dim_b1,
            dim_perp: self.dim_perp + self.dim_a * (self.dim_b - self.dim_b1),
        };
        let mut order = Vec::with_capacity(self.total_dim());
        for alpha in 0..self.dim_a {
            for k in 0..self.dim_b1 {
                order.push(self.index(alpha, k));
            }
        }
        for alpha in 0..self.dim_a {
            for k in self.dim_b1..self.dim_b {
                order.push(self.index(alpha, k));
            }
        }
        order.extend(self.code_dim()..self.total_dim());
        (reduced, Permutation { order })
    }
}

/// A basis reordering: new basis state `i` is old basis state `order[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The unitary `U` with `U |old_{order[i]}⟩ = |new_i⟩`.
    pub fn matrix(&self) -> CMatrix {
        let n = self.order.len();
        let mut u = zeros(n, n);
        for (new, &old) in self.order.iter().enumerate() {
            u[(new, old)] = ONE;
        }
        u
    }

    /// Re-expresses an operator written in the old basis in the new one.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            m[(self.order[i], self.order[j])]
        })
    }
}

/// `P_{kl} = I^A ⊗ |β_k⟩⟨β_l|`, zero on `C^⊥`.
pub fn projector_pkl(decomp: &SpaceDecomposition, k: usize, l: usize) -> Result<CMatrix> {
    decomp.check_b_index(k)?;
    decomp.check_b_index(l)?;
    let mut p = zeros(decomp.total_dim(), decomp.total_dim());
    for alpha in 0..decomp.dim_a {
        p[(decomp.index(alpha, k), decomp.index(alpha, l))] = ONE;
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct BlockProjectors {
    /// Projector onto `C`.
    pub p_b: CMatrix,
    /// Projector onto `H^A ⊗ H^{B1}`.
    pub p_b1: CMatrix,
    /// Projector onto `C^⊥`.
    pub p_b_perp: CMatrix,
}

pub fn block_projectors(decomp: &SpaceDecomposition) -> BlockProjectors {
    let n = decomp.total_dim();
    let mut p_b = zeros(n, n);
    let mut p_b1 = zeros(n, n);
    for alpha in 0..decomp.dim_a {
        for k in 0..decomp.dim_b {
            let i = decomp.index(alpha, k);
            p_b[(i, i)] = ONE;
            if k < decomp.dim_b1 {
                p_b1[(i, i)] = ONE;
            }
        }
    }
    let p_b_perp = identity(n) - &p_b;
    BlockProjectors {
        p_b,
        p_b1,
        p_b_perp,
    }
}

/// The `dim_a × dim_a` block `G[α, α'] = ⟨e_α, β_l| E |e_α', β_i⟩`.
///
/// For any `k, j` it satisfies `P_{kl} E P_{ij} = G ⊗ |β_k⟩⟨β_j|`.
pub fn a_block(e: &CMatrix, decomp: &SpaceDecomposition, l: usize, i: usize) -> Result<CMatrix> {
    decomp.check_square(e)?;
    decomp.check_b_index(l)?;
    decomp.check_b_index(i)?;
    Ok(CMatrix::from_fn(decomp.dim_a, decomp.dim_a, |a, b| {
        e[(decomp.index(a, l), decomp.index(b, i))]
    }))
}

/// `‖G − (tr G / d)·I‖_F` together with the least-squares coefficient `tr G / d`.
pub fn scalar_fit(g: &CMatrix) -> (num_complex::Complex64, f64) {
    let d = g.nrows();
    let lambda = crate::linalg::trace(g) / d as f64;
    let residual = frobenius_diff(g, &(identity(d) * lambda));
    (lambda, residual)
}
