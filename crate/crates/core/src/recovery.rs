//! Recovery synthesis from the correctability coefficients.
//!
//! With `T_(a,k) = E_a J_k`, where `J_k |ψ⟩ = |ψ⟩ ⊗ |β_k⟩`, correctability says
//! `T_μ† T_ν = Λ[μ, ν] · I^A`. Diagonalizing `Λ = V D V†` gives isometries
//! `S_m = d_m^{-1/2} Σ_μ V[μ, m] T_μ` with mutually orthogonal ranges, and the
//! recovery maps each range back onto `H^A ⊗ |β_0⟩`.

use crate::channels::{build_eta2, CPMap, KrausChannel, PRUNE_NORM};
use crate::conditions::check_correctable;
use crate::error::{Error, Result};
use crate::hilbert::SpaceDecomposition;
use crate::linalg::{
    fix_phase, frobenius, hermitian_eigen, hermitian_residual, identity, range_basis, trace, zeros,
    CMatrix,
};

/// Hermitian PSD matrix of correctability coefficients over the composite index
/// `μ = (a, k)`, stored at row `a · r₁ + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: CMatrix,
    kraus_count: usize,
    dim_b1: usize,
    source_tol: f64,
}

impl GramMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus_count
    }

    pub fn dim_b1(&self) -> usize {
        self.dim_b1
    }

    pub fn source_tol(&self) -> f64 {
        self.source_tol
    }

    #[inline]
    pub fn composite(&self, a: usize, k: usize) -> usize {
        a * self.dim_b1 + k
    }

    pub fn hermitian_residual(&self) -> f64 {
        hermitian_residual(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue(&self.matrix)
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }
}

pub fn build_gram(e: &KrausChannel, decomp: &SpaceDecomposition, tol: f64) -> Result<GramMatrix> {
    let report = check_correctable(e, decomp, tol)?;
    if !report.holds {
        return Err(Error::NotCorrectable(Box::new(report)));
    }
    let r1 = decomp.dim_b1();
    let n = e.len() * r1;
    let mut matrix = zeros(n, n);
    for (key, lambda) in &report.lambda_table {
        let (a, b, k, l) = (key[0], key[1], key[2], key[3]);
        matrix[(a * r1 + k, b * r1 + l)] = *lambda;
    }
    Ok(GramMatrix {
        matrix,
        kraus_count: e.len(),
        dim_b1: r1,
        source_tol: tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub rank: usize,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
}

pub fn rank_profile(g: &GramMatrix, tol: f64) -> RankProfile {
    let eigenvalues = hermitian_eigen(&g.matrix).0;
    let rank = eigenvalues.iter().filter(|&&v| v > tol).count();
    RankProfile { rank, eigenvalues }
}

/// `T_(a,k) = E_a J_k` for `a` over Kraus operators and `k < r₁`, in composite order.
pub fn transfer_operators(e: &KrausChannel, decomp: &SpaceDecomposition) -> Result<Vec<CMatrix>> {
    let embeddings = (0..decomp.dim_b1())
        .map(|k| decomp.b_embedding(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(e.operators()
        .iter()
        .flat_map(|op| embeddings.iter().map(move |j| op * j))
        .collect())
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub channel: KrausChannel,
    /// The `total_dim × dim_a` isometries `S_m`, one per kept eigenvalue.
    pub isometries: Vec<CMatrix>,
    /// Kept Gram eigenvalues `d_m`, descending.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Builds a recovery `R` with `(R ∘ E)(ρ^A ⊗ I^{B1}/r₁) = ρ^A ⊗ |β_0⟩⟨β_0|`.
///
/// Kraus operators are `W_m = J_0 S_m†`; the orthogonal complement `Q` of the
/// ranges of the `S_m` is handled by `{K Q : K ∈ η₂}`, which folds whatever is
/// there onto `H^A ⊗ H^{B1}` and dephases `C^⊥`.
pub fn synthesize_recovery(
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<Recovery> {
    let gram = build_gram(e, decomp, tol)?;
    let (values, vectors) = hermitian_eigen(gram.matrix());
    let transfers = transfer_operators(e, decomp)?;
    let n = decomp.total_dim();
    let mut warnings = Vec::new();

    let kept: Vec<usize> = (0..values.len()).filter(|&m| values[m] > tol).collect();
    for &v in &values {
        if v > tol / 10.0 && v <= tol {
            warnings.push(format!(
                "Gram eigenvalue {v:.3e} lies between tol/10 and tol; treated as zero"
            ));
        }
    }
    for w in kept.windows(2) {
        if (values[w[0]] - values[w[1]]).abs() <= tol {
            warnings.push(format!(
                "degenerate Gram eigenvalue {:.6}; eigenvector basis follows the diagonalizer",
                values[w[0]]
            ));
        }
    }

    let mut isometries = Vec::with_capacity(kept.len());
    for &m in &kept {
        let mut column: Vec<_> = vectors.column(m).iter().copied().collect();
        fix_phase(&mut column);
        let mut s = zeros(n, decomp.dim_a());
        for (mu, t) in transfers.iter().enumerate() {
            s += t * column[mu];
        }
        s /= num_complex::Complex64::new(values[m].sqrt(), 0.0);
        isometries.push(s);
    }

    let landing = decomp.b_embedding(0)?;
    let mut operators: Vec<CMatrix> = isometries.iter().map(|s| &landing * s.adjoint()).collect();

    let mut covered = zeros(n, n);
    for s in &isometries {
        covered += s * s.adjoint();
    }
    let complement = range_basis(&(identity(n) - covered), 0.5);
    if complement.ncols() > 0 {
        let q = &complement * complement.adjoint();
        for k in build_eta2(decomp).operators() {
            let op = k * &q;
            if frobenius(&op) >= PRUNE_NORM {
                operators.push(op);
            }
        }
    }

    let channel = KrausChannel::from_map(CPMap::new(operators)?, 10.0 * tol.max(1e-12))?;
    Ok(Recovery {
        channel,
        isometries,
        eigenvalues: kept.iter().map(|&m| values[m]).collect(),
        warnings,
    })
}
