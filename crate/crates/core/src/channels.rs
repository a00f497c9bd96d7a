//! Kraus-form channels and completely positive maps.

use std::ops::Deref;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{projector_pkl, SpaceDecomposition};
use crate::linalg::{
    c, dagger, frobenius, frobenius_diff, identity, kron, matrix_unit, zeros, CMatrix,
};
use crate::states::{ginibre, seeded_rng};

/// Kraus products with Frobenius norm below this are dropped by [`compose`].
pub const PRUNE_NORM: f64 = 1e-14;

/// A completely positive map `ρ ↦ Σ_a E_a ρ E_a†`, not necessarily trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct CPMap {
    operators: Vec<CMatrix>,
}

impl CPMap {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        check_shapes(&operators)?;
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        apply(self, rho)
    }

    /// Conjugates every operator by a basis permutation.
    pub fn permuted(&self, perm: &crate::hilbert::Permutation) -> Self {
        Self {
            operators: self.operators.iter().map(|e| perm.conjugate(e)).collect(),
        }
    }
}

fn check_shapes(operators: &[CMatrix]) -> Result<()> {
    let first = operators.first().ok_or(Error::EmptyChannel)?;
    let n = first.nrows();
    if n == 0 || operators.iter().any(|e| e.nrows() != n || e.ncols() != n) {
        return Err(Error::RaggedOperators);
    }
    Ok(())
}

/// A trace-preserving [`CPMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    map: CPMap,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>, tol: f64) -> Result<Self> {
        Self::from_map(CPMap::new(operators)?, tol)
    }

    pub fn from_map(map: CPMap, tol: f64) -> Result<Self> {
        let check = validate_cptp(map.operators(), tol)?;
        if !check.ok {
            return Err(Error::NotTracePreserving {
                residual: check.residual,
            });
        }
        Ok(Self { map })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            map: CPMap {
                operators: vec![identity(dim)],
            },
        }
    }

    pub fn as_map(&self) -> &CPMap {
        &self.map
    }

    pub fn into_operators(self) -> Vec<CMatrix> {
        self.map.operators
    }

    pub fn permuted(&self, perm: &crate::hilbert::Permutation) -> Self {
        Self {
            map: self.map.permuted(perm),
        }
    }
}

impl Deref for KrausChannel {
    type Target = CPMap;

    fn deref(&self) -> &CPMap {
        &self.map
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpCheck {
    pub ok: bool,
    /// `‖Σ E†E − I‖_F`
    pub residual: f64,
}

pub fn validate_cptp(operators: &[CMatrix], tol: f64) -> Result<CptpCheck> {
    check_shapes(operators)?;
    let n = operators[0].nrows();
    let mut sum = zeros(n, n);
    for e in operators {
        sum += e.ad_mul(e);
    }
    let residual = frobenius_diff(&sum, &identity(n));
    Ok(CptpCheck {
        ok: residual <= tol,
        residual,
    })
}

pub fn apply(map: &CPMap, rho: &CMatrix) -> Result<CMatrix> {
    let n = map.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", rho.nrows(), rho.ncols()),
        });
    }
    let mut out = zeros(n, n);
    for e in map.operators() {
        out += e * rho * dagger(e);
    }
    Ok(out)
}

/// `outer ∘ inner` with Kraus set `{R_c E_a}`; numerically zero products are dropped.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", outer.dim()),
            found: format!("{0}x{0}", inner.dim()),
        });
    }
    let mut operators = Vec::with_capacity(outer.len() * inner.len());
    for r in outer.operators() {
        for e in inner.operators() {
            let p = r * e;
            if frobenius(&p) >= PRUNE_NORM {
                operators.push(p);
            }
        }
    }
    if operators.is_empty() {
        // Unreachable for trace-preserving inputs.
        return Err(Error::EmptyChannel);
    }
    Ok(KrausChannel {
        map: CPMap { operators },
    })
}

/// Largest Frobenius discrepancy between two maps over the `d²` matrix units.
pub fn max_action_difference(a: &CPMap, b: &CPMap) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", a.dim()),
            found: format!("{0}x{0}", b.dim()),
        });
    }
    let n = a.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let unit = matrix_unit(n, i, j);
            worst = worst.max(frobenius_diff(&apply(a, &unit)?, &apply(b, &unit)?));
        }
    }
    Ok(worst)
}

/// The twirl `ρ ↦ Σ_{k<r₁, l<r} P_kl ρ P_kl†`.
///
/// Its action on `C` is `tr_B(ρ_C) ⊗ I^{B1}`.
pub fn gamma_map(decomp: &SpaceDecomposition) -> CPMap {
    let mut operators = Vec::with_capacity(decomp.dim_b1() * decomp.dim_b());
    for k in 0..decomp.dim_b1() {
        for l in 0..decomp.dim_b() {
            operators.push(projector_pkl(decomp, k, l).expect("indices in range"));
        }
    }
    CPMap { operators }
}

fn perp_dephasing(decomp: &SpaceDecomposition) -> impl Iterator<Item = CMatrix> + '_ {
    (0..decomp.dim_perp()).map(move |m| {
        let i = decomp.perp_index(m);
        matrix_unit(decomp.total_dim(), i, i)
    })
}

fn transformer(decomp: &SpaceDecomposition, targets: usize) -> KrausChannel {
    let w = c(1.0 / (targets as f64).sqrt(), 0.0);
    let mut operators = Vec::new();
    for k in 0..targets {
        for l in 0..decomp.dim_b() {
            operators.push(projector_pkl(decomp, k, l).expect("indices in range") * w);
        }
    }
    operators.extend(perp_dephasing(decomp));
    KrausChannel {
        map: CPMap { operators },
    }
}

/// Spreads the noisy factor uniformly over all of `H^B`:
/// Kraus set `{P_kl / √r : k, l < r} ∪ {|α_m⟩⟨α_m|}`.
pub fn build_eta1(decomp: &SpaceDecomposition) -> KrausChannel {
    transformer(decomp, decomp.dim_b())
}

/// Folds the noisy factor back onto `H^{B1}`:
/// Kraus set `{P_kl / √r₁ : k < r₁, l < r} ∪ {|α_m⟩⟨α_m|}`.
pub fn build_eta2(decomp: &SpaceDecomposition) -> KrausChannel {
    transformer(decomp, decomp.dim_b1())
}

#[derive(Debug, Clone)]
pub struct ExampleChannel {
    pub channel: KrausChannel,
    pub decomp: SpaceDecomposition,
}

/// The two-qubit channel `{F₀⊗|0⟩⟨1|, F₁⊗|0⟩⟨1|, I₂⊗|1⟩⟨0|}` with
/// `F₀ = diag(1, √(1−γ))`, `F₁ = √γ |0⟩⟨1|`, on `H^A = H^B = C²`, `H^{B1} = span|0⟩`.
///
/// It protects `A` when `B` starts in `|0⟩` while moving `B` to `|1⟩`.
pub fn example_channel(gamma: f64) -> Result<ExampleChannel> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let f0 = crate::linalg::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]]);
    let f1 = crate::linalg::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]);
    let lower = matrix_unit(2, 0, 1);
    let raise = matrix_unit(2, 1, 0);
    let operators = vec![
        kron(&f0, &lower),
        kron(&f1, &lower),
        kron(&identity(2), &raise),
    ];
    Ok(ExampleChannel {
        channel: KrausChannel {
            map: CPMap { operators },
        },
        decomp: SpaceDecomposition::new(2, 2, 1, 0)?,
    })
}

/// Haar-distributed isometry `rows × cols` (`rows ≥ cols`).
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    debug_assert!(rows >= cols);
    let qr = ginibre(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Splits a `(count·dim) × cols` stacked isometry into `count` blocks of `dim` rows.
fn slice_blocks(stacked: &CMatrix, dim: usize, count: usize) -> Vec<CMatrix> {
    (0..count)
        .map(|a| stacked.rows(a * dim, dim).into_owned())
        .collect()
}

/// Unstructured channel from a Haar-random Stinespring isometry.
pub fn random_channel(dim: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if dim == 0 || kraus_count == 0 {
        return Err(Error::InvalidParameter(
            "dim and kraus_count must be positive".into(),
        ));
    }
    let mut rng = seeded_rng(seed);
    let v = haar_isometry(&mut rng, dim * kraus_count, dim);
    Ok(KrausChannel {
        map: CPMap {
            operators: slice_blocks(&v, dim, kraus_count),
        },
    })
}

/// A channel that acts on `H^A ⊗ H^{B1}` as `I^A ⊗ M_a`, where `blocks[a] = M_a`
/// are `dim_b × dim_b1` matrices with `Σ M_a† M_a = I^{B1}`.
///
/// Columns outside `H^A ⊗ H^{B1}` get a random isometric completion, orthogonal
/// (in the stacked Stinespring space) to the prescribed columns, so the result
/// is trace preserving and leaves nothing from `H^{B1}` in `C^⊥`.
pub fn ampliate_channel<R: Rng + ?Sized>(
    decomp: &SpaceDecomposition,
    blocks: &[CMatrix],
    rng: &mut R,
) -> Result<KrausChannel> {
    let (da, db, r1) = (decomp.dim_a(), decomp.dim_b(), decomp.dim_b1());
    if blocks.is_empty() {
        return Err(Error::EmptyChannel);
    }
    if blocks.iter().any(|m| m.shape() != (db, r1)) {
        return Err(Error::DimensionMismatch {
            expected: format!("{db}x{r1} blocks"),
            found: format!("{:?}", blocks.iter().map(|m| m.shape()).collect::<Vec<_>>()),
        });
    }
    let mut gram = zeros(r1, r1);
    for m in blocks {
        gram += m.ad_mul(m);
    }
    let residual = frobenius_diff(&gram, &identity(r1));
    if residual > 1e-10 {
        return Err(Error::NotTracePreserving { residual });
    }

    let n = decomp.total_dim();
    let count = blocks.len();
    let stacked_dim = n * count;
    let code_cols: Vec<usize> = (0..da)
        .flat_map(|a| (0..r1).map(move |i| decomp.index(a, i)))
        .collect();
    let rest_cols: Vec<usize> = (0..n).filter(|j| !code_cols.contains(j)).collect();

    let mut stacked = zeros(stacked_dim, n);
    let mut prescribed = zeros(stacked_dim, code_cols.len());
    for (col, &j) in code_cols.iter().enumerate() {
        let (alpha, i) = (j / db, j % db);
        for (a, m) in blocks.iter().enumerate() {
            for l in 0..db {
                let row = a * n + decomp.index(alpha, l);
                stacked[(row, j)] = m[(l, i)];
                prescribed[(row, col)] = m[(l, i)];
            }
        }
    }

    if !rest_cols.is_empty() {
        let mut x = ginibre(rng, stacked_dim, rest_cols.len());
        // Two rounds of projection keep the completion orthogonal to working precision.
        for _ in 0..2 {
            let overlap = prescribed.ad_mul(&x);
            x -= &prescribed * overlap;
        }
        let q = x.qr().q();
        for (col, &j) in rest_cols.iter().enumerate() {
            stacked.set_column(j, &q.column(col));
        }
    }

    Ok(KrausChannel {
        map: CPMap {
            operators: slice_blocks(&stacked, n, count),
        },
    })
}

/// Positive-control generator: draws `M_a` by slicing a Haar isometry
/// `H^{B1} → H^B ⊗ C^{env_dim}` and builds [`ampliate_channel`].
pub fn random_ampliate_channel(
    decomp: &SpaceDecomposition,
    env_dim: usize,
    seed: u64,
) -> Result<KrausChannel> {
    let (db, r1) = (decomp.dim_b(), decomp.dim_b1());
    if env_dim == 0 || env_dim * db < r1 {
        return Err(Error::InvalidParameter(format!(
            "no isometry from dim {r1} into {db} x {env_dim}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let v = haar_isometry(&mut rng, db * env_dim, r1);
    let blocks = slice_blocks(&v, db, env_dim);
    ampliate_channel(decomp, &blocks, &mut rng)
}

/// The unitary channel `ρ ↦ U ρ U†`.
pub fn unitary_channel(u: CMatrix, tol: f64) -> Result<KrausChannel> {
    KrausChannel::new(vec![u], tol)
}
