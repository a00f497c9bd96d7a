//! Decision procedures for noiseless subsystems and correctability.
//!
//! The algebraic checkers reduce each condition to a finite set of `dim_A × dim_A`
//! blocks that must be scalar multiples of the identity; the sampling oracle
//! tests the defining state-level statements directly and is kept independent
//! of the block machinery.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::{a_block, block_projectors, scalar_fit, SpaceDecomposition};
use crate::linalg::{frobenius, frobenius_diff, identity, matrix_unit, zeros, CMatrix};
use crate::states::{
    partial_trace_a, product_candidate, restrict_to_c, sample_density, seeded_rng, support,
    validate_density,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// A block that should be proportional to `I^A` is not.
    BlockNotScalar,
    /// A Kraus operator moves weight from `H^A ⊗ H^{B1}` into `C^⊥`.
    Leakage,
    /// A channel output differs from the required product form.
    OutputMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub indices: Vec<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub holds: bool,
    pub tolerance: f64,
    /// Proportionality coefficients keyed by `(a, l, i)` or `(a, b, k, l)`.
    pub lambda_table: BTreeMap<Vec<usize>, Complex64>,
    pub max_residual: f64,
    /// First violation in lexicographic order; present iff `!holds`.
    pub witness: Option<Witness>,
}

impl ConditionReport {
    fn new(tolerance: f64) -> Self {
        Self {
            holds: true,
            tolerance,
            lambda_table: BTreeMap::new(),
            max_residual: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, kind: WitnessKind, indices: Vec<usize>, residual: f64) {
        self.max_residual = self.max_residual.max(residual);
        if residual > self.tolerance {
            self.holds = false;
            if self.witness.is_none() {
                self.witness = Some(Witness {
                    kind,
                    indices,
                    residual,
                });
            }
        }
    }

    pub fn lambda(&self, key: &[usize]) -> Option<Complex64> {
        self.lambda_table.get(key).copied()
    }
}

fn check_channel(e: &KrausChannel, decomp: &SpaceDecomposition) -> Result<()> {
    if e.dim() != decomp.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", decomp.total_dim()),
            found: format!("{0}x{0}", e.dim()),
        });
    }
    Ok(())
}

/// Whether `A` survives every input `ρ^A ⊗ ρ^{B1}` with the noisy factor allowed
/// to land anywhere in `H^B`.
///
/// Checks, for every Kraus operator `E_a`, that each block
/// `⟨·, β_l| E_a |·, β_i⟩` (`l < r`, `i < r₁`) is `λ[a,l,i] · I^A`, and that
/// `P_B^⊥ E_a P_{B1} = 0`. Witness indices are `[a, l, i]` for a block and `[a]`
/// for leakage.
pub fn check_ampliate_noiseless(
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<ConditionReport> {
    check_channel(e, decomp)?;
    let projectors = block_projectors(decomp);
    let mut report = ConditionReport::new(tol);
    for (a, op) in e.operators().iter().enumerate() {
        for l in 0..decomp.dim_b() {
            for i in 0..decomp.dim_b1() {
                let (lambda, residual) = scalar_fit(&a_block(op, decomp, l, i)?);
                report.lambda_table.insert(vec![a, l, i], lambda);
                report.record(WitnessKind::BlockNotScalar, vec![a, l, i], residual);
            }
        }
        let leak = frobenius(&(&projectors.p_b_perp * op * &projectors.p_b1));
        report.record(WitnessKind::Leakage, vec![a], leak);
    }
    Ok(report)
}

/// The stricter condition where the noisy factor must stay inside `H^{B1}`.
///
/// Runs [`check_ampliate_noiseless`] on the decomposition with `B := B1`, after
/// reordering the basis so `H^A ⊗ H^{B1}` is contiguous.
pub fn check_normal_noiseless(
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<ConditionReport> {
    check_channel(e, decomp)?;
    let (reduced, perm) = decomp.b1_reading();
    check_ampliate_noiseless(&e.permuted(&perm), &reduced, tol)
}

/// Whether `P_kk E_a† E_b P_ll = λ[a,b,k,l] P_kl` for all `a, b` and `k, l < r₁`.
pub fn check_correctable(
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<ConditionReport> {
    check_channel(e, decomp)?;
    let mut report = ConditionReport::new(tol);
    let ops = e.operators();
    for (a, ea) in ops.iter().enumerate() {
        for (b, eb) in ops.iter().enumerate() {
            let product = ea.ad_mul(eb);
            for k in 0..decomp.dim_b1() {
                for l in 0..decomp.dim_b1() {
                    let (lambda, residual) = scalar_fit(&a_block(&product, decomp, k, l)?);
                    report.lambda_table.insert(vec![a, b, k, l], lambda);
                    report.record(WitnessKind::BlockNotScalar, vec![a, b, k, l], residual);
                }
            }
        }
    }
    Ok(report)
}

/// Outcome of the correctability test for a recovery / error pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrupleReport {
    pub holds: bool,
    pub tolerance: f64,
    /// The common `B` state, when one could be extracted.
    pub sigma: Option<CMatrix>,
    pub residual: f64,
    /// Index `[m]` of the first failing basis input.
    pub witness: Option<Witness>,
}

/// A Hermitian spanning family of operators on `C^d`: `I/d`, every `|α⟩⟨α|`,
/// and the symmetric and antisymmetric combinations of off-diagonal units.
pub fn hermitian_spanning_family(d: usize) -> Vec<CMatrix> {
    let mut family = vec![identity(d) / Complex64::new(d as f64, 0.0)];
    for alpha in 0..d {
        family.push(matrix_unit(d, alpha, alpha));
    }
    let i = Complex64::new(0.0, 1.0);
    for alpha in 0..d {
        for beta in alpha + 1..d {
            let up = matrix_unit(d, alpha, beta);
            let down = matrix_unit(d, beta, alpha);
            family.push(&up + &down);
            family.push((up - down) * i);
        }
    }
    family
}

/// Whether `(R ∘ E)(ρ^A ⊗ I^{B1}/r₁) = ρ^A ⊗ σ` for one `σ` shared by all `ρ^A`.
///
/// `σ` is read off the maximally mixed `A` input; every other member of
/// [`hermitian_spanning_family`] must then map to `h ⊗ σ`. `σ` must be a
/// density operator on `H^B` (nothing left in `C^⊥`).
pub fn check_quadruple(
    recovery: &KrausChannel,
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<QuadrupleReport> {
    check_channel(e, decomp)?;
    check_channel(recovery, decomp)?;
    let uniform = decomp.uniform_b1();
    let family = hermitian_spanning_family(decomp.dim_a());
    let run = |h: &CMatrix| -> Result<CMatrix> {
        let input = decomp.embed_product(h, &uniform)?;
        recovery.apply(&e.apply(&input)?)
    };

    let first = run(&family[0])?;
    let block = restrict_to_c(&first, decomp)?.block;
    let sigma = partial_trace_a(&block, decomp)?;

    let mut report = QuadrupleReport {
        holds: true,
        tolerance: tol,
        sigma: None,
        residual: 0.0,
        witness: None,
    };
    let note = |m: usize, residual: f64, report: &mut QuadrupleReport| {
        report.residual = report.residual.max(residual);
        if residual > tol {
            report.holds = false;
            if report.witness.is_none() {
                report.witness = Some(Witness {
                    kind: WitnessKind::OutputMismatch,
                    indices: vec![m],
                    residual,
                });
            }
        }
    };

    for (m, h) in family.iter().enumerate() {
        let out = if m == 0 { first.clone() } else { run(h)? };
        let expected = decomp.embed_product(h, &sigma)?;
        note(m, frobenius_diff(&out, &expected), &mut report);
    }
    if validate_density(&sigma, tol).is_err() {
        report.holds = false;
    }
    report.sigma = Some(sigma);
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub holds: bool,
    pub worst_residual: f64,
    /// `σ_k` for each basis input `|β_k⟩⟨β_k|`, `k < r₁`.
    pub per_basis_sigmas: Vec<CMatrix>,
}

/// Random inputs per basis state used to test that `σ_k` does not depend on `ρ^A`.
const BASIS_PROBES: usize = 3;

/// Sampling test of `∀ρ^{B1} ∀ρ^A ∃σ^B : E(ρ^A ⊗ ρ^{B1}) = ρ^A ⊗ σ^B`.
///
/// Draws `samples` random `(ρ^A, ρ^{B1})` pairs and requires every output to sit
/// in `C`, be a product, and carry `ρ^A` unchanged. For each basis state of
/// `H^{B1}` it also checks that the `B` output is the same for several random
/// `ρ^A`. Sampling cannot certify a universal statement; see
/// [`check_ampliate_noiseless`] for the exact test.
pub fn bruteforce_noiseless_oracle(
    e: &KrausChannel,
    decomp: &SpaceDecomposition,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<OracleReport> {
    check_channel(e, decomp)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let (da, r1) = (decomp.dim_a(), decomp.dim_b1());

    // Deviation of E(ρ^A ⊗ τ) from ρ^A ⊗ σ, returning (residual, σ).
    let probe = |rho_a: &CMatrix, tau_b: &CMatrix| -> Result<(f64, CMatrix)> {
        let out = e.apply(&decomp.embed_product(rho_a, tau_b)?)?;
        let restricted = restrict_to_c(&out, decomp)?;
        let product = product_candidate(&restricted.block, decomp, tol)?;
        let carried = frobenius_diff(&product.rho_a, rho_a);
        let residual = restricted.leak.abs().max(product.residual).max(carried);
        Ok((residual, product.sigma_b))
    };

    let mut worst = 0.0f64;
    for _ in 0..samples {
        let rho_a = sample_density(&mut rng, da);
        let rho_b1 = sample_density(&mut rng, r1);
        let (residual, _) = probe(rho_a.matrix(), &decomp.pad_b1(rho_b1.matrix())?)?;
        worst = worst.max(residual);
    }

    let mut per_basis_sigmas = Vec::with_capacity(r1);
    for k in 0..r1 {
        let basis = matrix_unit(decomp.dim_b(), k, k);
        let mut reference: Option<CMatrix> = None;
        for _ in 0..BASIS_PROBES {
            let rho_a = sample_density(&mut rng, da);
            let (residual, sigma) = probe(rho_a.matrix(), &basis)?;
            worst = worst.max(residual);
            match &reference {
                Some(first) => worst = worst.max(frobenius_diff(first, &sigma)),
                None => reference = Some(sigma),
            }
        }
        per_basis_sigmas.push(reference.unwrap_or_else(|| zeros(1, 1)));
    }

    Ok(OracleReport {
        holds: worst <= tol,
        worst_residual: worst,
        per_basis_sigmas,
    })
}

/// How the supports of an input/output pair `(ρ₁, ρ₂)` on `H^B` relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportCase {
    /// `sup(ρ₁)` is all of `H^B`.
    CaseA,
    /// `sup(ρ₁)` is proper and contains `sup(ρ₂)`.
    CaseB,
    /// `sup(ρ₁)` is proper and misses part of `sup(ρ₂)`.
    CaseC,
}

pub fn classify_support_case(
    rho1: &CMatrix,
    rho2: &CMatrix,
    decomp: &SpaceDecomposition,
    tol: f64,
) -> Result<SupportCase> {
    let db = decomp.dim_b();
    for m in [rho1, rho2] {
        if m.shape() != (db, db) {
            return Err(Error::DimensionMismatch {
                expected: format!("{db}x{db}"),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
    }
    let s1 = support(rho1, tol)?;
    if s1.dim() == db {
        return Ok(SupportCase::CaseA);
    }
    let s2 = support(rho2, tol)?;
    Ok(if s1.contains(&s2, tol) {
        SupportCase::CaseB
    } else {
        SupportCase::CaseC
    })
}

/// Sum over `a` of `λ[a,a,k,k]` for each `k`; equals 1 for trace-preserving channels.
pub fn lambda_normalization(
    report: &ConditionReport,
    kraus_count: usize,
    r1: usize,
) -> Vec<Complex64> {
    (0..r1)
        .map(|k| {
            (0..kraus_count)
                .filter_map(|a| report.lambda(&[a, a, k, k]))
                .sum::<Complex64>()
        })
        .collect()
}
