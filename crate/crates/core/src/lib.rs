//! Numerical verification of noiseless-subsystem and correctability conditions
//! for finite-dimensional Kraus channels, with recovery synthesis.
//!
//! The Hilbert space is `H = (H^A ⊗ H^B) ⊕ C^⊥` with `H^B = H^{B1} ⊕ H^{B2}`;
//! information lives in `A`, the noisy factor starts in `B1` and may be spread
//! over all of `B` by the channel. See [`hilbert`] for the basis convention.

pub mod channels;
pub mod conditions;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod recovery;
pub mod states;

pub use channels::{CPMap, KrausChannel};
pub use conditions::{ConditionReport, SupportCase, Witness, WitnessKind};
pub use error::{Error, Result};
pub use hilbert::SpaceDecomposition;
pub use linalg::CMatrix;
pub use recovery::GramMatrix;
pub use states::{DensityOperator, Subspace};

/// Default residual tolerance (Frobenius norm).
pub const DEFAULT_TOL: f64 = 1e-9;
