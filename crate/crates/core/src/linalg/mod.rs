//! Dense complex linear algebra for small operators.
//!
//! Everything here is generic over the real scalar type ([`Real`], implemented
//! for `f32` and `f64`). Matrices are stored row-major. Bipartite operators use
//! the lexicographic index order: composite index `(i, j)` maps to
//! `i * d_second + j`, where `i` labels the first tensor factor.

mod decomp;
mod matrix;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};
use thiserror::Error;

pub use decomp::{cholesky, eigh, eigvalsh, hermitian_map, max_eigenvalue, min_eigenvalue, svd};
pub use matrix::{kron, max_entangled, partial_trace, partial_transpose, ComplexMatrix};

/// Real scalar usable as the base field of [`ComplexMatrix`].
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `Real` can represent (a rounding of) any finite `f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Tolerance on `‖H − H†‖ / ‖H‖₂` below which a matrix counts as Hermitian.
    fn hermitian_tol() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Which factor of a bipartite space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

/// Dimensions of a bipartite space `H_first ⊗ H_second`.
///
/// For channels `d_in` is the input dimension and `d_out` the output dimension,
/// matching the Choi operator layout `input ⊗ output`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DimPair {
    pub d_in: usize,
    pub d_out: usize,
}

impl DimPair {
    pub fn new(d_in: usize, d_out: usize) -> Result<Self, LinalgError> {
        if d_in == 0 || d_out == 0 {
            return Err(LinalgError::ZeroDimension);
        }
        Ok(Self { d_in, d_out })
    }

    /// Side of the composite square matrix.
    pub fn total(&self) -> usize {
        self.d_in * self.d_out
    }

    pub fn swapped(&self) -> Self {
        Self { d_in: self.d_out, d_out: self.d_in }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub(crate) fn mismatch(expected: impl Into<String>, got: impl Into<String>) -> LinalgError {
    LinalgError::DimensionMismatch { expected: expected.into(), got: got.into() }
}
