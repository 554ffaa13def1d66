//! Degradability, ambiguity and coherence orderings between noisy channels.
//!
//! The crate decides whether one channel is a degraded version of another by
//! solving a conic feasibility program. When degradation fails it turns the
//! infeasibility certificate into a concrete encoding under which the
//! "better" channel loses information-theoretically.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, partial traces, Hermitian eigensolver.
//! - [`channels`]: classical and quantum channels (Choi operators), composition,
//!   embedding and seeded random generation.
//! - [`conic`]: a primal-dual interior-point solver for LP/SDP feasibility and
//!   maximisation that returns Farkas certificates.
//! - [`infomeasures`]: guessing probability, conditional entropies, conditional
//!   min-entropy and `q_corr`.
//! - [`ordering`]: degradability decisions, witness extraction and sampled
//!   ordering checks.
//! - [`document`]: JSON documents for channels, joints, states and ensembles.
//! - [`pairs`]: seeded random channel pairs, degradable or free.
//! - [`selftest`]: the acceptance suite.

pub mod channels;
pub mod conic;
pub mod document;
pub mod infomeasures;
pub mod linalg;
pub mod ordering;
pub mod pairs;
pub mod rng;
pub mod selftest;

use thiserror::Error;

pub use channels::{ClassicalChannel, KrausSet, MeasurePrepareChannel, QuantumChannel};
pub use conic::{ConicOutcome, ConicProgram};
pub use infomeasures::{CqEnsemble, JointDistribution};
pub use linalg::{ComplexMatrix, DimPair, Real, Subsystem};
pub use ordering::{DegradabilityStatus, DegradabilityVerdict, Witness};

/// Double-precision complex scalar used by the solver-facing layers.
pub type C64 = num_complex::Complex<f64>;
/// Double-precision complex matrix.
pub type CMatrix = ComplexMatrix<f64>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Conic(#[from] conic::ConicError),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
