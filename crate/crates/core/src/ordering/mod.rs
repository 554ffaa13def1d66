//! Degradability decisions, witnesses, and sampled checks of the weaker orderings.
//!
//! `second` is degradable from `first` when `second = φ ∘ first` for some channel
//! `φ`. A "not degradable" verdict always comes with a [`Witness`]: an encoding
//! under which `second` beats `first` at a guessing game, re-validated with the
//! measures of [`crate::infomeasures`] before it is returned.

pub(crate) mod classical;
mod frame;
mod quantum;
mod sampling;
mod witness;

use serde::{Deserialize, Serialize};

pub use classical::{classical_degradable, extract_classical_witness};
pub use frame::SeparationFrame;
pub use quantum::{extract_quantum_witness, quantum_degradable};
pub use sampling::{
    check_ambiguity_ensembles, check_ambiguity_sampled, check_coherence_probes, check_coherence_sampled,
    check_noisiness_encodings, check_noisiness_sampled, km_classify, km_search, CoherenceProbe, KmCandidate, KmConfig,
    ViolationReport, VIOLATION_TOL,
};
pub use witness::{ClassicalWitness, QuantumWitness, Witness};

use crate::channels::{ClassicalChannel, QuantumChannel};

/// Smallest gap a witness must achieve to count as validated.
pub const WITNESS_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradabilityStatus {
    Degradable,
    NotDegradable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DegradingMap {
    Classical { channel: ClassicalChannel },
    Quantum { channel: QuantumChannel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradabilityVerdict {
    pub status: DegradabilityStatus,
    /// Present iff degradable.
    pub degrading_map: Option<DegradingMap>,
    /// `‖φ ∘ first − second‖_max` for the returned map.
    pub residual: Option<f64>,
    /// Present iff not degradable.
    pub witness: Option<Witness>,
    /// Separating hyperplane read off the infeasibility certificate.
    pub frame: Option<SeparationFrame>,
    /// Normalized Farkas gap `yᵀb` of the verified certificate.
    pub certificate_gap: Option<f64>,
    pub tolerance: f64,
    /// Why the verdict is inconclusive, or notes about a retry.
    pub note: Option<String>,
}

impl DegradabilityVerdict {
    fn inconclusive(tolerance: f64, note: String) -> Self {
        Self {
            status: DegradabilityStatus::Inconclusive,
            degrading_map: None,
            residual: None,
            witness: None,
            frame: None,
            certificate_gap: None,
            tolerance,
            note: Some(note),
        }
    }

    pub fn is_degradable(&self) -> bool {
        self.status == DegradabilityStatus::Degradable
    }

    pub fn is_not_degradable(&self) -> bool {
        self.status == DegradabilityStatus::NotDegradable
    }
}

/// Solver tolerance used for a verdict at user tolerance `tol`.
fn solver_tol(tol: f64) -> f64 {
    (tol * 0.1).clamp(1e-10, 1e-4)
}
