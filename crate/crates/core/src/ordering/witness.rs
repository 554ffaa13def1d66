use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channels::{compose, ClassicalChannel, MeasurePrepareChannel, QuantumChannel};
use crate::infomeasures::{hmin_general, pguess_classical, CqEnsemble, JointDistribution};
use crate::linalg::{hermitian_map, DimPair};
use crate::{CMatrix, Result};

/// Encoding `p(x|u)` over `u ∈ Z` with prior `p(u)` under which the second
/// channel is strictly easier to decode: `pguess(U|Y) < pguess(U|Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalWitness {
    pub prior: Vec<f64>,
    /// Channel `U → X`.
    pub encoding: ClassicalChannel,
    /// Whether the prior is uniform.
    pub uniform: bool,
    /// `pguess(U|Y)` through the first channel.
    pub pguess_first: f64,
    /// `pguess(U|Z)` through the second channel.
    pub pguess_second: f64,
}

impl ClassicalWitness {
    pub(crate) fn evaluate(
        prior: Vec<f64>,
        encoding: ClassicalChannel,
        uniform: bool,
        first: &ClassicalChannel,
        second: &ClassicalChannel,
    ) -> Result<Self> {
        let pguess_first = pguess_classical(&JointDistribution::from_encoding(&prior, &encoding, first)?);
        let pguess_second = pguess_classical(&JointDistribution::from_encoding(&prior, &encoding, second)?);
        Ok(Self { prior, encoding, uniform, pguess_first, pguess_second })
    }

    /// Recomputes both guessing probabilities and returns `pguess(U|Z) − pguess(U|Y)`.
    pub fn validate(&self, first: &ClassicalChannel, second: &ClassicalChannel) -> Result<f64> {
        let again = Self::evaluate(self.prior.clone(), self.encoding.clone(), self.uniform, first, second)?;
        Ok(again.pguess_second - again.pguess_first)
    }

    pub fn gap(&self) -> f64 {
        self.pguess_second - self.pguess_first
    }

    /// The witness as a classical-quantum ensemble of diagonal states.
    pub fn ensemble(&self) -> Result<CqEnsemble> {
        CqEnsemble::classical(self.prior.clone(), &self.encoding)
    }
}

/// Entanglement-breaking encoder `Γ: R → A` (with `R ≅ B'`) and a pure reference
/// state on `R̄ ⊗ R` for which `H_min(R̄|B)_ρ > H_min(R̄|B')_σ`.
///
/// The reference is `|φ⟩ = Σ_j √M|j⟩ ⊗ |j⟩` for a density operator `M` on `R̄`;
/// `M = I/d` gives the maximally entangled state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumWitness {
    pub encoder: MeasurePrepareChannel,
    pub reference_weights: CMatrix,
    pub maximally_entangled: bool,
    /// `H_min(R̄|B)` through the first channel.
    pub hmin_first: f64,
    /// `H_min(R̄|B')` through the second channel.
    pub hmin_second: f64,
}

impl QuantumWitness {
    pub(crate) fn evaluate(
        encoder: MeasurePrepareChannel,
        reference_weights: CMatrix,
        maximally_entangled: bool,
        first: &QuantumChannel,
        second: &QuantumChannel,
    ) -> Result<Self> {
        let mut w = Self { encoder, reference_weights, maximally_entangled, hmin_first: 0.0, hmin_second: 0.0 };
        let (rho, sigma) = w.states(first, second)?;
        let d_r = w.reference_dim();
        w.hmin_first = hmin_general(&rho, DimPair::new(d_r, first.d_out())?)?;
        w.hmin_second = hmin_general(&sigma, DimPair::new(d_r, second.d_out())?)?;
        Ok(w)
    }

    pub fn reference_dim(&self) -> usize {
        self.reference_weights.rows()
    }

    /// `|φ⟩⟨φ|` on `R̄ ⊗ R`.
    pub fn reference_state(&self) -> Result<CMatrix> {
        let d = self.reference_dim();
        let root = hermitian_map(&self.reference_weights, |x| x.max(0.0).sqrt())?;
        let mut v = vec![Complex::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                v[i * d + j] = root[(i, j)];
            }
        }
        Ok(CMatrix::outer(&v))
    }

    /// `ρ = (id ⊗ N∘Γ)(φ)` and `σ = (id ⊗ N'∘Γ)(φ)`.
    pub fn states(&self, first: &QuantumChannel, second: &QuantumChannel) -> Result<(CMatrix, CMatrix)> {
        let gamma = self.encoder.to_channel();
        let phi = self.reference_state()?;
        let d_r = self.reference_dim();
        let rho = compose(first, &gamma)?.apply_second(&phi, d_r)?;
        let sigma = compose(second, &gamma)?.apply_second(&phi, d_r)?;
        Ok((rho, sigma))
    }

    /// Recomputes both min-entropies and returns `H_min(R̄|B)_ρ − H_min(R̄|B')_σ`.
    pub fn validate(&self, first: &QuantumChannel, second: &QuantumChannel) -> Result<f64> {
        let again = Self::evaluate(
            self.encoder.clone(),
            self.reference_weights.clone(),
            self.maximally_entangled,
            first,
            second,
        )?;
        Ok(again.hmin_first - again.hmin_second)
    }

    pub fn gap(&self) -> f64 {
        self.hmin_first - self.hmin_second
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Classical(ClassicalWitness),
    Quantum(QuantumWitness),
}

impl Witness {
    /// Strict-inequality margin: the `pguess` gap classically, the `H_min` gap
    /// (in bits) quantumly.
    pub fn margin(&self) -> f64 {
        match self {
            Witness::Classical(w) => w.gap(),
            Witness::Quantum(w) => w.gap(),
        }
    }

    /// Gap on the probability scale: `pguess(U|Z) − pguess(U|Y)`, or
    /// `q_corr(σ) − q_corr(ρ) = 2^{−H_min(σ)} − 2^{−H_min(ρ)}`.
    pub fn probability_gap(&self) -> f64 {
        match self {
            Witness::Classical(w) => w.gap(),
            Witness::Quantum(w) => 2f64.powf(-w.hmin_second) - 2f64.powf(-w.hmin_first),
        }
    }
}
