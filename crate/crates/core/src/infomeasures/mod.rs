//! Guessing probabilities, Shannon quantities and conditional min-entropy.
//!
//! Entropies are in bits. The conditional min-entropy follows the standard sign
//! convention `H_min(A|B) = −log₂ inf{Tr σ_B : ρ_AB ≤ I_A ⊗ σ_B}`, so that
//! `H_min(U|Y) = −log₂ p_guess(U|Y)` for classical-quantum states.

mod sdp;

use serde::{Deserialize, Serialize};

pub use sdp::{hmin_general, pguess_cq, povm_success, qcorr, SDP_TOL};

use crate::channels::{ClassicalChannel, QuantumChannel};
use crate::linalg::{min_eigenvalue, DimPair, Real};
use crate::{CMatrix, Error, Result};

const PROB_TOL: f64 = 1e-12;

/// Joint distribution `p(u, y)` stored as `matrix[u][y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution<T: Real = f64> {
    matrix: Vec<Vec<T>>,
}

impl<T: Real> JointDistribution<T> {
    pub fn new(matrix: Vec<Vec<T>>) -> Result<Self> {
        let cols = matrix.first().map_or(0, |r| r.len());
        if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("joint matrix must be non-empty and rectangular".into()));
        }
        let tol = T::lit(PROB_TOL).max(T::epsilon() * T::lit(16.0));
        let mut total = T::zero();
        for &p in matrix.iter().flatten() {
            if !p.is_finite() || p < -tol {
                return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
            }
            total += p;
        }
        if (total - T::one()).abs() > tol * T::lit((cols * matrix.len()) as f64).sqrt().max(T::one()) {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.matrix
    }

    pub fn u_size(&self) -> usize {
        self.matrix.len()
    }

    pub fn y_size(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn marginal_u(&self) -> Vec<T> {
        self.matrix.iter().map(|r| r.iter().fold(T::zero(), |a, &b| a + b)).collect()
    }

    pub fn marginal_y(&self) -> Vec<T> {
        (0..self.y_size()).map(|y| self.matrix.iter().fold(T::zero(), |a, r| a + r[y])).collect()
    }
}

impl JointDistribution<f64> {
    /// `p(u, y) = Σ_x w(y|x) p(x|u) p(u)` with the encoding `p(x|u)` given as a
    /// channel `U → X`.
    pub fn from_encoding(prior: &[f64], encoding: &ClassicalChannel, w: &ClassicalChannel) -> Result<Self> {
        check_prior(prior)?;
        if encoding.in_size() != prior.len() || encoding.out_size() != w.in_size() {
            return Err(Error::InvalidDistribution("prior, encoding and channel sizes disagree".into()));
        }
        let composed = w.after(encoding)?;
        let matrix =
            (0..prior.len()).map(|u| (0..w.out_size()).map(|y| composed.prob(y, u) * prior[u]).collect()).collect();
        Self::new(matrix)
    }

    /// Classical-quantum state `Σ_{u,y} p(u,y) |u⟩⟨u| ⊗ |y⟩⟨y|` on `U ⊗ Y`.
    pub fn cq_state(&self) -> (CMatrix, DimPair) {
        let (nu, ny) = (self.u_size(), self.y_size());
        let diag: Vec<f64> = (0..nu * ny).map(|i| self.matrix[i / ny][i % ny]).collect();
        (CMatrix::diag(&diag), DimPair { d_in: nu, d_out: ny })
    }
}

pub(crate) fn check_prior(prior: &[f64]) -> Result<()> {
    if prior.is_empty() || prior.iter().any(|&p| !p.is_finite() || p < -PROB_TOL) {
        return Err(Error::InvalidDistribution("prior entries must be nonnegative".into()));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > PROB_TOL * (prior.len() as f64).max(1.0) {
        return Err(Error::InvalidDistribution(format!("prior sums to {total}")));
    }
    Ok(())
}

/// `Σ_y max_u p(u, y)`: success probability of the best decoder `d(u|y)`.
pub fn pguess_classical<T: Real>(j: &JointDistribution<T>) -> T {
    (0..j.y_size()).fold(T::zero(), |acc, y| acc + j.matrix.iter().map(|r| r[y]).fold(T::neg_infinity(), T::max))
}

fn plogp<T: Real>(p: T) -> T {
    if p > T::zero() {
        p * p.log2()
    } else {
        T::zero()
    }
}

pub fn entropy<T: Real>(p: &[T]) -> T {
    -p.iter().fold(T::zero(), |acc, &x| acc + plogp(x))
}

/// `H(U|Y) = H(U,Y) − H(Y)` in bits, clamped at zero against rounding.
pub fn conditional_entropy<T: Real>(j: &JointDistribution<T>) -> T {
    let joint = -j.matrix.iter().flatten().fold(T::zero(), |acc, &x| acc + plogp(x));
    (joint - entropy(&j.marginal_y())).max(T::zero())
}

/// `I(U;Y) = H(U) − H(U|Y)` in bits.
pub fn mutual_information<T: Real>(j: &JointDistribution<T>) -> T {
    (entropy(&j.marginal_u()) - conditional_entropy(j)).max(T::zero())
}

/// Prior `p(u)` with encoded states `τ^u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqEnsemble {
    prior: Vec<f64>,
    states: Vec<CMatrix>,
}

impl CqEnsemble {
    pub fn new(prior: Vec<f64>, states: Vec<CMatrix>) -> Result<Self> {
        check_prior(&prior)?;
        if states.len() != prior.len() {
            return Err(Error::InvalidState(format!("{} states for {} symbols", states.len(), prior.len())));
        }
        let d = states[0].rows();
        for s in &states {
            if s.rows() != d || s.cols() != d {
                return Err(Error::InvalidState("encoded states have different shapes".into()));
            }
            if (s.trace().re - 1.0).abs() > 1e-9 || min_eigenvalue(s)? < -1e-9 {
                return Err(Error::InvalidState("encoded state is not a density operator".into()));
            }
        }
        Ok(Self { prior, states })
    }

    /// Diagonal encodings `τ^u = Σ_x p(x|u)|x⟩⟨x|` from a channel `U → X`.
    pub fn classical(prior: Vec<f64>, encoding: &ClassicalChannel) -> Result<Self> {
        let states = (0..encoding.in_size())
            .map(|u| CMatrix::diag(&(0..encoding.out_size()).map(|x| encoding.prob(x, u)).collect::<Vec<_>>()))
            .collect();
        Self::new(prior, states)
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }

    /// `Σ_u p(u) |u⟩⟨u| ⊗ N(τ^u)` on `U ⊗ B`.
    pub fn cq_state(&self, n: &QuantumChannel) -> Result<(CMatrix, DimPair)> {
        let nu = self.prior.len();
        let db = n.d_out();
        let mut rho = CMatrix::zeros(nu * db, nu * db);
        for (u, (p, tau)) in self.prior.iter().zip(&self.states).enumerate() {
            let out = n.apply(tau)?;
            for b in 0..db {
                for bp in 0..db {
                    rho[(u * db + b, u * db + bp)] = out[(b, bp)] * *p;
                }
            }
        }
        Ok((rho, DimPair { d_in: nu, d_out: db }))
    }
}

#[cfg(test)]
mod tests;
