//! Separating hyperplanes and the shift-rescale map to a POVM.

use serde::{Deserialize, Serialize};

use crate::channels::hermitian_basis;
use crate::linalg::min_eigenvalue;
use crate::{CMatrix, Result};

const SHIFT_EPS: f64 = 1e-9;

/// A separating functional `Σ_i Tr[Y^i L(ω^i)]` and the POVM it induces.
///
/// `Y^i = Σ_j c_ij X^j` over the Hermitian basis `X^j` of the target output
/// space, and `P^i = (Y^i − μ⁻¹ Σ_k Y^k + ν I) / λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationFrame {
    pub states: Vec<CMatrix>,
    pub basis: Vec<CMatrix>,
    pub coefficients: Vec<Vec<f64>>,
    pub operators: Vec<CMatrix>,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub povm: Vec<CMatrix>,
}

impl SeparationFrame {
    /// Applies the shift-rescale map with `μ` = number of operators, the minimal
    /// shift `ν` making every `P^i` PSD (plus a small margin), and `λ = μν` so
    /// that `Σ_i P^i = I`.
    pub fn from_operators(states: Vec<CMatrix>, operators: Vec<CMatrix>) -> Result<Self> {
        let d = operators[0].rows();
        let basis = hermitian_basis(d);
        let coefficients = operators
            .iter()
            .map(|y| basis.iter().map(|x| y.trace_product(x).re / x.trace_product(x).re).collect())
            .collect();
        let mu = operators.len() as f64;
        let mean = operators.iter().fold(CMatrix::zeros(d, d), |acc, y| &acc + y).scale(1.0 / mu);
        let centered: Vec<CMatrix> = operators.iter().map(|y| y - &mean).collect();
        let mut lowest = f64::INFINITY;
        for c in &centered {
            lowest = lowest.min(min_eigenvalue(c)?);
        }
        let nu = (-lowest).max(0.0) + SHIFT_EPS;
        let lambda = mu * nu;
        let id = CMatrix::identity(d);
        let povm = centered.iter().map(|c| (c + &id.scale(nu)).scale(1.0 / lambda)).collect();
        Ok(Self { states, basis, coefficients, operators, lambda, mu, nu, povm })
    }

    /// `Σ_i P^i − I` in max-norm.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.povm[0].rows();
        self.povm.iter().fold(CMatrix::zeros(d, d), |acc, p| &acc + p).max_abs_diff(&CMatrix::identity(d))
    }

    /// Smallest eigenvalue over the POVM elements.
    pub fn min_povm_eigenvalue(&self) -> Result<f64> {
        let mut lowest = f64::INFINITY;
        for p in &self.povm {
            lowest = lowest.min(min_eigenvalue(p)?);
        }
        Ok(lowest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_density, seeded};

    #[test]
    fn shift_rescale_gives_a_povm() {
        let mut rng = seeded(3);
        let ops: Vec<CMatrix> =
            (0..4).map(|_| &random_density(3, &mut rng).scale(5.0) - &CMatrix::identity(3)).collect();
        let f = SeparationFrame::from_operators(vec![], ops.clone()).unwrap();
        assert!(f.completeness_defect() < 1e-8);
        assert!(f.min_povm_eigenvalue().unwrap() >= -1e-9);
        assert_eq!(f.mu, 4.0);
        // Affine relation and basis expansion.
        let mean = ops.iter().fold(CMatrix::zeros(3, 3), |a, y| &a + y).scale(0.25);
        for (i, y) in ops.iter().enumerate() {
            let back = (&(y - &mean) + &CMatrix::identity(3).scale(f.nu)).scale(1.0 / f.lambda);
            assert!(back.max_abs_diff(&f.povm[i]) < 1e-12);
            let rebuilt =
                f.basis.iter().zip(&f.coefficients[i]).fold(CMatrix::zeros(3, 3), |a, (x, c)| &a + &x.scale(*c));
            assert!(rebuilt.max_abs_diff(y) < 1e-12);
        }
    }
}
