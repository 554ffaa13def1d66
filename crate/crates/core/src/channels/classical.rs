use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Classical channel `w: X → Y` stored column-stochastically: `matrix[y][x] = w(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClassical", into = "RawClassical")]
pub struct ClassicalChannel {
    n_in: usize,
    n_out: usize,
    w: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawClassical {
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<RawClassical> for ClassicalChannel {
    type Error = Error;
    fn try_from(raw: RawClassical) -> Result<Self> {
        Self::new(raw.matrix)
    }
}

impl From<ClassicalChannel> for RawClassical {
    fn from(c: ClassicalChannel) -> Self {
        RawClassical { matrix: c.w }
    }
}

impl ClassicalChannel {
    /// Validates `matrix[y][x]`: entries in `[0, 1]`, columns summing to one.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n_out = matrix.len();
        if n_out == 0 || matrix[0].is_empty() {
            return Err(Error::InvalidChannel("empty stochastic matrix".into()));
        }
        let n_in = matrix[0].len();
        if matrix.iter().any(|row| row.len() != n_in) {
            return Err(Error::InvalidChannel("ragged stochastic matrix".into()));
        }
        for row in &matrix {
            for &p in row {
                if !p.is_finite() || !(-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&p) {
                    return Err(Error::InvalidChannel(format!("entry {p} is not a probability")));
                }
            }
        }
        for x in 0..n_in {
            let s: f64 = matrix.iter().map(|row| row[x]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL * n_out as f64 {
                return Err(Error::InvalidChannel(format!("column {x} sums to {s}")));
            }
        }
        Ok(Self { n_in, n_out, w: matrix })
    }

    pub fn identity(n: usize) -> Self {
        let w = (0..n).map(|y| (0..n).map(|x| if x == y { 1.0 } else { 0.0 }).collect()).collect();
        Self { n_in: n, n_out: n, w }
    }

    /// Binary symmetric channel with flip probability `e`.
    pub fn bsc(e: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - e, e], vec![e, 1.0 - e]])
    }

    /// Every input mapped to the same output distribution.
    pub fn constant(n_in: usize, output: &[f64]) -> Result<Self> {
        Self::new(output.iter().map(|&p| vec![p; n_in]).collect())
    }

    /// Columns drawn independently from the flat Dirichlet distribution.
    pub fn random<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let cols: Vec<Vec<f64>> = (0..n_in).map(|_| crate::rng::dirichlet(n_out, 1.0, rng)).collect();
        let w = (0..n_out).map(|y| (0..n_in).map(|x| cols[x][y]).collect()).collect();
        Self { n_in, n_out, w }
    }

    pub fn in_size(&self) -> usize {
        self.n_in
    }

    pub fn out_size(&self) -> usize {
        self.n_out
    }

    /// `w(y|x)`.
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.w[y][x]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// `self ∘ first`: run `first`, then `self`.
    pub fn after(&self, first: &ClassicalChannel) -> Result<Self> {
        if first.n_out != self.n_in {
            return Err(Error::InvalidChannel(format!(
                "cannot compose: inner output {} vs outer input {}",
                first.n_out, self.n_in
            )));
        }
        let w = (0..self.n_out)
            .map(|z| (0..first.n_in).map(|x| (0..self.n_in).map(|y| self.w[z][y] * first.w[y][x]).sum()).collect())
            .collect();
        Ok(Self { n_in: first.n_in, n_out: self.n_out, w })
    }

    /// Output distribution for input distribution `p`.
    pub fn push(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n_out).map(|y| (0..self.n_in).map(|x| self.w[y][x] * p[x]).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ClassicalChannel::new(vec![vec![0.5, 0.2], vec![0.5, 0.7]]).is_err());
        assert!(ClassicalChannel::new(vec![vec![1.2, 0.0], vec![-0.2, 1.0]]).is_err());
        assert!(ClassicalChannel::new(vec![vec![1.0], vec![0.0, 1.0]]).is_err());
        assert!(ClassicalChannel::new(vec![]).is_err());
        assert!(ClassicalChannel::bsc(0.1).is_ok());
    }

    #[test]
    fn bsc_composition() {
        let (a, b) = (0.1, 0.25);
        let c = ClassicalChannel::bsc(b).unwrap().after(&ClassicalChannel::bsc(a).unwrap()).unwrap();
        let e = a + b - 2.0 * a * b;
        assert!((c.prob(1, 0) - e).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip_validates() {
        let w = ClassicalChannel::bsc(0.3).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<ClassicalChannel>(&s).unwrap(), w);
        assert!(serde_json::from_str::<ClassicalChannel>(r#"{"matrix":[[0.5],[0.4]]}"#).is_err());
    }
}
