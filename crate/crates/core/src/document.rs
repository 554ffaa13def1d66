//! JSON documents for channels, distributions and states.
//!
//! Complex entries are written as `[re, im]` pairs. Every document is validated
//! by the corresponding constructor when it is converted back into a value.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channels::{embed_classical, ClassicalChannel, QuantumChannel};
use crate::infomeasures::{CqEnsemble, JointDistribution};
use crate::linalg::DimPair;
use crate::{CMatrix, Error, Result};

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Document {
    /// `matrix[y][x] = w(y|x)`.
    Classical {
        d_in: usize,
        d_out: usize,
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    /// Trace-one Choi operator on `input ⊗ output`.
    Quantum {
        d_in: usize,
        d_out: usize,
        matrix: ComplexRows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    /// `matrix[u][y] = p(u, y)`.
    Joint {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    /// Bipartite density operator on `A ⊗ B`.
    State {
        d_a: usize,
        d_b: usize,
        matrix: ComplexRows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    /// Prior with encoded density operators.
    Ensemble {
        prior: Vec<f64>,
        states: Vec<ComplexRows>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

/// A channel of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyChannel {
    Classical(ClassicalChannel),
    Quantum(QuantumChannel),
}

impl AnyChannel {
    pub fn d_in(&self) -> usize {
        match self {
            AnyChannel::Classical(w) => w.in_size(),
            AnyChannel::Quantum(n) => n.d_in(),
        }
    }

    /// The channel as a quantum channel (classical ones are embedded).
    pub fn to_quantum(&self) -> QuantumChannel {
        match self {
            AnyChannel::Classical(w) => embed_classical(w),
            AnyChannel::Quantum(n) => n.clone(),
        }
    }

    pub fn to_document(&self, label: Option<String>) -> Document {
        match self {
            AnyChannel::Classical(w) => Document::classical(w, label),
            AnyChannel::Quantum(n) => Document::quantum(n, label),
        }
    }
}

pub fn to_rows(m: &CMatrix) -> ComplexRows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn from_rows(rows: &ComplexRows) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("complex matrix must be square and non-empty".into()));
    }
    let data = rows.iter().flatten().map(|&[re, im]| Complex::new(re, im)).collect();
    Ok(CMatrix::new(n, n, data)?)
}

impl Document {
    pub fn classical(w: &ClassicalChannel, label: Option<String>) -> Self {
        Document::Classical { d_in: w.in_size(), d_out: w.out_size(), matrix: w.matrix().to_vec(), label }
    }

    pub fn quantum(n: &QuantumChannel, label: Option<String>) -> Self {
        Document::Quantum { d_in: n.d_in(), d_out: n.d_out(), matrix: to_rows(n.choi()), label }
    }

    pub fn state(rho: &CMatrix, dims: DimPair, label: Option<String>) -> Self {
        Document::State { d_a: dims.d_in, d_b: dims.d_out, matrix: to_rows(rho), label }
    }

    pub fn joint(j: &JointDistribution, label: Option<String>) -> Self {
        Document::Joint { matrix: j.matrix().to_vec(), label }
    }

    pub fn ensemble(e: &CqEnsemble, label: Option<String>) -> Self {
        Document::Ensemble { prior: e.prior().to_vec(), states: e.states().iter().map(to_rows).collect(), label }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Classical { .. } => "classical",
            Document::Quantum { .. } => "quantum",
            Document::Joint { .. } => "joint",
            Document::State { .. } => "state",
            Document::Ensemble { .. } => "ensemble",
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Document::Classical { label, .. }
            | Document::Quantum { label, .. }
            | Document::Joint { label, .. }
            | Document::State { label, .. }
            | Document::Ensemble { label, .. } => label.as_deref(),
        }
    }

    pub fn to_channel(&self) -> Result<AnyChannel> {
        match self {
            Document::Classical { d_in, d_out, matrix, .. } => {
                let w = ClassicalChannel::new(matrix.clone())?;
                if w.in_size() != *d_in || w.out_size() != *d_out {
                    return Err(Error::InvalidChannel(format!(
                        "declared {d_in}→{d_out} but matrix is {}→{}",
                        w.in_size(),
                        w.out_size()
                    )));
                }
                Ok(AnyChannel::Classical(w))
            }
            Document::Quantum { d_in, d_out, matrix, .. } => {
                let n = QuantumChannel::new(DimPair::new(*d_in, *d_out)?, from_rows(matrix)?)?;
                Ok(AnyChannel::Quantum(n))
            }
            other => Err(Error::InvalidArgument(format!("expected a channel document, found {}", other.kind()))),
        }
    }

    pub fn to_state(&self) -> Result<(CMatrix, DimPair)> {
        match self {
            Document::State { d_a, d_b, matrix, .. } => {
                let rho = from_rows(matrix)?;
                let dims = DimPair::new(*d_a, *d_b)?;
                if rho.rows() != dims.total() {
                    return Err(Error::InvalidState(format!(
                        "declared {d_a}x{d_b} but matrix has side {}",
                        rho.rows()
                    )));
                }
                Ok((rho, dims))
            }
            Document::Joint { .. } => Ok(self.to_joint()?.cq_state()),
            other => Err(Error::InvalidArgument(format!("expected a state document, found {}", other.kind()))),
        }
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        match self {
            Document::Joint { matrix, .. } => JointDistribution::new(matrix.clone()),
            other => Err(Error::InvalidArgument(format!("expected a joint document, found {}", other.kind()))),
        }
    }

    pub fn to_ensemble(&self) -> Result<CqEnsemble> {
        match self {
            Document::Ensemble { prior, states, .. } => {
                CqEnsemble::new(prior.clone(), states.iter().map(from_rows).collect::<Result<_>>()?)
            }
            other => Err(Error::InvalidArgument(format!("expected an ensemble document, found {}", other.kind()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_channel;
    use crate::linalg::max_entangled;

    #[test]
    fn channel_round_trips_exactly() {
        let n = random_channel(2, 3, 2, 11).unwrap();
        let doc = Document::quantum(&n, Some("n".into()));
        let back = Document::parse(&doc.to_json()).unwrap().to_channel().unwrap();
        assert_eq!(back, AnyChannel::Quantum(n));
        let w = ClassicalChannel::bsc(0.1).unwrap();
        let back = Document::parse(&Document::classical(&w, None).to_json()).unwrap().to_channel().unwrap();
        assert_eq!(back, AnyChannel::Classical(w));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(Document::parse(r#"{"kind":"classical","d_in":2,"d_out":2,"matrix":[[0.5,0.5],[0.6,0.5]]}"#)
            .unwrap()
            .to_channel()
            .is_err());
        assert!(Document::parse(r#"{"kind":"classical","d_in":2"#).is_err());
        assert!(Document::parse(r#"{"kind":"teapot"}"#).is_err());
        let doc = Document::parse(r#"{"kind":"classical","d_in":3,"d_out":2,"matrix":[[1,0],[0,1]]}"#).unwrap();
        assert!(doc.to_channel().is_err());
    }

    #[test]
    fn state_and_joint_documents() {
        let doc = Document::state(&max_entangled(2).unwrap(), DimPair { d_in: 2, d_out: 2 }, None);
        let (rho, dims) = Document::parse(&doc.to_json()).unwrap().to_state().unwrap();
        assert_eq!(dims.total(), 4);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        let j = Document::parse(r#"{"kind":"joint","matrix":[[0.45,0.05],[0.05,0.45]]}"#).unwrap();
        assert_eq!(j.to_state().unwrap().0.rows(), 4);
    }
}
