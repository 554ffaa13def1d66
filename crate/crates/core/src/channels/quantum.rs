use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::{max_entangled, min_eigenvalue, partial_trace, DimPair, Subsystem};
use crate::{CMatrix, Error, Result, C64};

pub(crate) const PSD_TOL: f64 = 1e-8;
pub(crate) const TP_TOL: f64 = 1e-9;

fn czero() -> C64 {
    Complex::new(0.0, 0.0)
}

/// CPTP map `N: A → B` stored as its trace-one Choi operator
/// `J = (id ⊗ N)(Φ+)` on `A ⊗ B` (input factor first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    dims: DimPair,
    choi: CMatrix,
}

impl QuantumChannel {
    /// Validates Hermiticity, positivity (λ_min ≥ −1e-8) and trace preservation
    /// (`Tr_B J = I/d_A` within 1e-9).
    pub fn new(dims: DimPair, choi: CMatrix) -> Result<Self> {
        Self::with_tolerance(dims, choi, PSD_TOL, TP_TOL)
    }

    /// As [`QuantumChannel::new`] with explicit tolerances; used for maps recovered
    /// from numerical solvers. The stored Choi is symmetrized.
    pub fn with_tolerance(dims: DimPair, choi: CMatrix, psd_tol: f64, tp_tol: f64) -> Result<Self> {
        let n = dims.total();
        if choi.rows() != n || choi.cols() != n {
            return Err(Error::InvalidChannel(format!(
                "Choi operator must be {n}x{n}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        let lmin = min_eigenvalue(&choi)?;
        if lmin < -psd_tol {
            return Err(Error::InvalidChannel(format!("Choi operator not PSD (λ_min = {lmin:.3e})")));
        }
        let reduced = partial_trace(&choi, dims, Subsystem::First)?;
        let target = CMatrix::identity(dims.d_in).scale(1.0 / dims.d_in as f64);
        let defect = reduced.max_abs_diff(&target);
        if defect > tp_tol {
            return Err(Error::InvalidChannel(format!("not trace preserving (defect {defect:.3e})")));
        }
        Ok(Self { dims, choi: choi.hermitian_part() })
    }

    pub(crate) fn from_parts_unchecked(dims: DimPair, choi: CMatrix) -> Self {
        Self { dims, choi }
    }

    pub fn identity(d: usize) -> Result<Self> {
        let dims = DimPair::new(d, d)?;
        Ok(Self { dims, choi: max_entangled(d)? })
    }

    /// `ρ ↦ Tr(ρ) I/d_out`.
    pub fn completely_depolarizing(d_in: usize, d_out: usize) -> Result<Self> {
        let dims = DimPair::new(d_in, d_out)?;
        let n = dims.total();
        Ok(Self { dims, choi: CMatrix::identity(n).scale(1.0 / n as f64) })
    }

    /// `ρ ↦ Tr(ρ) ω`.
    pub fn constant(d_in: usize, omega: &CMatrix) -> Result<Self> {
        let dims = DimPair::new(d_in, omega.rows())?;
        let choi = crate::linalg::kron(&CMatrix::identity(d_in).scale(1.0 / d_in as f64), omega);
        Self::new(dims, choi)
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn d_in(&self) -> usize {
        self.dims.d_in
    }

    pub fn d_out(&self) -> usize {
        self.dims.d_out
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// `N(X) = d_A Tr_A[(Xᵀ ⊗ I) J]` for any `d_A × d_A` operator `X`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let (da, db) = (self.dims.d_in, self.dims.d_out);
        if x.rows() != da || x.cols() != da {
            return Err(crate::linalg::LinalgError::DimensionMismatch {
                expected: format!("{da}x{da}"),
                got: format!("{}x{}", x.rows(), x.cols()),
            }
            .into());
        }
        let j = &self.choi;
        let scale = da as f64;
        Ok(CMatrix::from_fn(db, db, |b, bp| {
            let mut acc = czero();
            for a in 0..da {
                for ap in 0..da {
                    let xv = x[(a, ap)];
                    if xv != czero() {
                        acc += xv * j[(a * db + b, ap * db + bp)];
                    }
                }
            }
            acc * scale
        }))
    }

    /// `(id_C ⊗ N)(X)` for an operator `X` on `C ⊗ A`.
    pub fn apply_second(&self, x: &CMatrix, d_c: usize) -> Result<CMatrix> {
        let (da, db) = (self.dims.d_in, self.dims.d_out);
        if x.rows() != d_c * da || x.cols() != d_c * da {
            return Err(Error::InvalidChannel(format!(
                "operator must act on a {d_c}x{da} bipartite space, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let mut out = CMatrix::zeros(d_c * db, d_c * db);
        for c in 0..d_c {
            for cp in 0..d_c {
                let block = CMatrix::from_fn(da, da, |a, ap| x[(c * da + a, cp * da + ap)]);
                let image = self.apply(&block)?;
                for b in 0..db {
                    for bp in 0..db {
                        out[(c * db + b, cp * db + bp)] = image[(b, bp)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Channel `self ∘ first`.
    pub fn after(&self, first: &QuantumChannel) -> Result<Self> {
        compose(self, first)
    }
}

/// Choi operator of `psi ∘ n`, computed as `(id ⊗ Ψ)(J_N)`.
pub fn compose(psi: &QuantumChannel, n: &QuantumChannel) -> Result<QuantumChannel> {
    if n.d_out() != psi.d_in() {
        return Err(Error::InvalidChannel(format!(
            "cannot compose: inner output {} vs outer input {}",
            n.d_out(),
            psi.d_in()
        )));
    }
    let dims = DimPair::new(n.d_in(), psi.d_out())?;
    let choi = psi.apply_second(n.choi(), n.d_in())?.hermitian_part();
    Ok(QuantumChannel { dims, choi })
}

/// `N1 ⊗ N2 : A1 A2 → B1 B2`.
pub fn tensor(n1: &QuantumChannel, n2: &QuantumChannel) -> Result<QuantumChannel> {
    let (a1, b1) = (n1.d_in(), n1.d_out());
    let (a2, b2) = (n2.d_in(), n2.d_out());
    let dims = DimPair::new(a1 * a2, b1 * b2)?;
    let (j1, j2) = (n1.choi(), n2.choi());
    let bb = b1 * b2;
    let choi = CMatrix::from_fn(dims.total(), dims.total(), |r, c| {
        let (ar, br) = (r / bb, r % bb);
        let (ac, bc) = (c / bb, c % bb);
        let (ar1, ar2, br1, br2) = (ar / a2, ar % a2, br / b2, br % b2);
        let (ac1, ac2, bc1, bc2) = (ac / a2, ac % a2, bc / b2, bc % b2);
        j1[(ar1 * b1 + br1, ac1 * b1 + bc1)] * j2[(ar2 * b2 + br2, ac2 * b2 + bc2)]
    });
    Ok(QuantumChannel { dims, choi })
}

/// Entrywise complex conjugate of the Choi operator: `X ↦ conj(N(conj X))`.
pub fn conjugate(n: &QuantumChannel) -> QuantumChannel {
    QuantumChannel { dims: n.dims, choi: n.choi.conj() }
}

/// Kraus representation `ρ ↦ Σ_k K_k ρ K_k†`, each `K_k` of shape `d_out × d_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausSet {
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (db, da) = (first.rows(), first.cols());
        if ops.iter().any(|k| k.rows() != db || k.cols() != da) {
            return Err(Error::InvalidChannel("Kraus operators have different shapes".into()));
        }
        let mut sum = CMatrix::zeros(da, da);
        for k in &ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(da));
        if defect > 1e-9 {
            return Err(Error::InvalidChannel(format!("Σ K†K ≠ I (defect {defect:.3e})")));
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let db = self.ops[0].rows();
        self.ops.iter().fold(CMatrix::zeros(db, db), |acc, k| &acc + &(&(k * rho) * &k.adjoint()))
    }

    pub fn to_channel(&self) -> QuantumChannel {
        let (db, da) = (self.ops[0].rows(), self.ops[0].cols());
        let choi = CMatrix::from_fn(da * db, da * db, |r, c| {
            let (a, b) = (r / db, r % db);
            let (ap, bp) = (c / db, c % db);
            self.ops.iter().fold(czero(), |acc, k| acc + k[(b, a)] * k[(bp, ap)].conj()) / da as f64
        });
        QuantumChannel { dims: DimPair { d_in: da, d_out: db }, choi }
    }
}

/// Measure-and-prepare map `Γ(X) = Σ_i Tr[P^i X] ω^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePrepareChannel {
    povm: Vec<CMatrix>,
    preparations: Vec<CMatrix>,
}

impl MeasurePrepareChannel {
    pub fn new(povm: Vec<CMatrix>, preparations: Vec<CMatrix>) -> Result<Self> {
        if povm.is_empty() || povm.len() != preparations.len() {
            return Err(Error::InvalidChannel(format!(
                "{} POVM elements vs {} preparations",
                povm.len(),
                preparations.len()
            )));
        }
        let d_in = povm[0].rows();
        let d_out = preparations[0].rows();
        let mut sum = CMatrix::zeros(d_in, d_in);
        for p in &povm {
            if p.rows() != d_in || p.cols() != d_in {
                return Err(Error::InvalidChannel("POVM elements have different shapes".into()));
            }
            if min_eigenvalue(p)? < -PSD_TOL {
                return Err(Error::InvalidChannel("POVM element not PSD".into()));
            }
            sum = &sum + p;
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(d_in));
        if defect > TP_TOL {
            return Err(Error::InvalidChannel(format!("POVM does not sum to I (defect {defect:.3e})")));
        }
        for w in &preparations {
            if w.rows() != d_out || w.cols() != d_out {
                return Err(Error::InvalidChannel("preparations have different shapes".into()));
            }
            if min_eigenvalue(w)? < -PSD_TOL || (w.trace().re - 1.0).abs() > TP_TOL {
                return Err(Error::InvalidChannel("preparation is not a density operator".into()));
            }
        }
        Ok(Self { povm, preparations })
    }

    pub fn povm(&self) -> &[CMatrix] {
        &self.povm
    }

    pub fn preparations(&self) -> &[CMatrix] {
        &self.preparations
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d_out = self.preparations[0].rows();
        self.povm
            .iter()
            .zip(&self.preparations)
            .fold(CMatrix::zeros(d_out, d_out), |acc, (p, w)| &acc + &w.scale_c(p.trace_product(x)))
    }

    /// Choi operator `Σ_i (P^i)ᵀ/d ⊗ ω^i`.
    pub fn to_channel(&self) -> QuantumChannel {
        let d_in = self.povm[0].rows();
        let d_out = self.preparations[0].rows();
        let n = d_in * d_out;
        let mut choi = CMatrix::zeros(n, n);
        for (p, w) in self.povm.iter().zip(&self.preparations) {
            choi = &choi + &crate::linalg::kron(&p.transpose().scale(1.0 / d_in as f64), w);
        }
        QuantumChannel { dims: DimPair { d_in, d_out }, choi: choi.hermitian_part() }
    }
}

/// Choi operator of the measure-and-prepare map with the given POVM and preparations.
pub fn mp_channel(povm: Vec<CMatrix>, preparations: Vec<CMatrix>) -> Result<QuantumChannel> {
    Ok(MeasurePrepareChannel::new(povm, preparations)?.to_channel())
}
