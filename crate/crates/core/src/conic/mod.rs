//! Dense conic programs over products of nonnegative orthants and Hermitian PSD
//! cones, with Farkas certificates for infeasibility.
//!
//! A program is `find/maximize cᵀx s.t. Ax = b, x ∈ K`. Variables are real
//! parameters: an orthant block of length `n` contributes `n`, a PSD block of
//! side `d` contributes `d²` in the order
//! `X_00, …, X_{d−1,d−1}, Re X_01, Im X_01, Re X_02, Im X_02, …, Re X_{d−2,d−1}, Im X_{d−2,d−1}`.
//!
//! An infeasibility certificate is a unit vector `y` with `Aᵀy ∈ −K*` and
//! `yᵀb > 0`: for any `x ∈ K`, `yᵀAx = ⟨Aᵀy, x⟩ ≤ 0`, so `Ax = b` is impossible.

mod dense;
mod ipm;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::hermitian_basis;
use crate::linalg::max_eigenvalue;
use crate::CMatrix;

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("tolerance {0} outside [1e-10, 1e-4]")]
    Tolerance(f64),
    #[error("numerical failure after {iterations} iterations (primal residual {primal:.2e}, dual residual {dual:.2e}, gap {gap:.2e})")]
    NumericalFailure { iterations: usize, primal: f64, dual: f64, gap: f64 },
    #[error("objective is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    Nonnegative(usize),
    Psd(usize),
}

impl Cone {
    pub fn params(&self) -> usize {
        match *self {
            Cone::Nonnegative(n) => n,
            Cone::Psd(d) => d * d,
        }
    }

    fn barrier_degree(&self) -> usize {
        match *self {
            Cone::Nonnegative(n) => n,
            Cone::Psd(d) => d,
        }
    }
}

/// Handle for a variable block of a [`ConicProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockId(pub usize);

/// Sparse real linear functional over the program parameters.
pub type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    cones: Vec<Cone>,
    offsets: Vec<usize>,
    n_params: usize,
    rows: Vec<Row>,
    rhs: Vec<f64>,
    objective: Option<Row>,
}

/// Offset of `Re X_jk` (`j < k`) inside a PSD block of side `d`; `Im` follows it.
pub fn offdiag_offset(d: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < d);
    // Pairs before row j: Σ_{r<j} (d − 1 − r).
    let before = j * (2 * d - j - 1) / 2;
    d + 2 * (before + (k - j - 1))
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, cone: Cone) -> BlockId {
        self.cones.push(cone);
        self.offsets.push(self.n_params);
        self.n_params += cone.params();
        BlockId(self.cones.len() - 1)
    }

    pub fn add_nonneg(&mut self, n: usize) -> BlockId {
        self.add_block(Cone::Nonnegative(n))
    }

    pub fn add_psd(&mut self, d: usize) -> BlockId {
        self.add_block(Cone::Psd(d))
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn offset(&self, block: BlockId) -> usize {
        self.offsets[block.0]
    }

    /// Parameter index of entry `i` of an orthant block.
    pub fn var(&self, block: BlockId, i: usize) -> usize {
        debug_assert!(matches!(self.cones[block.0], Cone::Nonnegative(n) if i < n));
        self.offsets[block.0] + i
    }

    fn psd_side(&self, block: BlockId) -> usize {
        match self.cones[block.0] {
            Cone::Psd(d) => d,
            Cone::Nonnegative(_) => panic!("block {} is not a PSD block", block.0),
        }
    }

    /// Coefficients of `X ↦ Re Tr[M X]` for the PSD block `block`.
    pub fn trace_functional(&self, block: BlockId, m: &CMatrix) -> Row {
        let d = self.psd_side(block);
        let off = self.offsets[block.0];
        let mut row = Vec::with_capacity(d * d);
        for j in 0..d {
            row.push((off + j, m[(j, j)].re));
        }
        for j in 0..d {
            for k in j + 1..d {
                let o = off + offdiag_offset(d, j, k);
                row.push((o, m[(j, k)].re + m[(k, j)].re));
                row.push((o + 1, m[(j, k)].im - m[(k, j)].im));
            }
        }
        row.retain(|&(_, a)| a != 0.0);
        row
    }

    pub fn add_constraint(&mut self, mut row: Row, rhs: f64) -> Result<usize, ConicError> {
        if let Some(&(j, _)) = row.iter().find(|&&(j, _)| j >= self.n_params) {
            return Err(ConicError::Malformed(format!("parameter {j} out of range")));
        }
        if !rhs.is_finite() || row.iter().any(|&(_, a)| !a.is_finite()) {
            return Err(ConicError::Malformed("non-finite coefficient".into()));
        }
        row = merge(row);
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(self.rows.len() - 1)
    }

    /// Imposes the Hermitian matrix equation `Σ_t L_t(X_{b_t}) = rhs`, one real
    /// constraint per parameter of `rhs` (same ordering as PSD blocks). Each `L_t`
    /// must be real-linear and Hermiticity-preserving.
    pub fn add_hermitian_constraint(
        &mut self,
        terms: &[(BlockId, &dyn Fn(&CMatrix) -> CMatrix)],
        rhs: &CMatrix,
    ) -> Result<std::ops::Range<usize>, ConicError> {
        let d_out = rhs.rows();
        let mut rows: Vec<Row> = vec![Vec::new(); d_out * d_out];
        for (block, map) in terms {
            let d = self.psd_side(*block);
            let off = self.offsets[block.0];
            for (p, basis) in hermitian_basis(d).iter().enumerate() {
                let image = map(basis);
                if image.rows() != d_out || image.cols() != d_out {
                    return Err(ConicError::Malformed("map output has wrong shape".into()));
                }
                for (t, value) in hermitian_params(&image).into_iter().enumerate() {
                    if value != 0.0 {
                        rows[t].push((off + p, value));
                    }
                }
            }
        }
        let first = self.rows.len();
        for (row, value) in rows.into_iter().zip(hermitian_params(rhs)) {
            self.add_constraint(row, value)?;
        }
        Ok(first..self.rows.len())
    }

    /// Sets a linear objective to maximize.
    pub fn maximize(&mut self, row: Row) -> Result<(), ConicError> {
        if row.iter().any(|&(j, a)| j >= self.n_params || !a.is_finite()) {
            return Err(ConicError::Malformed("bad objective coefficient".into()));
        }
        self.objective = Some(merge(row));
        Ok(())
    }

    pub fn objective(&self) -> Option<&Row> {
        self.objective.as_ref()
    }

    /// Value of a PSD block in a parameter vector.
    pub fn psd_value(&self, x: &[f64], block: BlockId) -> CMatrix {
        let d = self.psd_side(block);
        let off = self.offsets[block.0];
        matrix_from_params(&x[off..off + d * d], d)
    }

    pub fn nonneg_value<'a>(&self, x: &'a [f64], block: BlockId) -> &'a [f64] {
        let off = self.offsets[block.0];
        &x[off..off + self.cones[block.0].params()]
    }

    /// Dual operator for `block` from a functional `g` over all parameters, such
    /// that `Σ_p g_p x_p = Tr[Z X]` restricted to that block.
    pub fn dual_block(&self, g: &[f64], block: BlockId) -> CMatrix {
        let d = self.psd_side(block);
        let off = self.offsets[block.0];
        hermitian_from_dual(&g[off..off + d * d], d)
    }

    /// `Aᵀy` over the parameters.
    pub fn adjoint_apply(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n_params];
        for (row, &yi) in self.rows.iter().zip(y) {
            for &(j, a) in row {
                g[j] += a * yi;
            }
        }
        g
    }

    /// Largest absolute constraint violation `‖Ax − b‖_∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.rows.iter().zip(&self.rhs).map(|(row, b)| (dense::sparse_dot(row, x) - b).abs()).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> Option<f64> {
        self.objective.as_ref().map(|c| dense::sparse_dot(c, x))
    }

    /// Solves the program; see [`ConicOutcome`] for the semantics.
    pub fn solve(&self, tol: f64) -> Result<ConicOutcome, ConicError> {
        if !(1e-10..=1e-4).contains(&tol) {
            return Err(ConicError::Tolerance(tol));
        }
        if self.n_params == 0 {
            return Err(ConicError::Malformed("program has no variables".into()));
        }
        ipm::solve(self, tol)
    }
}

fn merge(mut row: Row) -> Row {
    row.sort_by_key(|&(j, _)| j);
    let mut out: Row = Vec::with_capacity(row.len());
    for (j, a) in row {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

/// Real parameters of a Hermitian matrix in PSD-block order.
pub fn hermitian_params(m: &CMatrix) -> Vec<f64> {
    let d = m.rows();
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|j| m[(j, j)].re));
    for j in 0..d {
        for k in j + 1..d {
            out.push(m[(j, k)].re);
            out.push(m[(j, k)].im);
        }
    }
    out
}

/// Inverse of [`hermitian_params`].
pub fn matrix_from_params(p: &[f64], d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[(j, j)] = Complex::new(p[j], 0.0);
    }
    for j in 0..d {
        for k in j + 1..d {
            let o = offdiag_offset(d, j, k);
            m[(j, k)] = Complex::new(p[o], p[o + 1]);
            m[(k, j)] = Complex::new(p[o], -p[o + 1]);
        }
    }
    m
}

/// Hermitian `Z` representing the functional `g` on PSD parameters:
/// `Σ_p g_p x_p = Tr[Z X]`, i.e. `Z_jj = g_jj`, `Z_jk = (g_re + i g_im)/2`.
pub fn hermitian_from_dual(g: &[f64], d: usize) -> CMatrix {
    let mut z = CMatrix::zeros(d, d);
    for j in 0..d {
        z[(j, j)] = Complex::new(g[j], 0.0);
    }
    for j in 0..d {
        for k in j + 1..d {
            let o = offdiag_offset(d, j, k);
            z[(j, k)] = Complex::new(g[o] / 2.0, g[o + 1] / 2.0);
            z[(k, j)] = Complex::new(g[o] / 2.0, -g[o + 1] / 2.0);
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConicStatus {
    Feasible,
    Infeasible,
    Maximized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Parameter vector, in the cone.
    pub x: Vec<f64>,
    /// `‖Ax − b‖_∞`.
    pub residual: f64,
    /// Dual multipliers: for a maximization, `Aᵀy − c ∈ K*` and `bᵀy` bounds the optimum.
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Unit-norm Farkas vector, one entry per constraint.
    pub y: Vec<f64>,
    /// `yᵀb`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicOutcome {
    pub status: ConicStatus,
    pub solution: Option<Solution>,
    pub certificate: Option<Certificate>,
    pub objective: Option<f64>,
    /// `bᵀy` for maximizations.
    pub dual_objective: Option<f64>,
    pub iterations: usize,
}

impl ConicOutcome {
    pub fn is_infeasible(&self) -> bool {
        self.status == ConicStatus::Infeasible
    }

    pub fn x(&self) -> Option<&[f64]> {
        self.solution.as_ref().map(|s| s.x.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    /// `yᵀb` after normalizing `‖y‖ = 1`.
    pub gap: f64,
    /// Largest violation of `Aᵀy ∈ −K*` (≤ 0 when satisfied).
    pub cone_violation: f64,
}

/// Checks the Farkas conditions for `y` within `tol`: after normalizing `‖y‖ = 1`,
/// every cone component of `Aᵀy` must be `≤ tol` (largest eigenvalue for PSD
/// blocks) and `yᵀb ≥ tol`.
pub fn verify_certificate(p: &ConicProgram, y: &[f64], tol: f64) -> CertificateCheck {
    let invalid = CertificateCheck { valid: false, gap: 0.0, cone_violation: f64::INFINITY };
    if y.len() != p.n_constraints() || y.iter().any(|v| !v.is_finite()) {
        return invalid;
    }
    let n = dense::norm(y);
    if n == 0.0 {
        return invalid;
    }
    let y: Vec<f64> = y.iter().map(|v| v / n).collect();
    let gap = dense::dot(&y, &p.rhs);
    let g = p.adjoint_apply(&y);
    let mut violation = f64::NEG_INFINITY;
    for (i, cone) in p.cones.iter().enumerate() {
        let off = p.offsets[i];
        let v = match *cone {
            Cone::Nonnegative(len) => g[off..off + len].iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Cone::Psd(d) => match max_eigenvalue(&hermitian_from_dual(&g[off..off + d * d], d)) {
                Ok(v) => v,
                Err(_) => return invalid,
            },
        };
        violation = violation.max(v);
    }
    CertificateCheck { valid: violation <= tol && gap >= tol, gap, cone_violation: violation }
}
