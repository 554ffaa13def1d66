//! Classical and quantum channels.
//!
//! Quantum channels are stored as trace-one Choi operators on `input ⊗ output`;
//! classical channels as column-stochastic matrices `w[y][x] = w(y|x)`.
//! Classical channels embed as quantum channels with diagonal Choi operators.

mod classical;
mod quantum;

use num_complex::Complex;
use rand::Rng;

pub use classical::ClassicalChannel;
pub use quantum::{compose, conjugate, mp_channel, tensor, KrausSet, MeasurePrepareChannel, QuantumChannel};

use crate::linalg::{cholesky, DimPair};
use crate::{CMatrix, Error, Result, C64};

/// `N(ρ)`; see [`QuantumChannel::apply`].
pub fn apply(n: &QuantumChannel, rho: &CMatrix) -> Result<CMatrix> {
    n.apply(rho)
}

/// Quantum channel `ρ ↦ Σ_{x,y} w(y|x) ⟨x|ρ|x⟩ |y⟩⟨y|`.
pub fn embed_classical(w: &ClassicalChannel) -> QuantumChannel {
    let (nx, ny) = (w.in_size(), w.out_size());
    let diag: Vec<f64> = (0..nx * ny).map(|i| w.prob(i % ny, i / ny) / nx as f64).collect();
    QuantumChannel::from_parts_unchecked(DimPair { d_in: nx, d_out: ny }, CMatrix::diag(&diag))
}

/// Sample a CPTP map from a random isometry `V: C^{d_in} → C^{d_out} ⊗ C^{r}` and
/// trace out the rank factor. `r` is raised to `⌈d_in/d_out⌉` when needed for
/// `V` to be an isometry.
pub fn random_channel(d_in: usize, d_out: usize, kraus_rank: usize, seed: u64) -> Result<QuantumChannel> {
    random_channel_with(d_in, d_out, kraus_rank, &mut crate::rng::seeded(seed))
}

pub fn random_channel_with<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    kraus_rank: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    Ok(random_kraus_with(d_in, d_out, kraus_rank, rng)?.to_channel())
}

pub fn random_kraus_with<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    kraus_rank: usize,
    rng: &mut R,
) -> Result<KrausSet> {
    DimPair::new(d_in, d_out)?;
    if kraus_rank == 0 {
        return Err(Error::InvalidArgument("kraus_rank must be at least 1".into()));
    }
    let r = kraus_rank.max(d_in.div_ceil(d_out));
    let v = orthonormal_columns(crate::rng::ginibre(d_out * r, d_in, rng));
    let ops = (0..r).map(|k| CMatrix::from_fn(d_out, d_in, |b, a| v[(b * r + k, a)])).collect();
    KrausSet::new(ops)
}

/// Modified Gram–Schmidt on the columns (assumed linearly independent).
fn orthonormal_columns(mut m: CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    for j in 0..cols {
        for k in 0..j {
            let dot = (0..rows).fold(Complex::new(0.0, 0.0), |acc, i| acc + m[(i, k)].conj() * m[(i, j)]);
            for i in 0..rows {
                let mik = m[(i, k)];
                m[(i, j)] -= mik * dot;
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
    m
}

pub fn random_classical(n_in: usize, n_out: usize, seed: u64) -> ClassicalChannel {
    ClassicalChannel::random(n_in, n_out, &mut crate::rng::seeded(seed))
}

/// `d²` pure states spanning the `d × d` operators: `|j⟩⟨j|`, then for each
/// `j < k` the states `(|j⟩+|k⟩)/√2` and `(|j⟩+i|k⟩)/√2`.
pub fn spanning_states(d: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = (0..d)
        .map(|j| {
            let mut m = CMatrix::zeros(d, d);
            m[(j, j)] = Complex::new(1.0, 0.0);
            m
        })
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            for phase in [Complex::new(s, 0.0), Complex::new(0.0, s)] {
                let mut v = vec![Complex::new(0.0, 0.0); d];
                v[j] = Complex::new(s, 0.0);
                v[k] = phase;
                out.push(CMatrix::outer(&v));
            }
        }
    }
    out
}

/// Basis of the real space of Hermitian `d × d` matrices, in the order used for
/// PSD variables: `|j⟩⟨j|`, then for each `j < k` the pair
/// `|j⟩⟨k| + |k⟩⟨j|` and `i|j⟩⟨k| − i|k⟩⟨j|`.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = (0..d)
        .map(|j| {
            let mut m = CMatrix::zeros(d, d);
            m[(j, j)] = Complex::new(1.0, 0.0);
            m
        })
        .collect();
    for j in 0..d {
        for k in j + 1..d {
            let mut re = CMatrix::zeros(d, d);
            re[(j, k)] = Complex::new(1.0, 0.0);
            re[(k, j)] = Complex::new(1.0, 0.0);
            let mut im = CMatrix::zeros(d, d);
            im[(j, k)] = Complex::new(0.0, 1.0);
            im[(k, j)] = Complex::new(0.0, -1.0);
            out.push(re);
            out.push(im);
        }
    }
    out
}

/// Dual frame of a basis of Hermitian operators: `Tr[ω̃^i ω^k] = δ_ik`, so
/// `X = Σ_i Tr[ω̃^i X] ω^i` for every operator `X`.
pub fn dual_basis(basis: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let n = basis.len();
    let gram = CMatrix::from_fn(n, n, |i, j| Complex::new(basis[i].trace_product(&basis[j]).re, 0.0));
    let l = cholesky(&gram).map_err(|_| Error::InvalidArgument("operators are not linearly independent".into()))?;
    let inv = invert_from_cholesky(&l);
    Ok((0..n)
        .map(|i| {
            basis
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(basis[0].rows(), basis[0].cols()), |acc, (j, b)| &acc + &b.scale(inv[(i, j)].re))
        })
        .collect())
}

fn invert_from_cholesky(l: &CMatrix) -> CMatrix {
    let n = l.rows();
    let mut inv = CMatrix::zeros(n, n);
    for col in 0..n {
        let mut y = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s: C64 = if i == col { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

#[cfg(test)]
mod tests;

/// Turns PSD-ish elements `E^i` into an exact POVM `P^i = S^{-1/2} E^i S^{-1/2}`
/// with `S = Σ E^i` (pseudo-inverse; the kernel projector of `S` is added to
/// `P^0`). Returns the POVM and `S` normalized to unit trace.
pub(crate) fn normalize_povm(elements: &[CMatrix]) -> Result<(Vec<CMatrix>, CMatrix)> {
    let clipped: Vec<CMatrix> = elements
        .iter()
        .map(|e| crate::linalg::hermitian_map(&e.hermitian_part(), |x| x.max(0.0)))
        .collect::<Result<_, _>>()?;
    let (first_pass, total) = congruence_to_identity(&clipped, 1e-10)?;
    // A second pass removes the rounding left by small eigenvalues of `S`.
    let (povm, _) = congruence_to_identity(&first_pass, 1e-14)?;
    let trace = total.trace().re;
    Ok((povm, total.scale(1.0 / trace)))
}

fn congruence_to_identity(elements: &[CMatrix], rel_cut: f64) -> Result<(Vec<CMatrix>, CMatrix)> {
    let d = elements[0].rows();
    let total = elements.iter().fold(CMatrix::zeros(d, d), |a, e| &a + e).hermitian_part();
    let (vals, vecs) = crate::linalg::eigh(&total)?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::Numerical("POVM elements vanish".into()));
    }
    let mut inv_root = CMatrix::zeros(d, d);
    let mut kernel = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        let proj = CMatrix::outer(&vecs.column(k));
        if v > rel_cut * top {
            inv_root = &inv_root + &proj.scale(1.0 / v.sqrt());
        } else {
            kernel = &kernel + &proj;
        }
    }
    let mut povm: Vec<CMatrix> = elements
        .iter()
        .map(|e| inv_root.matmul(e).and_then(|m| m.matmul(&inv_root)).map(|m| m.hermitian_part()))
        .collect::<Result<_, _>>()?;
    povm[0] = &povm[0] + &kernel;
    Ok((povm, total))
}
