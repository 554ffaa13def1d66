//! Semidefinite programs for the quantum measures.

use num_complex::Complex;

use super::CqEnsemble;
use crate::channels::{hermitian_basis, normalize_povm, QuantumChannel};
use crate::conic::{hermitian_from_dual, ConicProgram, ConicStatus};
use crate::linalg::{kron, max_entangled, min_eigenvalue, partial_trace, DimPair, Subsystem};
use crate::{CMatrix, Error, Result};

/// Solver tolerance for the measure programs.
pub const SDP_TOL: f64 = 1e-8;
const DUALITY_GAP_TOL: f64 = 1e-6;

fn check_state(rho: &CMatrix, dims: DimPair) -> Result<()> {
    let n = dims.total();
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::InvalidState(format!("expected a {n}x{n} bipartite operator")));
    }
    if (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("trace {} ≠ 1", rho.trace().re)));
    }
    if min_eigenvalue(rho)? < -1e-9 {
        return Err(Error::InvalidState("operator is not PSD".into()));
    }
    Ok(())
}

fn maximize(p: &ConicProgram) -> Result<(f64, Vec<f64>)> {
    maximize_with_dual(p).map(|(v, x, _)| (v, x))
}

fn maximize_with_dual(p: &ConicProgram) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let out = p.solve(SDP_TOL)?;
    if out.status != ConicStatus::Maximized {
        return Err(Error::Numerical(format!("measure program reported {:?}", out.status)));
    }
    let (primal, dual) = (out.objective.unwrap_or(f64::NAN), out.dual_objective.unwrap_or(f64::NAN));
    if !((primal - dual).abs() <= DUALITY_GAP_TOL * (1.0 + primal.abs())) {
        return Err(Error::Numerical(format!("duality gap {:.3e} too large", (primal - dual).abs())));
    }
    let s = out.solution.ok_or_else(|| Error::Numerical("measure program returned no point".into()))?;
    Ok((primal, s.x, s.y))
}

/// `H_min(A|B)_ρ = −log₂ min{Tr σ_B : I_A ⊗ σ_B ⪰ ρ_AB}` in bits.
///
/// Near-pure states make the slack block nearly singular at the optimum; if the
/// σ-form program stalls, the dual form `max{Tr ρX : Tr_A X = I_B, X ⪰ 0}` is
/// solved instead.
///
/// When `ρ` is block diagonal in the computational basis of `A` (a cq state),
/// `I ⊗ σ ⪰ ρ` splits into `σ ⪰ ρ_a` per block, which keeps the program small.
pub fn hmin_general(rho: &CMatrix, dims: DimPair) -> Result<f64> {
    check_state(rho, dims)?;
    if let Some(blocks) = classical_blocks(rho, dims) {
        return match hmin_blocks_sigma(&blocks) {
            Ok(t) => Ok(-t.log2()),
            Err(Error::Numerical(_)) | Err(Error::Conic(_)) => Ok(-hmin_blocks_dual(&blocks)?.log2()),
            Err(e) => Err(e),
        };
    }
    match hmin_sigma_form(rho, dims) {
        Ok(t) => Ok(-t.log2()),
        Err(Error::Numerical(_)) | Err(Error::Conic(_)) => Ok(-hmin_dual_form(rho, dims)?.log2()),
        Err(e) => Err(e),
    }
}

/// Nonzero diagonal blocks `ρ_a`, if all off-diagonal blocks vanish.
fn classical_blocks(rho: &CMatrix, dims: DimPair) -> Option<Vec<CMatrix>> {
    let (da, db) = (dims.d_in, dims.d_out);
    for a in 0..da {
        for a2 in (0..da).filter(|&a2| a2 != a) {
            for b in 0..db {
                for b2 in 0..db {
                    if rho[(a * db + b, a2 * db + b2)].norm() > 1e-15 {
                        return None;
                    }
                }
            }
        }
    }
    let blocks: Vec<CMatrix> = (0..da)
        .map(|a| CMatrix::from_fn(db, db, |b, b2| rho[(a * db + b, a * db + b2)]))
        .filter(|m| m.max_abs() > 0.0)
        .collect();
    Some(blocks)
}

fn hmin_blocks_sigma(blocks: &[CMatrix]) -> Result<f64> {
    Ok(blocks_sigma_solution(blocks)?.0)
}

/// `min{Tr σ : σ ⪰ ρ_a}` together with the dual POVM `X_a` (unnormalized).
fn blocks_sigma_solution(blocks: &[CMatrix]) -> Result<(f64, Vec<CMatrix>)> {
    let db = blocks[0].rows();
    let mut p = ConicProgram::new();
    let sigma = p.add_psd(db);
    let id = |s: &CMatrix| s.clone();
    let neg = |s: &CMatrix| s.scale(-1.0);
    let mut ranges = Vec::new();
    for block in blocks {
        let slack = p.add_psd(db);
        ranges.push(p.add_hermitian_constraint(&[(sigma, &id), (slack, &neg)], block)?);
    }
    p.maximize(p.trace_functional(sigma, &CMatrix::identity(db).scale(-1.0)))?;
    let (value, _, y) = maximize_with_dual(&p)?;
    // Dual feasibility on each slack block reads `−Z_a ⪰ 0`.
    let elements = ranges.into_iter().map(|r| hermitian_from_dual(&y[r], db).scale(-1.0)).collect();
    Ok((-value, elements))
}

fn hmin_blocks_dual(blocks: &[CMatrix]) -> Result<f64> {
    let db = blocks[0].rows();
    let mut p = ConicProgram::new();
    let xs: Vec<_> = blocks.iter().map(|_| p.add_psd(db)).collect();
    let id = |m: &CMatrix| m.clone();
    let terms: Vec<(crate::conic::BlockId, &dyn Fn(&CMatrix) -> CMatrix)> =
        xs.iter().map(|&b| (b, &id as &dyn Fn(&CMatrix) -> CMatrix)).collect();
    p.add_hermitian_constraint(&terms, &CMatrix::identity(db))?;
    let objective = xs.iter().zip(blocks).flat_map(|(&x, block)| p.trace_functional(x, block)).collect();
    p.maximize(objective)?;
    Ok(maximize(&p)?.0)
}

fn hmin_sigma_form(rho: &CMatrix, dims: DimPair) -> Result<f64> {
    let (da, db) = (dims.d_in, dims.d_out);
    let mut p = ConicProgram::new();
    let sigma = p.add_psd(db);
    let slack = p.add_psd(da * db);
    let ia = CMatrix::identity(da);
    let lift = move |s: &CMatrix| kron(&ia, s);
    let neg = |s: &CMatrix| s.scale(-1.0);
    p.add_hermitian_constraint(&[(sigma, &lift), (slack, &neg)], rho)?;
    p.maximize(p.trace_functional(sigma, &CMatrix::identity(db).scale(-1.0)))?;
    Ok(-maximize(&p)?.0)
}

fn hmin_dual_form(rho: &CMatrix, dims: DimPair) -> Result<f64> {
    let db = dims.d_out;
    let mut p = ConicProgram::new();
    let x = p.add_psd(dims.total());
    let reduce = move |m: &CMatrix| partial_trace(m, dims, Subsystem::Second).expect("operator shape");
    p.add_hermitian_constraint(&[(x, &reduce)], &CMatrix::identity(db))?;
    p.maximize(p.trace_functional(x, rho))?;
    Ok(maximize(&p)?.0)
}

/// `q_corr(A|B) = max_D d_A ⟨Φ+|(id ⊗ D)(ρ_AB)|Φ+⟩` over channels `D: B → A'`,
/// returned with the optimal decoder.
pub fn qcorr(rho: &CMatrix, dims: DimPair) -> Result<(f64, QuantumChannel)> {
    check_state(rho, dims)?;
    let (da, db) = (dims.d_in, dims.d_out);
    let ddims = DimPair::new(db, da)?;
    let phi = max_entangled::<f64>(da)?;
    let mut p = ConicProgram::new();
    let j = p.add_psd(db * da);
    let reduce = move |m: &CMatrix| partial_trace(m, ddims, Subsystem::First).expect("decoder Choi shape");
    p.add_hermitian_constraint(&[(j, &reduce)], &CMatrix::identity(db).scale(1.0 / db as f64))?;
    // Objective coefficients by evaluating the linear functional on the parameter basis.
    let off = p.offset(j);
    let objective = hermitian_basis(db * da)
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let map = QuantumChannel::from_parts_unchecked(ddims, e.clone());
            let out = map.apply_second(rho, da).expect("decoder dimensions");
            (off + k, da as f64 * phi.trace_product(&out).re)
        })
        .collect();
    p.maximize(objective)?;
    let (value, x) = maximize(&p)?;
    let choi = p.psd_value(&x, j);
    let decoder = QuantumChannel::with_tolerance(ddims, choi, 1e-6, 1e-6)?;
    Ok((value, decoder))
}

/// `p_guess(U|B) = max_{P} Σ_u p(u) Tr[N(τ^u) P^u]` over POVMs, with the optimal POVM.
/// Symbols with zero prior are dropped from the program and get a zero POVM element.
pub fn pguess_cq(e: &CqEnsemble, n: &QuantumChannel) -> Result<(f64, Vec<CMatrix>)> {
    if e.dim() != n.d_in() {
        return Err(Error::InvalidState(format!("ensemble dimension {} vs channel input {}", e.dim(), n.d_in())));
    }
    let active: Vec<usize> = (0..e.prior().len()).filter(|&u| e.prior()[u] > 0.0).collect();
    match pguess_povm_form(e, n, &active) {
        Err(Error::Numerical(_)) | Err(Error::Conic(_)) => {
            // The POVM program can stall when the optimum sits on a degenerate face;
            // its dual `min{Tr σ : σ ⪰ p(u) N(τ^u)}` has the same value.
            let blocks: Vec<CMatrix> =
                active.iter().map(|&u| Ok(n.apply(&e.states()[u])?.scale(e.prior()[u]))).collect::<Result<_>>()?;
            let (value, elements) = blocks_sigma_solution(&blocks)?;
            let (normalized, _) = normalize_povm(&elements)?;
            let mut povm = vec![CMatrix::zeros(n.d_out(), n.d_out()); e.prior().len()];
            for (&u, m) in active.iter().zip(normalized) {
                povm[u] = m;
            }
            Ok((value, povm))
        }
        other => other,
    }
}

fn pguess_povm_form(e: &CqEnsemble, n: &QuantumChannel, active: &[usize]) -> Result<(f64, Vec<CMatrix>)> {
    let db = n.d_out();
    let mut p = ConicProgram::new();
    let blocks: Vec<_> = active.iter().map(|_| p.add_psd(db)).collect();
    let id = |m: &CMatrix| m.clone();
    let terms: Vec<(crate::conic::BlockId, &dyn Fn(&CMatrix) -> CMatrix)> =
        blocks.iter().map(|&b| (b, &id as &dyn Fn(&CMatrix) -> CMatrix)).collect();
    p.add_hermitian_constraint(&terms, &CMatrix::identity(db))?;
    let mut objective = Vec::new();
    for (&u, &b) in active.iter().zip(&blocks) {
        let out = n.apply(&e.states()[u])?.scale(e.prior()[u]);
        objective.extend(p.trace_functional(b, &out));
    }
    p.maximize(objective)?;
    let (value, x) = maximize(&p)?;
    let mut povm = vec![CMatrix::zeros(db, db); e.prior().len()];
    for (&u, &b) in active.iter().zip(&blocks) {
        povm[u] = p.psd_value(&x, b);
    }
    Ok((value, povm))
}

/// Success probability `Σ_u p(u) Tr[N(τ^u) P^u]` of a given POVM.
pub fn povm_success(e: &CqEnsemble, n: &QuantumChannel, povm: &[CMatrix]) -> Result<f64> {
    let mut total = Complex::new(0.0, 0.0);
    for ((p, tau), m) in e.prior().iter().zip(e.states()).zip(povm) {
        total += n.apply(tau)?.trace_product(m) * *p;
    }
    Ok(total.re)
}

#[cfg(test)]
mod forms {
    use super::*;
    use crate::rng::{random_density, random_pure_state, seeded};

    #[test]
    fn sigma_and_dual_forms_agree() {
        let dims = DimPair { d_in: 2, d_out: 3 };
        for seed in 0..6 {
            let mut rng = seeded(seed);
            let rho = if seed % 2 == 0 { random_density(6, &mut rng) } else { random_pure_state(6, &mut rng) };
            let dual = hmin_dual_form(&rho, dims).unwrap();
            if let Ok(sigma) = hmin_sigma_form(&rho, dims) {
                assert!((sigma - dual).abs() < 1e-6, "seed {seed}: {sigma} vs {dual}");
            }
        }
    }

    #[test]
    fn block_reduction_matches_full_program() {
        let mut rng = seeded(9);
        let dims = DimPair { d_in: 3, d_out: 2 };
        let parts: Vec<CMatrix> = (0..3).map(|_| random_density(2, &mut rng).scale(1.0 / 3.0)).collect();
        let mut rho = CMatrix::zeros(6, 6);
        for (a, part) in parts.iter().enumerate() {
            for b in 0..2 {
                for b2 in 0..2 {
                    rho[(a * 2 + b, a * 2 + b2)] = part[(b, b2)];
                }
            }
        }
        let blocks = classical_blocks(&rho, dims).unwrap();
        let full = hmin_sigma_form(&rho, dims).unwrap();
        assert!((hmin_blocks_sigma(&blocks).unwrap() - full).abs() < 1e-7);
        assert!((hmin_blocks_dual(&blocks).unwrap() - full).abs() < 1e-7);
        assert!(classical_blocks(&random_density(6, &mut rng), dims).is_none());
    }

    #[test]
    fn pguess_fallback_matches_povm_program() {
        let mut rng = seeded(4);
        let n = crate::channels::random_channel(3, 2, 2, 4).unwrap();
        let states = (0..3).map(|_| random_density(3, &mut rng)).collect();
        let e = CqEnsemble::new(vec![0.5, 0.3, 0.2], states).unwrap();
        let (value, _) = pguess_povm_form(&e, &n, &[0, 1, 2]).unwrap();
        let blocks: Vec<CMatrix> = (0..3).map(|u| n.apply(&e.states()[u]).unwrap().scale(e.prior()[u])).collect();
        let (dual, elements) = blocks_sigma_solution(&blocks).unwrap();
        let (povm, _) = normalize_povm(&elements).unwrap();
        assert!((value - dual).abs() < 1e-7, "{value} vs {dual}");
        assert!((povm_success(&e, &n, &povm).unwrap() - value).abs() < 1e-6);
    }
}
