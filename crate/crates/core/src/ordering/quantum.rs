//! Degradability of quantum channels as a semidefinite program.

use crate::channels::{compose, dual_basis, normalize_povm, spanning_states, MeasurePrepareChannel, QuantumChannel};
use crate::conic::{hermitian_from_dual, verify_certificate, BlockId, ConicProgram, ConicStatus};
use crate::linalg::{kron, partial_trace, DimPair, Subsystem};
use crate::{CMatrix, Error, Result};

use super::classical::check_tol;
use super::frame::SeparationFrame;
use super::witness::{QuantumWitness, Witness};
use super::{solver_tol, DegradabilityStatus, DegradabilityVerdict, DegradingMap, WITNESS_MARGIN};

const WITNESS_PROGRAM_TOL: f64 = 1e-9;
const MAP_TOL: f64 = 1e-6;

/// Decides whether `second = Ψ ∘ first` for a channel `Ψ: B → B'`.
pub fn quantum_degradable(first: &QuantumChannel, second: &QuantumChannel, tol: f64) -> Result<DegradabilityVerdict> {
    check_tol(tol)?;
    if first.d_in() != second.d_in() {
        return Err(Error::InvalidArgument(format!("input dimensions differ: {} vs {}", first.d_in(), second.d_in())));
    }
    let mut note = String::new();
    for stol in [solver_tol(tol), (solver_tol(tol) * 0.1).max(1e-10)] {
        match attempt(first, second, tol, stol) {
            Ok(mut v) => {
                if !note.is_empty() {
                    v.note = Some(format!("retried at solver tolerance {stol:.1e} after: {note}"));
                }
                return Ok(v);
            }
            Err(e) => note = e.to_string(),
        }
    }
    Ok(DegradabilityVerdict::inconclusive(tol, note))
}

fn attempt(first: &QuantumChannel, second: &QuantumChannel, tol: f64, stol: f64) -> Result<DegradabilityVerdict> {
    let (da, db, db2) = (first.d_in(), first.d_out(), second.d_out());
    let psi_dims = DimPair::new(db, db2)?;
    let mut p = ConicProgram::new();
    let j = p.add_psd(db * db2);
    let tp = move |m: &CMatrix| partial_trace(m, psi_dims, Subsystem::First).expect("Choi shape");
    p.add_hermitian_constraint(&[(j, &tp)], &CMatrix::identity(db).scale(1.0 / db as f64))?;
    let n_choi = first.choi().clone();
    let lift = move |m: &CMatrix| {
        QuantumChannel::from_parts_unchecked(psi_dims, m.clone()).apply_second(&n_choi, da).expect("Choi shape")
    };
    let eq_rows = p.add_hermitian_constraint(&[(j, &lift)], second.choi())?;
    let out = p.solve(stol)?;
    match out.status {
        ConicStatus::Feasible | ConicStatus::Maximized => {
            let x = out.x().ok_or_else(|| Error::Numerical("feasible outcome without a point".into()))?;
            let choi = p.psd_value(x, j).hermitian_part();
            let psi = QuantumChannel::with_tolerance(psi_dims, choi, MAP_TOL, MAP_TOL)?;
            let residual = compose(&psi, first)?.choi().max_abs_diff(second.choi());
            if residual > tol {
                return Err(Error::Numerical(format!("degrading map residual {residual:.3e} exceeds tolerance")));
            }
            Ok(DegradabilityVerdict {
                status: DegradabilityStatus::Degradable,
                degrading_map: Some(DegradingMap::Quantum { channel: psi }),
                residual: Some(residual),
                witness: None,
                frame: None,
                certificate_gap: None,
                tolerance: tol,
                note: None,
            })
        }
        ConicStatus::Infeasible => {
            let cert =
                out.certificate.ok_or_else(|| Error::Numerical("infeasible outcome without certificate".into()))?;
            let check = verify_certificate(&p, &cert.y, stol);
            if !check.valid {
                return Err(Error::Numerical("infeasibility certificate failed verification".into()));
            }
            let y = hermitian_from_dual(&cert.y[eq_rows], da * db2);
            let frame = frame_from_functional(&y, da, db2)?;
            let witness = extract_quantum_witness(&frame, first, second)?;
            Ok(DegradabilityVerdict {
                status: DegradabilityStatus::NotDegradable,
                degrading_map: None,
                residual: None,
                witness: Some(witness),
                frame: Some(frame),
                certificate_gap: Some(check.gap),
                tolerance: tol,
                note: None,
            })
        }
    }
}

/// Splits `Tr[Y (id ⊗ L)(Φ+)]` into `Σ_i Tr[Y^i L(ω^i)]` over the spanning
/// states `ω^i`: `Y^i = Tr_A[Y (ω̃^{iT} ⊗ I)] / d_A` with `ω̃` the dual frame.
fn frame_from_functional(y: &CMatrix, da: usize, d_out: usize) -> Result<SeparationFrame> {
    let states = spanning_states(da);
    let duals = dual_basis(&states)?;
    let dims = DimPair::new(da, d_out)?;
    let id = CMatrix::identity(d_out);
    let mut operators = Vec::with_capacity(states.len());
    for dual in &duals {
        let weighted = y.matmul(&kron(&dual.transpose(), &id))?;
        operators.push(partial_trace(&weighted, dims, Subsystem::Second)?.scale(1.0 / da as f64).hermitian_part());
    }
    SeparationFrame::from_operators(states, operators)
}

/// Builds a validated witness for a pair separated by `frame`.
///
/// The reported witness maximizes the decoding gap over measure-and-prepare
/// encoders `Γ(X) = Σ_i Tr[P^i X] ω^i`, first with a maximally entangled
/// reference and otherwise with a free pure reference state. The frame's own
/// POVM is the last resort.
pub fn extract_quantum_witness(
    frame: &SeparationFrame,
    first: &QuantumChannel,
    second: &QuantumChannel,
) -> Result<Witness> {
    let d_r = second.d_out();
    let states = spanning_states(first.d_in());
    let uniform_weights = CMatrix::identity(d_r).scale(1.0 / d_r as f64);
    let mut best_gap = f64::NEG_INFINITY;
    let mut last_error = None;
    // Failures of one candidate (e.g. an inaccurate POVM) fall through to the next.
    let mut try_witness = |elements: Result<Vec<CMatrix>>, weighted: bool| -> Option<Witness> {
        let built = elements.and_then(|e| normalize_povm(&e)).and_then(|(povm, total)| {
            let weights = if weighted { total.transpose() } else { uniform_weights.clone() };
            let encoder = MeasurePrepareChannel::new(povm, states.clone())?;
            QuantumWitness::evaluate(encoder, weights, !weighted, first, second)
        });
        match built {
            Ok(w) => {
                best_gap = best_gap.max(w.gap());
                (w.gap() >= WITNESS_MARGIN).then_some(Witness::Quantum(w))
            }
            Err(e) => {
                last_error = Some(e.to_string());
                None
            }
        }
    };
    if let Some(w) = try_witness(optimal_elements(first, second, false), false) {
        return Ok(w);
    }
    if let Some(w) = try_witness(optimal_elements(first, second, true), true) {
        return Ok(w);
    }
    if frame.povm.len() == states.len() && frame.povm[0].rows() == d_r {
        if let Some(w) = try_witness(Ok(frame.povm.clone()), false) {
            return Ok(w);
        }
    }
    if let Some(e) = last_error {
        return Err(Error::Numerical(format!("witness extraction failed: best validated gap {best_gap:.3e}; {e}")));
    }
    Err(Error::Numerical(format!("witness extraction failed: best validated gap {best_gap:.3e}")))
}

/// Solves the gap program over elements `E^i ⪰ 0` paired with the spanning
/// states. Uniform: `Σ E^i = I`, objective `(Σ Tr[E^i σ^i] − Tr Z / d_B) / d_{B'}`.
/// Weighted: `Σ Tr E^i = 1`, objective without the `1/d_{B'}`. In both,
/// `Z ⊗ I − d_B Σ ρ^{iT} ⊗ E^i ⪰ 0` makes `Tr Z / d_B` the best decoding value
/// through the first channel.
fn optimal_elements(first: &QuantumChannel, second: &QuantumChannel, weighted: bool) -> Result<Vec<CMatrix>> {
    let (db, d_r) = (first.d_out(), second.d_out());
    let states = spanning_states(first.d_in());
    let rho_t: Vec<CMatrix> = states.iter().map(|w| first.apply(w).map(|m| m.transpose())).collect::<Result<_>>()?;
    let sigma: Vec<CMatrix> = states.iter().map(|w| second.apply(w)).collect::<Result<_>>()?;
    let mut p = ConicProgram::new();
    let blocks: Vec<BlockId> = states.iter().map(|_| p.add_psd(d_r)).collect();
    let z = p.add_psd(db);
    let s = p.add_psd(db * d_r);
    if weighted {
        let row = blocks.iter().flat_map(|&b| p.trace_functional(b, &CMatrix::identity(d_r))).collect();
        p.add_constraint(row, 1.0)?;
    } else {
        let id = |m: &CMatrix| m.clone();
        let terms: Vec<(BlockId, &dyn Fn(&CMatrix) -> CMatrix)> =
            blocks.iter().map(|&b| (b, &id as &dyn Fn(&CMatrix) -> CMatrix)).collect();
        p.add_hermitian_constraint(&terms, &CMatrix::identity(d_r))?;
    }
    let id_r = CMatrix::identity(d_r);
    let lift_z = |m: &CMatrix| kron(m, &id_r);
    let neg = |m: &CMatrix| m.scale(-1.0);
    let pair_maps: Vec<Box<dyn Fn(&CMatrix) -> CMatrix + '_>> = rho_t
        .iter()
        .map(|r| Box::new(move |m: &CMatrix| kron(r, m).scale(-(db as f64))) as Box<dyn Fn(&CMatrix) -> CMatrix>)
        .collect();
    let mut terms: Vec<(BlockId, &dyn Fn(&CMatrix) -> CMatrix)> = vec![(z, &lift_z), (s, &neg)];
    terms.extend(blocks.iter().zip(&pair_maps).map(|(&b, f)| (b, f.as_ref())));
    p.add_hermitian_constraint(&terms, &CMatrix::zeros(db * d_r, db * d_r))?;
    let scale = if weighted { 1.0 } else { 1.0 / d_r as f64 };
    let mut objective = Vec::new();
    for (&b, sg) in blocks.iter().zip(&sigma) {
        objective.extend(p.trace_functional(b, &sg.scale(scale)));
    }
    objective.extend(p.trace_functional(z, &CMatrix::identity(db).scale(-scale / db as f64)));
    p.maximize(objective)?;
    let out = p.solve(WITNESS_PROGRAM_TOL)?;
    if out.status != ConicStatus::Maximized {
        return Err(Error::Numerical(format!("witness program reported {:?}", out.status)));
    }
    let x = out.x().ok_or_else(|| Error::Numerical("witness program returned no point".into()))?;
    Ok(blocks.iter().map(|&b| p.psd_value(x, b)).collect())
}
