//! Degradability of classical channels as a linear program.

use crate::channels::ClassicalChannel;
use crate::conic::{verify_certificate, ConicProgram, ConicStatus};
use crate::{CMatrix, Error, Result};

use super::frame::SeparationFrame;
use super::witness::{ClassicalWitness, Witness};
use super::{solver_tol, DegradabilityStatus, DegradabilityVerdict, DegradingMap, WITNESS_MARGIN};

const WITNESS_PROGRAM_TOL: f64 = 1e-9;

pub(super) fn check_tol(tol: f64) -> Result<()> {
    if !(1e-9..=1e-3).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} outside [1e-9, 1e-3]")));
    }
    Ok(())
}

/// Decides whether `second = φ ∘ first` for a channel `φ: Y → Z`.
pub fn classical_degradable(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
    tol: f64,
) -> Result<DegradabilityVerdict> {
    check_tol(tol)?;
    if first.in_size() != second.in_size() {
        return Err(Error::InvalidArgument(format!(
            "input alphabets differ: {} vs {}",
            first.in_size(),
            second.in_size()
        )));
    }
    let mut note = String::new();
    for stol in [solver_tol(tol), solver_tol(tol) * 0.1] {
        match attempt(first, second, tol, stol.max(1e-10)) {
            Ok(v) => {
                let mut v = v;
                if !note.is_empty() {
                    v.note = Some(format!("retried at solver tolerance {:.1e} after: {note}", stol.max(1e-10)));
                }
                return Ok(v);
            }
            Err(e) => note = e.to_string(),
        }
    }
    Ok(DegradabilityVerdict::inconclusive(tol, note))
}

/// One solve at solver tolerance `stol`; any error means "retry or give up".
fn attempt(first: &ClassicalChannel, second: &ClassicalChannel, tol: f64, stol: f64) -> Result<DegradabilityVerdict> {
    let (nx, ny, nz) = (first.in_size(), first.out_size(), second.out_size());
    let mut p = ConicProgram::new();
    let phi = p.add_nonneg(ny * nz);
    for y in 0..ny {
        p.add_constraint((0..nz).map(|z| (p.var(phi, y * nz + z), 1.0)).collect(), 1.0)?;
    }
    for x in 0..nx {
        for z in 0..nz {
            let row = (0..ny).map(|y| (p.var(phi, y * nz + z), first.prob(y, x))).collect();
            p.add_constraint(row, second.prob(z, x))?;
        }
    }
    let out = p.solve(stol)?;
    match out.status {
        ConicStatus::Feasible | ConicStatus::Maximized => {
            let x = out.x().ok_or_else(|| Error::Numerical("feasible outcome without a point".into()))?;
            let cols: Vec<Vec<f64>> = (0..ny).map(|y| x[y * nz..(y + 1) * nz].to_vec()).collect();
            let map = stochastic_from_columns(&cols)?;
            let residual = max_diff(&map.after(first)?, second);
            if residual > tol {
                return Err(Error::Numerical(format!("degrading map residual {residual:.3e} exceeds tolerance")));
            }
            Ok(DegradabilityVerdict {
                status: DegradabilityStatus::Degradable,
                degrading_map: Some(DegradingMap::Classical { channel: map }),
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
            // Rows ny.. hold the equalities (x, z); their multipliers are the
            // diagonal operators Y^x on Z paired with the input letters x.
            let operators = (0..nx).map(|x| CMatrix::diag(&cert.y[ny + x * nz..ny + (x + 1) * nz])).collect();
            let states = (0..nx).map(|x| basis_state(nx, x)).collect();
            let frame = SeparationFrame::from_operators(states, operators)?;
            let witness = extract_classical_witness(&frame, first, second)?;
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

fn basis_state(d: usize, j: usize) -> CMatrix {
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    CMatrix::diag(&e)
}

/// Largest entrywise difference between two channels of the same shape.
pub(crate) fn max_diff(a: &ClassicalChannel, b: &ClassicalChannel) -> f64 {
    a.matrix().iter().flatten().zip(b.matrix().iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Channel from (nearly) stochastic columns `cols[x][y]`: negatives are clipped
/// and each column renormalized.
fn stochastic_from_columns(cols: &[Vec<f64>]) -> Result<ClassicalChannel> {
    let n_out = cols[0].len();
    let cleaned: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let c: Vec<f64> = c.iter().map(|v| v.max(0.0)).collect();
            let s: f64 = c.iter().sum();
            if s > 0.0 {
                c.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / n_out as f64; n_out]
            }
        })
        .collect();
    ClassicalChannel::new((0..n_out).map(|y| cleaned.iter().map(|c| c[y]).collect()).collect())
}

/// Builds a validated witness for a pair separated by `frame`.
///
/// The reported witness maximizes `pguess(U|Z) − pguess(U|Y)` over encodings
/// `U = Z → X`, first with a uniform prior and otherwise with a free prior, so
/// that it does not depend on which certificate the solver returned. The frame's
/// own POVM is the last resort.
pub fn extract_classical_witness(
    frame: &SeparationFrame,
    first: &ClassicalChannel,
    second: &ClassicalChannel,
) -> Result<Witness> {
    let nz = second.out_size();
    let uniform_prior = vec![1.0 / nz as f64; nz];
    let mut best_gap = f64::NEG_INFINITY;
    if let Ok(enc) = optimal_encoding(first, second) {
        let w = ClassicalWitness::evaluate(uniform_prior.clone(), enc, true, first, second)?;
        if w.gap() >= WITNESS_MARGIN {
            return Ok(Witness::Classical(w));
        }
        best_gap = best_gap.max(w.gap());
    }
    if let Ok((prior, enc)) = optimal_weighted_encoding(first, second) {
        let w = ClassicalWitness::evaluate(prior, enc, false, first, second)?;
        if w.gap() >= WITNESS_MARGIN {
            return Ok(Witness::Classical(w));
        }
        best_gap = best_gap.max(w.gap());
    }
    // The frame's POVM elements P^x are diagonal on Z; read them as p(x|u = z).
    if frame.povm.len() == first.in_size() && frame.povm[0].rows() == nz {
        let cols: Vec<Vec<f64>> = (0..nz).map(|z| frame.povm.iter().map(|p| p[(z, z)].re).collect()).collect();
        let enc = stochastic_from_columns(&cols)?;
        let w = ClassicalWitness::evaluate(uniform_prior, enc, true, first, second)?;
        if w.gap() >= WITNESS_MARGIN {
            return Ok(Witness::Classical(w));
        }
        best_gap = best_gap.max(w.gap());
    }
    Err(Error::Numerical(format!("witness extraction failed: best validated gap {best_gap:.3e}")))
}

/// Variables of the witness programs: `q` (encoding or joint weights, indexed
/// `x·|Z| + z`), `t_y ≥ max_u Σ_x w(y|x) q(x,u)` via slacks.
fn witness_program(first: &ClassicalChannel, second: &ClassicalChannel, weighted: bool) -> Result<ConicProgram> {
    let (nx, ny, nz) = (first.in_size(), first.out_size(), second.out_size());
    let mut p = ConicProgram::new();
    let q = p.add_nonneg(nx * nz);
    let t = p.add_nonneg(ny);
    let s = p.add_nonneg(ny * nz);
    if weighted {
        p.add_constraint((0..nx * nz).map(|i| (p.var(q, i), 1.0)).collect(), 1.0)?;
    } else {
        for z in 0..nz {
            p.add_constraint((0..nx).map(|x| (p.var(q, x * nz + z), 1.0)).collect(), 1.0)?;
        }
    }
    for y in 0..ny {
        for z in 0..nz {
            let mut row = vec![(p.var(t, y), 1.0), (p.var(s, y * nz + z), -1.0)];
            row.extend((0..nx).map(|x| (p.var(q, x * nz + z), -first.prob(y, x))));
            p.add_constraint(row, 0.0)?;
        }
    }
    let scale = if weighted { 1.0 } else { 1.0 / nz as f64 };
    let mut objective: Vec<(usize, f64)> = Vec::new();
    for x in 0..nx {
        for z in 0..nz {
            objective.push((p.var(q, x * nz + z), scale * second.prob(z, x)));
        }
    }
    objective.extend((0..ny).map(|y| (p.var(t, y), -scale)));
    p.maximize(objective)?;
    Ok(p)
}

fn solve_witness_program(p: &ConicProgram) -> Result<Vec<f64>> {
    let out = p.solve(WITNESS_PROGRAM_TOL)?;
    if out.status != ConicStatus::Maximized {
        return Err(Error::Numerical(format!("witness program reported {:?}", out.status)));
    }
    out.solution.map(|s| s.x).ok_or_else(|| Error::Numerical("witness program returned no point".into()))
}

/// Encoding `Z → X` maximizing the uniform-prior guessing gap.
fn optimal_encoding(first: &ClassicalChannel, second: &ClassicalChannel) -> Result<ClassicalChannel> {
    let (nx, nz) = (first.in_size(), second.out_size());
    let x = solve_witness_program(&witness_program(first, second, false)?)?;
    let cols: Vec<Vec<f64>> = (0..nz).map(|z| (0..nx).map(|i| x[i * nz + z]).collect()).collect();
    stochastic_from_columns(&cols)
}

/// Prior and encoding maximizing the guessing gap over all joint `p(u, x)`.
fn optimal_weighted_encoding(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
) -> Result<(Vec<f64>, ClassicalChannel)> {
    let (nx, nz) = (first.in_size(), second.out_size());
    let x = solve_witness_program(&witness_program(first, second, true)?)?;
    let beta: Vec<Vec<f64>> = (0..nz).map(|z| (0..nx).map(|i| x[i * nz + z].max(0.0)).collect()).collect();
    let total: f64 = beta.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("witness program returned a zero joint".into()));
    }
    let prior: Vec<f64> = beta.iter().map(|c| c.iter().sum::<f64>() / total).collect();
    Ok((prior, stochastic_from_columns(&beta)?))
}
