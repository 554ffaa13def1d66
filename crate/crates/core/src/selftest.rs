//! The acceptance suite, runnable from the library, the CLI and the test harness.
//!
//! Each criterion recomputes what it checks with the independent measures in
//! [`crate::infomeasures`] rather than trusting values stored in verdicts.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::channels::{compose, embed_classical, ClassicalChannel, QuantumChannel};
use crate::document::AnyChannel;
use crate::infomeasures::{hmin_general, pguess_classical, qcorr, JointDistribution};
use crate::linalg::DimPair;
use crate::ordering::{
    check_ambiguity_sampled, check_coherence_sampled, check_noisiness_sampled, classical_degradable,
    quantum_degradable, DegradabilityStatus, DegradabilityVerdict, DegradingMap, Witness, WITNESS_MARGIN,
};
use crate::pairs::{random_pair_with, PairKind, PairSpec};
use crate::rng::{dirichlet, random_density, seeded};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Roughly a fifth of the full sample sizes.
    Quick,
    Full,
}

impl Profile {
    fn count(self, full: usize) -> usize {
        match self {
            Profile::Full => full,
            Profile::Quick => (full / 5).max(10),
        }
    }
}

/// Fault injection for checking that the suite can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Hooks {
    /// Run verdicts at a loose tolerance while still demanding tight residuals.
    pub corrupt_solver_tol: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Default)]
struct Honesty {
    verdicts: usize,
    feasible_declared_infeasible: usize,
    rejected_certificates: usize,
}

pub struct Selftest {
    profile: Profile,
    hooks: Hooks,
    honesty: Honesty,
}

const TOL: f64 = 1e-7;
const SEED: u64 = 0x5eed;

fn outcome(id: u8, name: &'static str, start: Instant, failures: &[String], summary: String) -> CriterionOutcome {
    let detail = match failures.first() {
        None => summary,
        Some(first) => format!("{summary}; {} failure(s), first: {first}", failures.len()),
    };
    CriterionOutcome { id, name, passed: failures.is_empty(), detail, seconds: start.elapsed().as_secs_f64() }
}

fn classical_residual(map: &ClassicalChannel, first: &ClassicalChannel, second: &ClassicalChannel) -> Result<f64> {
    let composed = map.after(first)?;
    let mut worst = 0.0f64;
    for (a, b) in composed.matrix().iter().zip(second.matrix()) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn quantum_residual(map: &QuantumChannel, first: &QuantumChannel, second: &QuantumChannel) -> Result<f64> {
    let composed = compose(map, first)?;
    Ok((composed.choi() - second.choi()).max_abs())
}

/// Recomputes the witness inequality on the given pair; returns the achieved gap.
fn revalidate(witness: &Witness, first: &AnyChannel, second: &AnyChannel) -> Result<f64> {
    match (witness, first, second) {
        (Witness::Classical(w), AnyChannel::Classical(a), AnyChannel::Classical(b)) => {
            let ga = pguess_classical(&JointDistribution::from_encoding(&w.prior, &w.encoding, a)?);
            let gb = pguess_classical(&JointDistribution::from_encoding(&w.prior, &w.encoding, b)?);
            Ok(gb - ga)
        }
        (Witness::Quantum(w), a, b) => {
            let (ra, rb) = w.states(&a.to_quantum(), &b.to_quantum())?;
            let dims = DimPair::new(w.reference_dim(), a.to_quantum().d_out())?;
            let dims_b = DimPair::new(w.reference_dim(), b.to_quantum().d_out())?;
            Ok(hmin_general(&ra, dims)? - hmin_general(&rb, dims_b)?)
        }
        _ => Err(crate::Error::InvalidArgument("witness kind does not match the channels".into())),
    }
}

impl Selftest {
    pub fn new(profile: Profile, hooks: Hooks) -> Self {
        Self { profile, hooks, honesty: Honesty::default() }
    }

    fn verdict_tol(&self) -> f64 {
        if self.hooks.corrupt_solver_tol {
            1e-3
        } else {
            TOL
        }
    }

    fn decide(&mut self, first: &AnyChannel, second: &AnyChannel, constructed: bool) -> Result<DegradabilityVerdict> {
        let tol = self.verdict_tol();
        let v = match (first, second) {
            (AnyChannel::Classical(a), AnyChannel::Classical(b)) => classical_degradable(a, b, tol)?,
            (a, b) => quantum_degradable(&a.to_quantum(), &b.to_quantum(), tol)?,
        };
        self.honesty.verdicts += 1;
        if constructed && v.status == DegradabilityStatus::NotDegradable {
            self.honesty.feasible_declared_infeasible += 1;
        }
        if v.note.as_deref().is_some_and(|n| n.contains("certificate failed verification")) {
            self.honesty.rejected_certificates += 1;
        }
        Ok(v)
    }

    /// Checks a verdict's map or witness independently; returns a failure message.
    fn audit(&self, v: &DegradabilityVerdict, first: &AnyChannel, second: &AnyChannel) -> Result<Option<String>> {
        match v.status {
            DegradabilityStatus::Degradable => {
                let residual = match (&v.degrading_map, first, second) {
                    (Some(DegradingMap::Classical { channel }), AnyChannel::Classical(a), AnyChannel::Classical(b)) => {
                        classical_residual(channel, a, b)?
                    }
                    (Some(DegradingMap::Quantum { channel }), a, b) => {
                        quantum_residual(channel, &a.to_quantum(), &b.to_quantum())?
                    }
                    _ => return Ok(Some("degradable verdict without a matching map".into())),
                };
                Ok((residual > TOL).then(|| format!("composition residual {residual:.3e}")))
            }
            DegradabilityStatus::NotDegradable => {
                let Some(w) = &v.witness else {
                    return Ok(Some("not_degradable verdict without a witness".into()));
                };
                let gap = revalidate(w, first, second)?;
                Ok((gap < WITNESS_MARGIN).then(|| format!("witness gap {gap:.3e} below {WITNESS_MARGIN:e}")))
            }
            DegradabilityStatus::Inconclusive => Ok(None),
        }
    }

    /// Constructed pairs `(N, ψ∘N)` are degradable with a tight residual, fast.
    pub fn constructed_degradable(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let n = self.profile.count(100);
        let mut rng = seeded(SEED ^ 1);
        let mut failures = Vec::new();
        let mut worst = 0.0f64;
        for (kind, max) in [(PairKind::Classical, 8), (PairKind::Quantum, 3)] {
            for i in 0..n {
                let spec = PairSpec {
                    kind,
                    d_in: rng.random_range(2..=max),
                    d_out: rng.random_range(2..=max),
                    d_out2: rng.random_range(2..=max),
                    degradable: true,
                };
                let result = random_pair_with(spec, &mut rng).and_then(|(a, b)| {
                    let v = self.decide(&a, &b, true)?;
                    if v.status != DegradabilityStatus::Degradable {
                        return Ok(Some(format!("status {:?}", v.status)));
                    }
                    worst = worst.max(v.residual.unwrap_or(f64::INFINITY));
                    self.audit(&v, &a, &b)
                });
                match result {
                    Ok(None) => {}
                    Ok(Some(msg)) => failures.push(format!("{kind:?} pair {i}: {msg}")),
                    Err(e) => failures.push(format!("{kind:?} pair {i}: {e}")),
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        if self.profile == Profile::Full && secs > 60.0 {
            failures.push(format!("took {secs:.1} s, budget 60 s"));
        }
        let summary = format!("{n} classical + {n} quantum pairs, worst residual {worst:.2e}, {secs:.1} s");
        outcome(1, "constructed-degradable soundness", start, &failures, summary)
    }

    /// Every not-degradable verdict on free pairs ships a validating witness.
    pub fn witness_soundness(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let n = self.profile.count(100);
        let mut rng = seeded(SEED ^ 2);
        let mut failures = Vec::new();
        let mut counts = [0usize; 3];
        let mut min_gap = f64::INFINITY;
        let mut inconclusive_note = None;
        for (kind, max) in [(PairKind::Classical, 4), (PairKind::Quantum, 2)] {
            for i in 0..n {
                let spec = PairSpec {
                    kind,
                    d_in: rng.random_range(2..=max),
                    d_out: rng.random_range(2..=max),
                    d_out2: rng.random_range(2..=max),
                    degradable: false,
                };
                let result = random_pair_with(spec, &mut rng).and_then(|(a, b)| {
                    let v = self.decide(&a, &b, false)?;
                    counts[v.status as usize] += 1;
                    if v.status == DegradabilityStatus::Inconclusive && inconclusive_note.is_none() {
                        inconclusive_note = v.note.clone();
                    }
                    if let Some(w) = &v.witness {
                        min_gap = min_gap.min(revalidate(w, &a, &b)?);
                    }
                    self.audit(&v, &a, &b)
                });
                match result {
                    Ok(None) => {}
                    Ok(Some(msg)) => failures.push(format!("{kind:?} pair {i}: {msg}")),
                    Err(e) => failures.push(format!("{kind:?} pair {i}: {e}")),
                }
            }
        }
        let mut summary = format!(
            "{} degradable, {} not degradable (smallest re-validated gap {min_gap:.2e}), {} inconclusive",
            counts[0], counts[1], counts[2]
        );
        if let Some(note) = inconclusive_note {
            summary.push_str(&format!(" [{note}]"));
        }
        outcome(2, "witness soundness", start, &failures, summary)
    }

    /// Conditional min-entropy of a cq state is −log₂ of the guessing probability.
    pub fn cq_min_entropy(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let n = self.profile.count(200);
        let mut rng = seeded(SEED ^ 3);
        let mut failures = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..n {
            let (nu, ny) = (rng.random_range(1..=8), rng.random_range(1..=8));
            let flat = dirichlet(nu * ny, 1.0, &mut rng);
            let rows = flat.chunks(ny).map(<[f64]>::to_vec).collect();
            let result = JointDistribution::new(rows).and_then(|j| {
                let (rho, dims) = j.cq_state();
                Ok((hmin_general(&rho, dims)? + pguess_classical(&j).log2()).abs())
            });
            match result {
                Ok(d) => {
                    worst = worst.max(d);
                    if d > 1e-6 {
                        failures.push(format!("joint {i} ({nu}x{ny}): deviation {d:.3e}"));
                    }
                }
                Err(e) => failures.push(format!("joint {i}: {e}")),
            }
        }
        outcome(3, "cq min-entropy identity", start, &failures, format!("{n} joints, worst deviation {worst:.2e}"))
    }

    /// −log₂ q_corr agrees with the conditional min-entropy.
    pub fn qcorr_duality(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let n = self.profile.count(100);
        let mut rng = seeded(SEED ^ 4);
        let mut failures = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..n {
            let (da, db) = match i % 3 {
                0 => (2, 2),
                1 => (2, 3),
                _ => (3, 2),
            };
            let rho = random_density(da * db, &mut rng);
            let result = DimPair::new(da, db).map_err(crate::Error::from).and_then(|dims| {
                let (q, _) = qcorr(&rho, dims)?;
                Ok((-q.log2() - hmin_general(&rho, dims)?).abs())
            });
            match result {
                Ok(d) => {
                    worst = worst.max(d);
                    if d > 1e-6 {
                        failures.push(format!("state {i} ({da}x{db}): deviation {d:.3e}"));
                    }
                }
                Err(e) => failures.push(format!("state {i}: {e}")),
            }
        }
        outcome(4, "q_corr / h_min duality", start, &failures, format!("{n} states, worst deviation {worst:.2e}"))
    }

    /// Constructed-degradable pairs never violate the sampled orderings.
    pub fn data_processing(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let (pairs, ensembles, coherence) = (5, self.profile.count(500), self.profile.count(200));
        let mut failures = Vec::new();
        let mut worst = f64::INFINITY;
        let mut total = 0;
        for i in 0..pairs {
            let seed = SEED ^ (5 << 8) ^ i as u64;
            let mut rng = seeded(seed);
            let mut check = |label: &str, report: Result<crate::ordering::ViolationReport>| match report {
                Ok(r) => {
                    total += r.trials;
                    worst = worst.min(r.worst_margin);
                    if r.violations > 0 || r.failed > 0 {
                        failures.push(format!(
                            "{label} pair {i}: {} violation(s), {} failed, worst margin {:.3e}",
                            r.violations, r.failed, r.worst_margin
                        ));
                    }
                }
                Err(e) => failures.push(format!("{label} pair {i}: {e}")),
            };
            let q = PairSpec {
                kind: PairKind::Quantum,
                d_in: rng.random_range(2..=3),
                d_out: rng.random_range(2..=3),
                d_out2: 2,
                degradable: true,
            };
            let c = PairSpec { kind: PairKind::Classical, d_in: rng.random_range(2..=6), d_out: 4, d_out2: 3, ..q };
            match (random_pair_with(q, &mut rng), random_pair_with(c, &mut rng)) {
                (Ok((a, b)), Ok((AnyChannel::Classical(ca), AnyChannel::Classical(cb)))) => {
                    let (a, b) = (a.to_quantum(), b.to_quantum());
                    check("ambiguity", check_ambiguity_sampled(&a, &b, ensembles / pairs, seed));
                    if i < 2 {
                        check("coherence", check_coherence_sampled(&a, &b, coherence / 2, seed));
                    }
                    check("noisiness", check_noisiness_sampled(&ca, &cb, ensembles / pairs, seed));
                }
                _ => failures.push(format!("pair {i}: generation failed")),
            }
        }
        let summary = format!("{total} sampled trials, worst margin {worst:.2e}");
        outcome(5, "data-processing suites", start, &failures, summary)
    }

    /// Binary symmetric channels: degradable iff e ≤ e' ≤ 1−e, map BSC(δ).
    pub fn bsc_threshold(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let mut failures = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..=10usize {
            for j in 0..=10usize {
                let (e, e2) = (i as f64 * 0.05, j as f64 * 0.05);
                let expected = i <= j;
                let result = (|| -> Result<Option<String>> {
                    let (a, b) = (ClassicalChannel::bsc(e)?, ClassicalChannel::bsc(e2)?);
                    let (a, b) = (AnyChannel::Classical(a), AnyChannel::Classical(b));
                    let v = self.decide(&a, &b, expected)?;
                    if v.is_degradable() != expected || v.status == DegradabilityStatus::Inconclusive {
                        return Ok(Some(format!("status {:?}", v.status)));
                    }
                    if let Some(msg) = self.audit(&v, &a, &b)? {
                        return Ok(Some(msg));
                    }
                    if let (Some(DegradingMap::Classical { channel }), true) = (&v.degrading_map, i < 10) {
                        let delta = (e2 - e) / (1.0 - 2.0 * e);
                        let d = (channel.prob(1, 0) - delta).abs().max((channel.prob(0, 1) - delta).abs());
                        worst = worst.max(d);
                        if d > 1e-6 {
                            return Ok(Some(format!("map deviates from δ = {delta} by {d:.3e}")));
                        }
                    }
                    Ok(None)
                })();
                match result {
                    Ok(None) => {}
                    Ok(Some(msg)) => failures.push(format!("e = {e:.2}, e' = {e2:.2}: {msg}")),
                    Err(err) => failures.push(format!("e = {e:.2}, e' = {e2:.2}: {err}")),
                }
            }
        }
        outcome(6, "BSC threshold", start, &failures, format!("121 grid points, worst δ deviation {worst:.2e}"))
    }

    /// Classical and embedded-quantum decisions agree, including witness gaps.
    pub fn embedded_consistency(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let n = self.profile.count(100);
        let mut rng = seeded(SEED ^ 7);
        let mut failures = Vec::new();
        let mut worst = 0.0f64;
        let mut not_degradable = 0;
        for i in 0..n {
            let spec = PairSpec {
                kind: PairKind::Classical,
                d_in: rng.random_range(2..=3),
                d_out: rng.random_range(2..=3),
                d_out2: rng.random_range(2..=3),
                degradable: i % 2 == 0,
            };
            let result = random_pair_with(spec, &mut rng).and_then(|(a, b)| {
                let vc = self.decide(&a, &b, spec.degradable)?;
                let qa = AnyChannel::Quantum(embed_classical_any(&a));
                let qb = AnyChannel::Quantum(embed_classical_any(&b));
                let vq = self.decide(&qa, &qb, spec.degradable)?;
                if vc.status != vq.status || vc.status == DegradabilityStatus::Inconclusive {
                    return Ok(Some(format!("classical {:?} vs quantum {:?}", vc.status, vq.status)));
                }
                if let Some(msg) = self.audit(&vc, &a, &b)?.or(self.audit(&vq, &qa, &qb)?) {
                    return Ok(Some(msg));
                }
                if let (Some(wc), Some(wq)) = (&vc.witness, &vq.witness) {
                    not_degradable += 1;
                    let d = (wc.probability_gap() - wq.probability_gap()).abs();
                    worst = worst.max(d);
                    if d > 1e-6 {
                        return Ok(Some(format!("witness gaps differ by {d:.3e}")));
                    }
                }
                Ok(None)
            });
            match result {
                Ok(None) => {}
                Ok(Some(msg)) => failures.push(format!("pair {i}: {msg}")),
                Err(e) => failures.push(format!("pair {i}: {e}")),
            }
        }
        let summary = format!("{n} pairs ({not_degradable} not degradable), worst gap difference {worst:.2e}");
        outcome(7, "embedded consistency", start, &failures, summary)
    }

    /// Tallies over every verdict computed so far in this run.
    pub fn solver_honesty(&self) -> CriterionOutcome {
        let start = Instant::now();
        let h = &self.honesty;
        let mut failures = Vec::new();
        if h.verdicts == 0 {
            failures.push("no verdicts were computed".to_string());
        }
        if h.feasible_declared_infeasible > 0 {
            failures.push(format!("{} feasible instance(s) declared infeasible", h.feasible_declared_infeasible));
        }
        if h.rejected_certificates > 0 {
            failures.push(format!("{} certificate(s) failed verification", h.rejected_certificates));
        }
        outcome(8, "solver honesty", start, &failures, format!("{} verdicts audited", h.verdicts))
    }

    /// Seeded generation and sampling give identical serialized output.
    pub fn reproducibility(&mut self) -> CriterionOutcome {
        let start = Instant::now();
        let mut failures = Vec::new();
        let run = |seed: u64| -> Result<String> {
            let spec = PairSpec { kind: PairKind::Quantum, d_in: 2, d_out: 2, d_out2: 2, degradable: false };
            let (a, b) = crate::pairs::random_pair(spec, seed)?;
            let (qa, qb) = (a.to_quantum(), b.to_quantum());
            let w = crate::channels::random_classical(3, 3, seed);
            let w2 = crate::channels::random_classical(3, 2, seed + 1);
            let reports = [
                check_ambiguity_sampled(&qa, &qb, 10, seed)?,
                check_coherence_sampled(&qa, &qb, 10, seed)?,
                check_noisiness_sampled(&w, &w2, 20, seed)?,
            ];
            Ok(format!(
                "{}{}{}",
                a.to_document(None).to_json(),
                b.to_document(None).to_json(),
                serde_json::to_string(&reports).expect("reports serialize")
            ))
        };
        for seed in [1u64, 2, 3] {
            match (run(seed), run(seed)) {
                (Ok(x), Ok(y)) if x == y => {}
                (Ok(_), Ok(_)) => failures.push(format!("seed {seed}: outputs differ")),
                (Err(e), _) | (_, Err(e)) => failures.push(format!("seed {seed}: {e}")),
            }
        }
        outcome(9, "reproducibility", start, &failures, "3 seeds, pairs and sampling reports compared".into())
    }

    /// Runs criteria 1–9 in order; honesty is tallied over criteria 1–7.
    pub fn run_all(&mut self) -> Vec<CriterionOutcome> {
        vec![
            self.constructed_degradable(),
            self.witness_soundness(),
            self.cq_min_entropy(),
            self.qcorr_duality(),
            self.data_processing(),
            self.bsc_threshold(),
            self.embedded_consistency(),
            self.solver_honesty(),
            self.reproducibility(),
        ]
    }
}

fn embed_classical_any(c: &AnyChannel) -> QuantumChannel {
    match c {
        AnyChannel::Classical(w) => embed_classical(w),
        AnyChannel::Quantum(n) => n.clone(),
    }
}

pub fn run(profile: Profile, hooks: Hooks) -> Vec<CriterionOutcome> {
    Selftest::new(profile, hooks).run_all()
}
