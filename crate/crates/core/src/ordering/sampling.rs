//! Sampled checks of the noisiness, ambiguity and coherence orderings.
//!
//! Every trial draws its randomness from `(seed, trial)`, so reports do not
//! depend on thread scheduling. Margins are `rhs − lhs` of the inequality that
//! holds for degradable pairs; a trial is a violation when its margin is below
//! `−VIOLATION_TOL`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{compose, random_channel_with, tensor, ClassicalChannel, QuantumChannel};
use crate::infomeasures::{conditional_entropy, hmin_general, pguess_cq, CqEnsemble, JointDistribution};
use crate::linalg::DimPair;
use crate::rng::{dirichlet, random_density, random_pure_state, trial_rng};
use crate::{CMatrix, Error, Result};

use super::classical::classical_degradable;
use super::witness::Witness;
use super::DegradabilityStatus;

pub const VIOLATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub ordering: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest margin seen (negative for a violation).
    pub worst_margin: f64,
    /// Trial index of the worst margin.
    pub worst_trial: Option<usize>,
    /// Trials whose measures could not be evaluated.
    pub failed: usize,
    pub seed: u64,
}

impl ViolationReport {
    fn collect(ordering: &str, seed: u64, margins: Vec<Option<f64>>) -> Self {
        let mut report = Self {
            ordering: ordering.into(),
            trials: margins.len(),
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_trial: None,
            failed: 0,
            seed,
        };
        for (t, m) in margins.into_iter().enumerate() {
            match m {
                Some(m) => {
                    if m < -VIOLATION_TOL {
                        report.violations += 1;
                    }
                    if m < report.worst_margin {
                        report.worst_margin = m;
                        report.worst_trial = Some(t);
                    }
                }
                None => report.failed += 1,
            }
        }
        report
    }
}

fn same_input(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!("input sizes differ: {a} vs {b}")));
    }
    Ok(())
}

/// Random prior and encoding `U → X`: `|U| ∈ 2..=4`, rows drawn from a
/// Dirichlet with concentration 0.2 or 1 (the former favours near-deterministic
/// encodings).
fn random_encoding<R: Rng>(nx: usize, rng: &mut R) -> (Vec<f64>, ClassicalChannel) {
    let nu = rng.random_range(2..=4);
    let alpha = if rng.random_bool(0.5) { 0.2 } else { 1.0 };
    let prior = if rng.random_bool(0.5) { vec![1.0 / nu as f64; nu] } else { dirichlet(nu, 1.0, rng) };
    let cols: Vec<Vec<f64>> = (0..nu).map(|_| dirichlet(nx, alpha, rng)).collect();
    let enc = ClassicalChannel::new((0..nx).map(|x| cols.iter().map(|c| c[x]).collect()).collect())
        .expect("Dirichlet columns are stochastic");
    (prior, enc)
}

/// `H(U|Y) ≤ H(U|Z)` over random encodings. A violation certifies that `first`
/// is not less noisy than `second`.
pub fn check_noisiness_sampled(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    same_input(first.in_size(), second.in_size())?;
    let margins = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (prior, enc) = random_encoding(first.in_size(), &mut trial_rng(seed, t as u64));
            noisiness_margin(first, second, &prior, &enc)
        })
        .collect();
    Ok(ViolationReport::collect("noisiness", seed, margins))
}

/// Noisiness margins for given `(prior, encoding)` pairs.
pub fn check_noisiness_encodings(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
    encodings: &[(Vec<f64>, ClassicalChannel)],
) -> Result<ViolationReport> {
    same_input(first.in_size(), second.in_size())?;
    let margins = encodings.iter().map(|(p, e)| noisiness_margin(first, second, p, e)).collect();
    Ok(ViolationReport::collect("noisiness", 0, margins))
}

fn noisiness_margin(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
    prior: &[f64],
    enc: &ClassicalChannel,
) -> Option<f64> {
    let y = JointDistribution::from_encoding(prior, enc, first).ok()?;
    let z = JointDistribution::from_encoding(prior, enc, second).ok()?;
    Some(conditional_entropy(&z) - conditional_entropy(&y))
}

/// `H_min(U|B)_ρ ≤ H_min(U|B')_σ` over random cq ensembles. Odd trials test the
/// extended pair `id_C ⊗ N`, `id_C ⊗ N'` with `d_C = d_{B'}`.
pub fn check_ambiguity_sampled(
    first: &QuantumChannel,
    second: &QuantumChannel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    same_input(first.d_in(), second.d_in())?;
    let id_c = QuantumChannel::identity(second.d_out())?;
    let extended = (tensor(&id_c, first)?, tensor(&id_c, second)?);
    let margins = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let (n, n2) = if t % 2 == 1 { (&extended.0, &extended.1) } else { (first, second) };
            let e = random_ensemble(n.d_in(), &mut rng);
            ambiguity_margin(n, n2, &e)
        })
        .collect();
    Ok(ViolationReport::collect("ambiguity", seed, margins))
}

/// Ambiguity margins for given ensembles (e.g. ones taken from a witness).
pub fn check_ambiguity_ensembles(
    first: &QuantumChannel,
    second: &QuantumChannel,
    ensembles: &[CqEnsemble],
) -> Result<ViolationReport> {
    same_input(first.d_in(), second.d_in())?;
    let margins = ensembles.par_iter().map(|e| ambiguity_margin(first, second, e)).collect();
    Ok(ViolationReport::collect("ambiguity", 0, margins))
}

fn random_ensemble<R: Rng>(d: usize, rng: &mut R) -> CqEnsemble {
    let nu = rng.random_range(2..=4);
    let prior = dirichlet(nu, 1.0, rng);
    let pure = rng.random_bool(0.5);
    let states = (0..nu).map(|_| if pure { random_pure_state(d, rng) } else { random_density(d, rng) }).collect();
    CqEnsemble::new(prior, states).expect("random ensemble is valid")
}

/// `log₂ pguess(U|B) − log₂ pguess(U|B')`, i.e. `H_min(U|B')_σ − H_min(U|B)_ρ`.
fn ambiguity_margin(first: &QuantumChannel, second: &QuantumChannel, e: &CqEnsemble) -> Option<f64> {
    let (p1, _) = pguess_cq(e, first).ok()?;
    let (p2, _) = pguess_cq(e, second).ok()?;
    Some(p1.log2() - p2.log2())
}

/// A pure reference state on `R̄ ⊗ R` and an encoder `Γ: R → A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProbe {
    pub reference: CMatrix,
    pub encoder: QuantumChannel,
}

impl CoherenceProbe {
    pub fn from_witness(w: &Witness) -> Result<Option<Self>> {
        match w {
            Witness::Quantum(q) => Ok(Some(Self { reference: q.reference_state()?, encoder: q.encoder.to_channel() })),
            Witness::Classical(_) => Ok(None),
        }
    }
}

/// `H_min(R̄|B)_ρ ≤ H_min(R̄|B')_σ` for random pure references with `d_R = d_{B'}`
/// and random encoders `Γ: R → A`.
pub fn check_coherence_sampled(
    first: &QuantumChannel,
    second: &QuantumChannel,
    trials: usize,
    seed: u64,
) -> Result<ViolationReport> {
    same_input(first.d_in(), second.d_in())?;
    let d_r = second.d_out();
    let margins = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let reference = random_pure_state(d_r * d_r, &mut rng);
            let rank = rng.random_range(1..=d_r * first.d_in());
            let encoder = random_channel_with(d_r, first.d_in(), rank, &mut rng).ok()?;
            coherence_margin(first, second, &CoherenceProbe { reference, encoder })
        })
        .collect();
    Ok(ViolationReport::collect("coherence", seed, margins))
}

/// Coherence margins for given probes (e.g. one taken from a witness).
pub fn check_coherence_probes(
    first: &QuantumChannel,
    second: &QuantumChannel,
    probes: &[CoherenceProbe],
) -> Result<ViolationReport> {
    same_input(first.d_in(), second.d_in())?;
    let margins = probes.par_iter().map(|p| coherence_margin(first, second, p)).collect();
    Ok(ViolationReport::collect("coherence", 0, margins))
}

fn coherence_margin(first: &QuantumChannel, second: &QuantumChannel, probe: &CoherenceProbe) -> Option<f64> {
    let d_r = probe.encoder.d_in();
    let rho = compose(first, &probe.encoder).ok()?.apply_second(&probe.reference, d_r).ok()?;
    let sigma = compose(second, &probe.encoder).ok()?.apply_second(&probe.reference, d_r).ok()?;
    let h1 = hmin_general(&rho, DimPair { d_in: d_r, d_out: first.d_out() }).ok()?;
    let h2 = hmin_general(&sigma, DimPair { d_in: d_r, d_out: second.d_out() }).ok()?;
    Some(h2 - h1)
}

/// Search space for [`km_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Number of random pairs examined.
    pub pairs: usize,
    /// Noisiness trials per non-degradable pair.
    pub noisiness_trials: usize,
    /// Draw `second = φ ∘ first` instead of an independent channel.
    pub degradable_only: bool,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KmConfig {
    fn default() -> Self {
        Self { nx: 3, ny: 3, nz: 3, pairs: 100, noisiness_trials: 200, degradable_only: false, tol: 1e-7, seed: 0 }
    }
}

/// A certified non-degradable pair with no sampled noisiness violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmCandidate {
    pub pair_index: usize,
    pub first: ClassicalChannel,
    pub second: ClassicalChannel,
    pub witness: Witness,
    pub noisiness: ViolationReport,
}

/// Looks for pairs that are not degradable yet show no noisiness violation:
/// candidates for "less noisy but not degradable". Exploratory only, since
/// sampling cannot certify less-noisy.
pub fn km_search(config: &KmConfig) -> Result<Vec<KmCandidate>> {
    if [config.nx, config.ny, config.nz].iter().any(|&n| !(1..=8).contains(&n)) {
        return Err(Error::InvalidArgument("alphabet sizes must be in 1..=8".into()));
    }
    let found: Vec<Option<KmCandidate>> = (0..config.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, i as u64);
            let first = ClassicalChannel::random(config.nx, config.ny, &mut rng);
            let second = if config.degradable_only {
                ClassicalChannel::random(config.ny, config.nz, &mut rng).after(&first).ok()?
            } else {
                ClassicalChannel::random(config.nx, config.nz, &mut rng)
            };
            let noise_seed = rng.random::<u64>();
            let mut c = km_classify(&first, &second, config.noisiness_trials, noise_seed, config.tol).ok()??;
            c.pair_index = i;
            Some(c)
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Classifies one pair: a candidate iff certified not degradable and free of
/// sampled noisiness violations.
pub fn km_classify(
    first: &ClassicalChannel,
    second: &ClassicalChannel,
    noisiness_trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<KmCandidate>> {
    let verdict = classical_degradable(first, second, tol)?;
    if verdict.status != DegradabilityStatus::NotDegradable {
        return Ok(None);
    }
    let witness = verdict.witness.expect("not degradable verdicts carry a witness");
    // The witness encoding is a natural probe for the entropy ordering too.
    let mut noisiness = check_noisiness_sampled(first, second, noisiness_trials, seed)?;
    if let Witness::Classical(w) = &witness {
        let probe = check_noisiness_encodings(first, second, &[(w.prior.clone(), w.encoding.clone())])?;
        if probe.worst_margin < noisiness.worst_margin {
            noisiness.worst_margin = probe.worst_margin;
            noisiness.worst_trial = None;
        }
        noisiness.violations += probe.violations;
    }
    if noisiness.violations > 0 {
        return Ok(None);
    }
    Ok(Some(KmCandidate { pair_index: 0, first: first.clone(), second: second.clone(), witness, noisiness }))
}
