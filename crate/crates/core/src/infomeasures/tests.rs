use super::*;
use crate::channels::{embed_classical, random_channel_with, ClassicalChannel};
use crate::rng::{dirichlet, random_density, seeded};
use proptest::prelude::*;

fn uniform_through(w: &ClassicalChannel) -> JointDistribution {
    let n = w.in_size();
    JointDistribution::from_encoding(&vec![1.0 / n as f64; n], &ClassicalChannel::identity(n), w).unwrap()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn random_joint(nu: usize, ny: usize, seed: u64) -> JointDistribution {
    let flat = dirichlet(nu * ny, 1.0, &mut seeded(seed));
    JointDistribution::new(flat.chunks(ny).map(|c| c.to_vec()).collect()).unwrap()
}

#[test]
fn joint_validation() {
    assert!(JointDistribution::new(vec![vec![0.5, 0.6]]).is_err());
    assert!(JointDistribution::new(vec![vec![1.1, -0.1]]).is_err());
    assert!(JointDistribution::<f64>::new(vec![]).is_err());
    assert!(JointDistribution::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
}

#[test]
fn pguess_classical_examples() {
    for n in 1..5 {
        let corr = uniform_through(&ClassicalChannel::identity(n));
        assert!((pguess_classical(&corr) - 1.0).abs() < 1e-15);
        let indep = JointDistribution::new(vec![vec![1.0 / (n * n) as f64; n]; n]).unwrap();
        assert!((pguess_classical(&indep) - 1.0 / n as f64).abs() < 1e-15);
    }
    // Brute force over the four deterministic decoders Y → U.
    let j = uniform_through(&ClassicalChannel::bsc(0.1).unwrap());
    let best = (0..4).map(|d: usize| (0..2).map(|y| j.matrix()[(d >> y) & 1][y]).sum::<f64>()).fold(0.0, f64::max);
    assert!((pguess_classical(&j) - best).abs() < 1e-15);
    assert!((best - 0.9).abs() < 1e-15);
}

#[test]
fn shannon_examples() {
    let indep = JointDistribution::<f64>::new(vec![vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
    let hu = entropy(&indep.marginal_u());
    assert!((conditional_entropy(&indep) - hu).abs() < 1e-12);
    assert!(mutual_information(&indep) < 1e-12);
    let corr = uniform_through(&ClassicalChannel::identity(2));
    assert!(conditional_entropy(&corr).abs() < 1e-15);
    assert!((mutual_information(&corr) - 1.0).abs() < 1e-15);
    let bsc = uniform_through(&ClassicalChannel::bsc(0.1).unwrap());
    assert!((mutual_information(&bsc) - (1.0 - h2(0.1))).abs() < 1e-12);
    assert!((mutual_information(&bsc) - 0.531).abs() < 1e-3);
}

#[test]
fn classical_measures_are_generic_over_precision() {
    let j = JointDistribution::<f32>::new(vec![vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
    assert!((pguess_classical(&j) - 0.9).abs() < 1e-6);
    assert!((mutual_information(&j) as f64 - (1.0 - h2(0.1))).abs() < 1e-5);
}

#[test]
fn hmin_examples() {
    for da in 1..4 {
        let sigma = random_density(2, &mut seeded(da as u64));
        let rho = kron(&CMatrix::identity(da).scale(1.0 / da as f64), &sigma);
        let h = hmin_general(&rho, DimPair { d_in: da, d_out: 2 }).unwrap();
        assert!((h - (da as f64).log2()).abs() < 1e-6, "d_A = {da}: {h}");
    }
    for d in 2..4 {
        let h = hmin_general(&max_entangled(d).unwrap(), DimPair { d_in: d, d_out: d }).unwrap();
        assert!((h + (d as f64).log2()).abs() < 1e-6);
    }
    let (rho, dims) = uniform_through(&ClassicalChannel::bsc(0.1).unwrap()).cq_state();
    assert!((hmin_general(&rho, dims).unwrap() + 0.9f64.log2()).abs() < 1e-6);
}

#[test]
fn hmin_rejects_bad_input() {
    let dims = DimPair { d_in: 2, d_out: 2 };
    assert!(hmin_general(&CMatrix::identity(4), dims).is_err());
    assert!(hmin_general(&CMatrix::identity(3).scale(1.0 / 3.0), dims).is_err());
}

use crate::linalg::{kron, max_entangled};

#[test]
fn qcorr_examples() {
    for d in 2..4 {
        let dims = DimPair { d_in: d, d_out: d };
        let (q, decoder) = qcorr(&max_entangled(d).unwrap(), dims).unwrap();
        assert!((q - d as f64).abs() < 1e-6);
        // The optimal decoder is the identity up to solver accuracy.
        assert!(decoder.choi().max_abs_diff(&max_entangled(d).unwrap()) < 1e-4);
        let sigma = random_density(d, &mut seeded(d as u64));
        let product = kron(&CMatrix::identity(d).scale(1.0 / d as f64), &sigma);
        let (q, _) = qcorr(&product, dims).unwrap();
        assert!((q - 1.0 / d as f64).abs() < 1e-6);
    }
}

#[test]
fn qcorr_matches_hmin_on_random_states() {
    let dims = DimPair { d_in: 2, d_out: 2 };
    for seed in 0..10 {
        let rho = random_density(4, &mut seeded(seed));
        let (q, _) = qcorr(&rho, dims).unwrap();
        let h = hmin_general(&rho, dims).unwrap();
        assert!((-q.log2() - h).abs() < 1e-6, "seed {seed}");
    }
}

#[test]
fn pguess_cq_examples() {
    let id = QuantumChannel::identity(2).unwrap();
    let basis = ClassicalChannel::identity(2);
    let orth = CqEnsemble::classical(vec![0.3, 0.7], &basis).unwrap();
    assert!((pguess_cq(&orth, &id).unwrap().0 - 1.0).abs() < 1e-7);

    let tau = random_density(3, &mut seeded(1));
    let same = CqEnsemble::new(vec![0.2, 0.5, 0.3], vec![tau.clone(), tau.clone(), tau]).unwrap();
    let n = crate::channels::random_channel(3, 2, 2, 4).unwrap();
    assert!((pguess_cq(&same, &n).unwrap().0 - 0.5).abs() < 1e-7);

    for seed in 0..10 {
        let mut rng = seeded(seed);
        let enc = ClassicalChannel::random(3, 2, &mut rng);
        let w = ClassicalChannel::random(2, 3, &mut rng);
        let prior = dirichlet(3, 1.0, &mut rng);
        let e = CqEnsemble::classical(prior.clone(), &enc).unwrap();
        let (q, povm) = pguess_cq(&e, &embed_classical(&w)).unwrap();
        let classical = pguess_classical(&JointDistribution::from_encoding(&prior, &enc, &w).unwrap());
        assert!((q - classical).abs() < 1e-7, "seed {seed}");
        assert_eq!(povm.len(), 3);
    }
}

#[test]
fn zero_prior_symbols_are_dropped() {
    let e = CqEnsemble::classical(vec![0.0, 1.0], &ClassicalChannel::identity(2)).unwrap();
    let (q, povm) = pguess_cq(&e, &QuantumChannel::identity(2).unwrap()).unwrap();
    assert!((q - 1.0).abs() < 1e-7);
    assert_eq!(povm[0], CMatrix::zeros(2, 2));
}

#[test]
fn pguess_dominates_explicit_povms() {
    for seed in 0..10 {
        let mut rng = seeded(seed);
        let states: Vec<CMatrix> = (0..3).map(|_| random_density(2, &mut rng)).collect();
        let e = CqEnsemble::new(dirichlet(3, 1.0, &mut rng), states).unwrap();
        let n = random_channel_with(2, 2, 2, &mut rng).unwrap();
        let (best, _) = pguess_cq(&e, &n).unwrap();
        // Projective measurement in the computational basis, outcomes assigned to symbols 0 and 1.
        let explicit = vec![CMatrix::diag(&[1.0, 0.0]), CMatrix::diag(&[0.0, 1.0]), CMatrix::zeros(2, 2)];
        assert!(best >= povm_success(&e, &n, &explicit).unwrap() - 1e-7);
    }
}

#[test]
fn hmin_data_processing() {
    for seed in 0..10 {
        let mut rng = seeded(seed);
        let rho = random_density(4, &mut rng);
        let lambda = random_channel_with(2, 2, 2, &mut rng).unwrap();
        let dims = DimPair { d_in: 2, d_out: 2 };
        let processed = lambda.apply_second(&rho, 2).unwrap();
        assert!(hmin_general(&rho, dims).unwrap() <= hmin_general(&processed, dims).unwrap() + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn min_entropy_is_minus_log_pguess(seed in any::<u64>(), nu in 1usize..4, ny in 1usize..4) {
        let j = random_joint(nu, ny, seed);
        let (rho, dims) = j.cq_state();
        let h = hmin_general(&rho, dims).unwrap();
        prop_assert!((h + pguess_classical(&j).log2()).abs() < 1e-6);
    }

    #[test]
    fn pguess_in_range(seed in any::<u64>(), nu in 1usize..5, ny in 1usize..5) {
        let j = random_joint(nu, ny, seed);
        let p = pguess_classical(&j);
        let floor = j.marginal_u().into_iter().fold(0.0, f64::max);
        prop_assert!(p >= floor - 1e-15 && p <= 1.0 + 1e-15);
        prop_assert!(conditional_entropy(&j) >= 0.0);
    }

    #[test]
    fn mutual_information_dpi(seed in any::<u64>(), nx in 1usize..4, ny in 1usize..4, nz in 1usize..4) {
        let mut rng = seeded(seed);
        let nu = 3;
        let prior = dirichlet(nu, 1.0, &mut rng);
        let enc = ClassicalChannel::random(nu, nx, &mut rng);
        let w = ClassicalChannel::random(nx, ny, &mut rng);
        let phi = ClassicalChannel::random(ny, nz, &mut rng);
        let y = JointDistribution::from_encoding(&prior, &enc, &w).unwrap();
        let z = JointDistribution::from_encoding(&prior, &enc, &phi.after(&w).unwrap()).unwrap();
        prop_assert!(mutual_information(&y) >= mutual_information(&z) - 1e-9);
    }
}
