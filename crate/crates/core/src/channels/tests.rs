use super::*;
use crate::linalg::{eigvalsh, min_eigenvalue, partial_transpose, Subsystem};
use crate::rng::{random_density, seeded};
use proptest::prelude::*;

fn gram_rank(states: &[CMatrix]) -> usize {
    let n = states.len();
    let g = CMatrix::from_fn(n, n, |i, j| states[i].adjoint().trace_product(&states[j]));
    eigvalsh(&g).unwrap().iter().filter(|&&v| v > 1e-10).count()
}

fn stochastic_product(a: &ClassicalChannel, b: &ClassicalChannel) -> Vec<Vec<f64>> {
    // a ∘ b as an explicit matrix product, written independently of `after`.
    let mut out = vec![vec![0.0; b.in_size()]; a.out_size()];
    for (z, row) in out.iter_mut().enumerate() {
        for (x, cell) in row.iter_mut().enumerate() {
            for y in 0..b.out_size() {
                *cell += a.matrix()[z][y] * b.matrix()[y][x];
            }
        }
    }
    out
}

#[test]
fn identity_and_depolarizing() {
    let rho = random_density(3, &mut seeded(1));
    let id = QuantumChannel::identity(3).unwrap();
    assert!(apply(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-14);
    let dep = QuantumChannel::completely_depolarizing(3, 2).unwrap();
    assert!(apply(&dep, &rho).unwrap().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-14);
}

#[test]
fn apply_matches_kraus_oracle() {
    for seed in 0..50 {
        let mut rng = seeded(seed);
        let (din, dout) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3);
        let k = random_kraus_with(din, dout, 1 + seed as usize % 4, &mut rng).unwrap();
        let n = k.to_channel();
        let rho = random_density(din, &mut rng);
        let out = apply(&n, &rho).unwrap();
        assert!(out.max_abs_diff(&k.apply(&rho)) < 1e-10);
        assert!((out.trace().re - 1.0).abs() < 1e-10);
    }
}

#[test]
fn apply_rejects_wrong_dimension() {
    let n = QuantumChannel::identity(2).unwrap();
    assert!(apply(&n, &CMatrix::identity(3)).is_err());
}

#[test]
fn compose_identity_and_apply_twice() {
    for seed in 0..20 {
        let n = random_channel(2, 3, 2, seed).unwrap();
        let psi = random_channel(3, 2, 3, 1000 + seed).unwrap();
        let id = QuantumChannel::identity(3).unwrap();
        assert!(compose(&id, &n).unwrap().choi().max_abs_diff(n.choi()) < 1e-10);
        let c = compose(&psi, &n).unwrap();
        QuantumChannel::new(c.dims(), c.choi().clone()).unwrap();
        let rho = random_density(2, &mut seeded(7 + seed));
        let lhs = apply(&c, &rho).unwrap();
        let rhs = apply(&psi, &apply(&n, &rho).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }
}

#[test]
fn composed_bscs_embed_to_bsc() {
    let (e1, e2) = (0.1, 0.3);
    let a = embed_classical(&ClassicalChannel::bsc(e1).unwrap());
    let b = embed_classical(&ClassicalChannel::bsc(e2).unwrap());
    let expected = embed_classical(&ClassicalChannel::bsc(e1 + e2 - 2.0 * e1 * e2).unwrap());
    assert!(compose(&b, &a).unwrap().choi().max_abs_diff(expected.choi()) < 1e-10);
}

#[test]
fn embed_examples() {
    let id = embed_classical(&ClassicalChannel::identity(2));
    assert!(id.choi().max_abs_diff(&CMatrix::diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
    let e = 0.2;
    let bsc = embed_classical(&ClassicalChannel::bsc(e).unwrap());
    let out = apply(&bsc, &CMatrix::diag(&[1.0, 0.0])).unwrap();
    assert!(out.max_abs_diff(&CMatrix::diag(&[1.0 - e, e])) < 1e-15);
}

#[test]
fn mp_channel_examples() {
    let basis = spanning_states(2)[..2].to_vec();
    let n = mp_channel(basis.clone(), basis).unwrap();
    assert!(n.choi().max_abs_diff(embed_classical(&ClassicalChannel::identity(2)).choi()) < 1e-15);

    let omega = random_density(3, &mut seeded(4));
    let c = mp_channel(vec![CMatrix::identity(2)], vec![omega.clone()]).unwrap();
    let rho = random_density(2, &mut seeded(5));
    assert!(apply(&c, &rho).unwrap().max_abs_diff(&omega) < 1e-14);

    assert!(mp_channel(vec![CMatrix::identity(2).scale(0.9)], vec![omega]).is_err());
}

fn random_povm(d: usize, n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..n).map(|_| random_density(d, rng)).collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, m| &acc + m);
    let inv_sqrt = crate::linalg::hermitian_map(&total, |x| 1.0 / x.sqrt()).unwrap();
    raw.iter().map(|m| (&(&inv_sqrt * m) * &inv_sqrt).hermitian_part()).collect()
}

#[test]
fn mp_channel_matches_definition_and_has_ppt_choi() {
    for seed in 0..20 {
        let mut rng = seeded(seed);
        let (din, dout) = (2 + seed as usize % 3, 2);
        let povm = random_povm(din, 3, &mut rng);
        let preps: Vec<CMatrix> = (0..3).map(|_| random_density(dout, &mut rng)).collect();
        let mp = MeasurePrepareChannel::new(povm, preps).unwrap();
        let n = mp.to_channel();
        let rho = random_density(din, &mut rng);
        assert!(apply(&n, &rho).unwrap().max_abs_diff(&mp.apply(&rho)) < 1e-10);
        let pt = partial_transpose(n.choi(), n.dims(), Subsystem::Second).unwrap();
        assert!(min_eigenvalue(&pt).unwrap() > -1e-10);
    }
}

#[test]
fn conjugate_properties() {
    let e = embed_classical(&ClassicalChannel::bsc(0.2).unwrap());
    assert_eq!(conjugate(&e).choi(), e.choi());
    for seed in 0..10 {
        let n = random_channel(2, 3, 2, seed).unwrap();
        assert_eq!(conjugate(&conjugate(&n)).choi(), n.choi());
        let rho = random_density(2, &mut seeded(50 + seed));
        let lhs = apply(&conjugate(&n), &rho.conj()).unwrap();
        assert!(lhs.max_abs_diff(&apply(&n, &rho).unwrap().conj()) < 1e-12);
    }
}

#[test]
fn random_channel_invariants() {
    for seed in 0..1000u64 {
        let (din, dout) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3);
        let n = random_channel(din, dout, 1 + seed as usize % 3, seed).unwrap();
        QuantumChannel::new(n.dims(), n.choi().clone()).unwrap();
    }
    assert_eq!(random_channel(2, 2, 2, 9).unwrap(), random_channel(2, 2, 2, 9).unwrap());
    assert!(random_channel(2, 2, 0, 9).is_err());
}

#[test]
fn unitary_channel_preserves_spectrum() {
    for seed in 0..10 {
        let u = random_channel(3, 3, 1, seed).unwrap();
        let rho = random_density(3, &mut seeded(seed + 99));
        let before = eigvalsh(&rho).unwrap();
        let after = eigvalsh(&apply(&u, &rho).unwrap()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn spanning_states_span() {
    assert_eq!(spanning_states(1), vec![CMatrix::identity(1)]);
    for d in 1..=4 {
        let s = spanning_states(d);
        assert_eq!(s.len(), d * d);
        assert_eq!(gram_rank(&s), d * d);
        for w in &s {
            assert!((w.trace().re - 1.0).abs() < 1e-15);
            assert!(min_eigenvalue(w).unwrap() > -1e-15);
        }
    }
}

#[test]
fn dual_basis_reconstructs() {
    let s = spanning_states(3);
    let dual = dual_basis(&s).unwrap();
    let x = crate::rng::ginibre(3, 3, &mut seeded(3));
    let rebuilt =
        s.iter().zip(&dual).fold(CMatrix::zeros(3, 3), |acc, (w, wd)| &acc + &w.scale_c(wd.trace_product(&x)));
    assert!(rebuilt.max_abs_diff(&x) < 1e-12);
}

#[test]
fn tensor_matches_factorwise_application() {
    let n1 = random_channel(2, 2, 2, 1).unwrap();
    let n2 = random_channel(2, 3, 2, 2).unwrap();
    let t = tensor(&n1, &n2).unwrap();
    let (r1, r2) = (random_density(2, &mut seeded(3)), random_density(2, &mut seeded(4)));
    let lhs = apply(&t, &crate::linalg::kron(&r1, &r2)).unwrap();
    let rhs = crate::linalg::kron(&apply(&n1, &r1).unwrap(), &apply(&n2, &r2).unwrap());
    assert!(lhs.max_abs_diff(&rhs) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_a_homomorphism(seed in any::<u64>(), nx in 1usize..4, ny in 1usize..4, nz in 1usize..4) {
        let mut rng = seeded(seed);
        let w = ClassicalChannel::random(nx, ny, &mut rng);
        let phi = ClassicalChannel::random(ny, nz, &mut rng);
        let product = ClassicalChannel::new(stochastic_product(&phi, &w)).unwrap();
        let lhs = embed_classical(&product);
        let rhs = compose(&embed_classical(&phi), &embed_classical(&w)).unwrap();
        prop_assert!(lhs.choi().max_abs_diff(rhs.choi()) < 1e-12);
    }

    #[test]
    fn apply_paths_agree(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, r in 1usize..4) {
        let mut rng = seeded(seed);
        let k = random_kraus_with(din, dout, r, &mut rng).unwrap();
        let rho = random_density(din, &mut rng);
        prop_assert!(apply(&k.to_channel(), &rho).unwrap().max_abs_diff(&k.apply(&rho)) < 1e-9);
    }
}
