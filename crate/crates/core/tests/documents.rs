use chanorder::channels::{random_channel, random_classical};
use chanorder::document::{AnyChannel, Document};
use chanorder::infomeasures::{hmin_general, pguess_classical, JointDistribution};
use chanorder::ordering::classical_degradable;
use chanorder::rng::{dirichlet, random_density, seeded};
use chanorder::DimPair;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_channels_round_trip_bit_exactly(d_in in 2usize..=3, d_out in 2usize..=3, rank in 1usize..=4, seed in any::<u64>()) {
        let n = random_channel(d_in, d_out, rank, seed).unwrap();
        let text = Document::quantum(&n, Some("n".into())).to_json();
        let back = Document::parse(&text).unwrap();
        prop_assert_eq!(back.label(), Some("n"));
        prop_assert_eq!(back.to_channel().unwrap(), AnyChannel::Quantum(n));
    }

    #[test]
    fn classical_verdicts_survive_round_trip(nx in 2usize..=4, ny in 2usize..=4, nz in 2usize..=4, seed in any::<u64>()) {
        let w = random_classical(nx, ny, seed);
        let w2 = random_classical(nx, nz, seed.wrapping_add(1));
        let reload = |c: &chanorder::ClassicalChannel| match Document::parse(&Document::classical(c, None).to_json()).unwrap().to_channel().unwrap() {
            AnyChannel::Classical(c) => c,
            AnyChannel::Quantum(_) => unreachable!(),
        };
        let (a, b) = (reload(&w), reload(&w2));
        prop_assert_eq!(&a, &w);
        let before = classical_degradable(&w, &w2, 1e-7).unwrap();
        let after = classical_degradable(&a, &b, 1e-7).unwrap();
        prop_assert_eq!(before.status, after.status);
    }

    #[test]
    fn measures_survive_round_trip(nu in 1usize..=4, ny in 1usize..=4, seed in any::<u64>()) {
        let flat = dirichlet(nu * ny, 1.0, &mut seeded(seed));
        let j = JointDistribution::new(flat.chunks(ny).map(<[f64]>::to_vec).collect()).unwrap();
        let back = Document::parse(&Document::joint(&j, None).to_json()).unwrap().to_joint().unwrap();
        prop_assert!((pguess_classical(&j) - pguess_classical(&back)).abs() <= 1e-9);
    }
}

#[test]
fn states_round_trip() {
    let mut rng = seeded(3);
    let dims = DimPair::new(2, 3).unwrap();
    let rho = random_density(6, &mut rng);
    let (back, back_dims) = Document::parse(&Document::state(&rho, dims, None).to_json()).unwrap().to_state().unwrap();
    assert_eq!(back, rho);
    assert_eq!(back_dims, dims);
    assert!((hmin_general(&rho, dims).unwrap() - hmin_general(&back, back_dims).unwrap()).abs() <= 1e-9);
}
