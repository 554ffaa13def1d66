use chanorder::linalg::{eigh, kron, partial_trace, partial_transpose, DimPair, Subsystem};
use chanorder::rng::{ginibre, random_density, seeded};
use chanorder::CMatrix;
use proptest::prelude::*;

fn hermitian(d: usize, seed: u64) -> CMatrix {
    ginibre(d, d, &mut seeded(seed)).hermitian_part()
}

proptest! {
    #[test]
    fn eigh_reconstructs(d in 1usize..=6, seed in any::<u64>()) {
        let h = hermitian(d, seed);
        let (vals, v) = eigh(&h).unwrap();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = v.matmul(&CMatrix::diag(&vals)).unwrap().matmul(&v.adjoint()).unwrap();
        prop_assert!(back.max_abs_diff(&h) < 1e-10 * (1.0 + h.max_abs()));
        let gram = v.adjoint().matmul(&v).unwrap();
        prop_assert!(gram.max_abs_diff(&CMatrix::identity(d)) < 1e-10);
    }

    #[test]
    fn partial_traces_of_products(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (a, b) = (random_density(da, &mut rng), random_density(db, &mut rng));
        let ab = kron(&a, &b);
        let dims = DimPair { d_in: da, d_out: db };
        prop_assert!(partial_trace(&ab, dims, Subsystem::First).unwrap().max_abs_diff(&a) < 1e-12);
        prop_assert!(partial_trace(&ab, dims, Subsystem::Second).unwrap().max_abs_diff(&b) < 1e-12);
        let pt = partial_transpose(&ab, dims, Subsystem::Second).unwrap();
        prop_assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-12);
    }
}
