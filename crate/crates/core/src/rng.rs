//! Seeded random generation shared by the channel samplers and the sampled checks.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::{CMatrix, C64};

/// Generator for one trial of a seeded experiment. Trials use independent streams
/// so results do not depend on evaluation order or thread count.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Point on the probability simplex drawn from a symmetric Dirichlet(α).
pub fn dirichlet<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = if (alpha - 1.0).abs() < f64::EPSILON {
        (0..n).map(|_| Exp1.sample(rng)).collect()
    } else {
        let gamma = rand_distr::Gamma::new(alpha, 1.0).expect("alpha > 0");
        (0..n).map(|_| gamma.sample(rng)).collect()
    };
    let mut total: f64 = v.iter().sum();
    if !(total > 0.0) {
        // Tiny α can underflow every component; fall back to a random vertex.
        v.iter_mut().for_each(|x| *x = 0.0);
        v[rng.random_range(0..n)] = 1.0;
        total = 1.0;
    }
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Mixed state `G G† / Tr(G G†)` with `G` a square Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let rho = &g * &g.adjoint();
    let t = rho.trace().re;
    rho.scale(1.0 / t).hermitian_part()
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::outer(&random_unit_vector(d, rng))
}
