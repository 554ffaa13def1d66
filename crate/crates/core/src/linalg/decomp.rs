use num_complex::Complex;

use super::{mismatch, ComplexMatrix, LinalgError, Real};

const MAX_SWEEPS: usize = 100;

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn check_hermitian<T: Real>(h: &ComplexMatrix<T>) -> Result<(), LinalgError> {
    if !h.is_square() {
        return Err(mismatch("square matrix", format!("{}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let defect = h.hermitian_defect();
    if defect > T::hermitian_tol() {
        return Err(LinalgError::NotHermitian(defect.to_f64().unwrap_or(f64::INFINITY)));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are the
/// matching eigenvectors. The input is symmetrized first, so it only has to be
/// Hermitian within [`Real::hermitian_tol`].
pub fn eigh<T: Real>(h: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>), LinalgError> {
    check_hermitian(h)?;
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);
    let scale = a.frobenius_norm();
    let threshold = T::epsilon() * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= threshold || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= threshold / T::lit(n as f64 * n as f64) || mag == T::zero() {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // G = D·P with D = diag(1, conj(phase)) on (p, q) and P the real rotation.
                let g_pp = Complex::new(c, T::zero());
                let g_pq = Complex::new(s, T::zero());
                let g_qp = phase.conj() * (-s);
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = zero();
                a[(q, p)] = zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>, LinalgError> {
    eigh(h).map(|(values, _)| values)
}

/// Smallest eigenvalue of a Hermitian matrix. `h` is PSD iff the result is `≥ −tol`.
pub fn min_eigenvalue<T: Real>(h: &ComplexMatrix<T>) -> Result<T, LinalgError> {
    eigvalsh(h).map(|v| v[0])
}

pub fn max_eigenvalue<T: Real>(h: &ComplexMatrix<T>) -> Result<T, LinalgError> {
    eigvalsh(h).map(|v| v[v.len() - 1])
}

/// `f(H) = V f(Λ) V†` for Hermitian `H`.
pub fn hermitian_map<T: Real>(h: &ComplexMatrix<T>, f: impl Fn(T) -> T) -> Result<ComplexMatrix<T>, LinalgError> {
    let (values, v) = eigh(h)?;
    let n = values.len();
    let fv: Vec<T> = values.into_iter().map(f).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| (0..n).fold(zero(), |acc, k| acc + v[(i, k)] * v[(j, k)].conj() * fv[k])))
}

/// Lower-triangular `L` with `H = L L†` and positive real diagonal.
pub fn cholesky<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>, LinalgError> {
    if !h.is_square() {
        return Err(mismatch("square matrix", format!("{}x{}", h.rows(), h.cols())));
    }
    let n = h.rows();
    let mut l = ComplexMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Singular value decomposition `B = U diag(σ) V†` of a square matrix by one-sided
/// Jacobi rotations. Small singular values keep high relative accuracy, which the
/// interior-point scaling relies on.
pub fn svd<T: Real>(b: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, Vec<T>, ComplexMatrix<T>), LinalgError> {
    if !b.is_square() {
        return Err(mismatch("square matrix", format!("{}x{}", b.rows(), b.cols())));
    }
    let n = b.rows();
    let mut u = b.clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = zero::<T>();
                for k in 0..n {
                    alpha += u[(k, p)].norm_sqr();
                    beta += u[(k, q)].norm_sqr();
                    gamma += u[(k, p)].conj() * u[(k, q)];
                }
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let sign = if zeta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let r_pq = phase * s;
                let r_qp = phase.conj() * (-s);
                for m in [&mut u, &mut v] {
                    for k in 0..n {
                        let xp = m[(k, p)];
                        let xq = m[(k, q)];
                        m[(k, p)] = xp * c + xq * r_qp;
                        m[(k, q)] = xp * r_pq + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = vec![T::zero(); n];
    for j in 0..n {
        let norm = (0..n).fold(T::zero(), |acc, k| acc + u[(k, j)].norm_sqr()).sqrt();
        sigma[j] = norm;
        if norm > T::zero() {
            for k in 0..n {
                u[(k, j)] = u[(k, j)] / norm;
            }
        }
    }
    Ok((u, sigma, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(n: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = ComplexMatrix::from_fn(n, n, |_, _| Complex::new(next(), next()));
        (&g + &g.adjoint()).scale(0.5)
    }

    #[test]
    fn eigh_simple_cases() {
        assert_eq!(min_eigenvalue(&ComplexMatrix::<f64>::identity(3)).unwrap(), 1.0);
        let d = ComplexMatrix::diag(&[2.0, -1.0]);
        assert!((min_eigenvalue::<f64>(&d).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_reconstructs() {
        for seed in 0..20 {
            let h = sample_hermitian(2 + (seed as usize % 7), seed);
            let (vals, v) = eigh(&h).unwrap();
            let n = vals.len();
            let rebuilt = ComplexMatrix::from_fn(n, n, |i, j| {
                (0..n).fold(Complex::new(0.0, 0.0), |acc, k| acc + v[(i, k)] * v[(j, k)].conj() * vals[k])
            });
            assert!(rebuilt.max_abs_diff(&h) < 1e-12, "seed {seed}");
            assert!((&v.adjoint() * &v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn shift_by_min_eigenvalue_is_singular() {
        for seed in 0..20 {
            let h = sample_hermitian(5, 100 + seed);
            let lmin = min_eigenvalue(&h).unwrap();
            let shifted = &h - &ComplexMatrix::identity(5).scale(lmin);
            assert!(min_eigenvalue(&shifted).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(eigh(&m), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn eigh_works_in_f32() {
        let h = sample_hermitian(4, 9).cast::<f32>();
        let (vals, _) = eigh(&h).unwrap();
        let ref_vals = eigvalsh(&sample_hermitian(4, 9)).unwrap();
        for (a, b) in vals.iter().zip(&ref_vals) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }

    #[test]
    fn svd_reconstructs() {
        for seed in 0..10 {
            let h = sample_hermitian(6, seed);
            let g = &h * &ComplexMatrix::from_fn(6, 6, |i, j| Complex::new((i + j) as f64 * 0.1, i as f64 * 0.05));
            let (u, s, v) = svd(&g).unwrap();
            let rebuilt = ComplexMatrix::from_fn(6, 6, |i, j| {
                (0..6).fold(Complex::new(0.0, 0.0), |acc, k| acc + u[(i, k)] * v[(j, k)].conj() * s[k])
            });
            assert!(rebuilt.max_abs_diff(&g) < 1e-12);
        }
    }

    #[test]
    fn cholesky_reconstructs_and_rejects_indefinite() {
        let h = sample_hermitian(5, 3);
        let pd = &(&h * &h) + &ComplexMatrix::identity(5).scale(0.1);
        let l = cholesky(&pd).unwrap();
        assert!((&l * &l.adjoint()).max_abs_diff(&pd) < 1e-12);
        assert!(cholesky(&ComplexMatrix::diag(&[1.0, -1.0])).is_err());
    }
}
