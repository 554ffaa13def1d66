use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{mismatch, DimPair, LinalgError, Real, Subsystem};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::ZeroDimension);
        }
        if data.len() != rows * cols {
            return Err(mismatch(format!("{} entries", rows * cols), format!("{}", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[T]) -> Result<Self, LinalgError> {
        Self::new(rows, cols, entries.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn diag(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    /// Projector `|v⟩⟨v|` (no normalization).
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!((self.cols, self.rows), (other.rows, other.cols), "trace_product shape mismatch");
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff shape mismatch");
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// `(H + H†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian_part needs a square matrix");
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// Relative asymmetry `‖H − H†‖_F / ‖H‖_F` (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let norm = self.frobenius_norm();
        if norm == T::zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Checked product.
    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(mismatch(format!("inner dimension {}", self.cols), format!("{}", other.rows)));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * *b;
                }
            }
        }
        Ok(out)
    }

    /// `self · v`.
    pub fn apply_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "apply_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(U::from(z.re).unwrap(), U::from(z.im).unwrap())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

/// Tensor product `a ⊗ b`; entry `(i, j)` is `a[i / rb][j / cb] · b[i % rb][j % cb]`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn check_bipartite<T: Real>(m: &ComplexMatrix<T>, dims: DimPair) -> Result<(), LinalgError> {
    let n = dims.total();
    if m.rows != n || m.cols != n {
        return Err(mismatch(format!("{n}x{n}"), format!("{}x{}", m.rows, m.cols)));
    }
    Ok(())
}

/// Traces out one factor of a bipartite operator and returns the reduced operator
/// on the factor named by `keep`.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: DimPair,
    keep: Subsystem,
) -> Result<ComplexMatrix<T>, LinalgError> {
    check_bipartite(m, dims)?;
    let (d1, d2) = (dims.d_in, dims.d_out);
    Ok(match keep {
        Subsystem::First => ComplexMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + m[(i * d2 + k, j * d2 + k)])
        }),
        Subsystem::Second => ComplexMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + m[(k * d2 + i, k * d2 + j)])
        }),
    })
}

/// Transposes one factor of a bipartite operator in the standard basis.
pub fn partial_transpose<T: Real>(
    m: &ComplexMatrix<T>,
    dims: DimPair,
    which: Subsystem,
) -> Result<ComplexMatrix<T>, LinalgError> {
    check_bipartite(m, dims)?;
    let d2 = dims.d_out;
    let n = dims.total();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / d2, r % d2);
        let (x, y) = (c / d2, c % d2);
        match which {
            Subsystem::First => m[(x * d2 + b, a * d2 + y)],
            Subsystem::Second => m[(a * d2 + y, x * d2 + b)],
        }
    }))
}

/// Projector onto `d^{-1/2} Σ_i |i⟩|i⟩`.
pub fn max_entangled<T: Real>(d: usize) -> Result<ComplexMatrix<T>, LinalgError> {
    if d == 0 {
        return Err(LinalgError::ZeroDimension);
    }
    let inv = T::one() / T::from_usize(d).unwrap();
    Ok(ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        if r % (d + 1) == 0 && c % (d + 1) == 0 {
            Complex::new(inv, T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn kron_identity_and_scalar() {
        let i2 = ComplexMatrix::<f64>::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 1.0));
        let s = ComplexMatrix::new(1, 1, vec![c(0.5, 2.0)]).unwrap();
        assert!(kron(&a, &s).max_abs_diff(&a.scale_c(c(0.5, 2.0))) < 1e-15);
    }

    #[test]
    fn max_entangled_small_cases() {
        let one = max_entangled::<f64>(1).unwrap();
        assert_eq!(one, ComplexMatrix::identity(1));
        let two = max_entangled::<f64>(2).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let expect = if [0, 3].contains(&r) && [0, 3].contains(&col) { 0.5 } else { 0.0 };
                assert_eq!(two[(r, col)], c(expect, 0.0));
            }
        }
        assert!(max_entangled::<f64>(0).is_err());
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let m = ComplexMatrix::<f64>::identity(5);
        assert!(partial_trace(&m, DimPair::new(2, 2).unwrap(), Subsystem::First).is_err());
    }

    #[test]
    fn partial_transpose_is_involution() {
        let m = ComplexMatrix::from_fn(6, 6, |i, j| c((i * 7 + j) as f64, (i as f64) - (j as f64)));
        let dims = DimPair::new(2, 3).unwrap();
        for which in [Subsystem::First, Subsystem::Second] {
            let t = partial_transpose(&m, dims, which).unwrap();
            assert_eq!(partial_transpose(&t, dims, which).unwrap(), m);
        }
        let both = partial_transpose(&partial_transpose(&m, dims, Subsystem::First).unwrap(), dims, Subsystem::Second)
            .unwrap();
        assert_eq!(both, m.transpose());
    }

    #[test]
    fn new_rejects_nan() {
        assert_eq!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).unwrap_err(), LinalgError::NonFinite);
    }
}
