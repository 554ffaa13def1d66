//! Small real dense kernels for the normal equations.

/// Row-major symmetric matrix.
pub(crate) struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }
}

/// Lower Cholesky factor stored row-major.
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes `m + δI`, growing δ from zero until the factorization succeeds.
    pub fn factor_regularized(m: &SymMatrix) -> Option<Self> {
        let scale = (0..m.n).map(|i| m.at(i, i).abs()).fold(0.0, f64::max).max(1e-300);
        let mut delta = 0.0;
        for _ in 0..12 {
            if let Some(c) = Self::factor(m, delta) {
                return Some(c);
            }
            delta = if delta == 0.0 { scale * 1e-14 } else { delta * 10.0 };
        }
        None
    }

    fn factor(m: &SymMatrix, delta: f64) -> Option<Self> {
        let n = m.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = m.at(j, j) + delta;
            let lj = &l[j * n..j * n + j];
            d -= lj.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = m.at(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sparse_dot(row: &[(usize, f64)], v: &[f64]) -> f64 {
    row.iter().map(|&(j, a)| a * v[j]).sum()
}

/// Indices of a maximal linearly independent subset of `rows`, found by modified
/// Gram–Schmidt with one reorthogonalization pass.
pub(crate) fn independent_rows(rows: &[Vec<f64>], rel_tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let original = norm(row);
        if original == 0.0 {
            continue;
        }
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qx)| *x -= p * qx);
            }
        }
        let r = norm(&v);
        if r > rel_tol * original {
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
            kept.push(i);
        }
    }
    kept
}

/// Orthonormal basis of the span of the given vectors (dropping dependent ones).
pub(crate) fn orthonormal_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for vec in vectors {
        let original = norm(vec);
        if original == 0.0 {
            continue;
        }
        let mut v = vec.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qx)| *x -= p * qx);
            }
        }
        let r = norm(&v);
        if r > rel_tol * original {
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
        }
    }
    basis
}
