//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling and a
//! Mehrotra predictor–corrector.
//!
//! Internally the program is `min cᵀx s.t. Ax = b, x ∈ K` with PSD blocks in
//! isometric coordinates (off-diagonal parameters scaled by √2), so the cone
//! inner product is the Euclidean one. The embedding residuals are
//! `rp = Ax − bτ`, `rd = Aᵀy + s − cτ`, `rg = cᵀx − bᵀy + κ`.

use std::f64::consts::SQRT_2;

use num_complex::Complex;

use super::dense::{dot, independent_rows, norm, orthonormal_basis, sparse_dot, Cholesky, SymMatrix};
use super::{
    offdiag_offset, verify_certificate, Certificate, Cone, ConicError, ConicOutcome, ConicProgram, ConicStatus, Row,
    Solution,
};
use crate::linalg::{cholesky, eigvalsh, svd};
use crate::CMatrix;

const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.99;
const DEPENDENT_ROW_TOL: f64 = 1e-9;

struct Problem {
    rows: Vec<Row>,
    b: Vec<f64>,
    c: Vec<f64>,
    cones: Vec<(Cone, usize)>,
    n: usize,
    nu: f64,
}

pub(super) fn solve(p: &ConicProgram, tol: f64) -> Result<ConicOutcome, ConicError> {
    let n = p.n_params;
    let colscale = column_scaling(p);

    // Drop linearly dependent rows; certify inconsistency of the equalities directly.
    let dense_rows: Vec<Vec<f64>> = p
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![0.0; n];
            for &(j, a) in row {
                v[j] = a;
            }
            v
        })
        .collect();
    let kept = independent_rows(&dense_rows, DEPENDENT_ROW_TOL);
    if let Some(y) = inconsistency_certificate(&dense_rows, &kept, &p.rhs, tol) {
        let check = verify_certificate(p, &y, tol);
        if check.valid {
            return Ok(infeasible(y, check.gap, 0));
        }
    }

    // Equilibrate rows and move to isometric coordinates.
    let mut rows = Vec::with_capacity(kept.len());
    let mut b = Vec::with_capacity(kept.len());
    let mut row_scale = Vec::with_capacity(kept.len());
    for &i in &kept {
        let row: Row = p.rows[i].iter().map(|&(j, a)| (j, a * colscale[j])).collect();
        let rn = row.iter().map(|&(_, a)| a * a).sum::<f64>().sqrt();
        let d = 1.0 / rn;
        rows.push(row.into_iter().map(|(j, a)| (j, a * d)).collect());
        b.push(p.rhs[i] * d);
        row_scale.push(d);
    }
    let mut c = vec![0.0; n];
    if let Some(obj) = &p.objective {
        for &(j, a) in obj {
            c[j] = -a * colscale[j];
        }
    }
    let cnorm = norm(&c);
    let cscale = if cnorm > 0.0 { cnorm } else { 1.0 };
    c.iter_mut().for_each(|v| *v /= cscale);

    let cones: Vec<(Cone, usize)> = p.cones.iter().copied().zip(p.offsets.iter().copied()).collect();
    let nu = p.cones.iter().map(|c| c.barrier_degree()).sum::<usize>() as f64;
    let prob = Problem { rows, b, c, cones, n, nu };

    let to_external_y = |y_int: &[f64], factor: f64| -> Vec<f64> {
        let mut y = vec![0.0; p.rows.len()];
        for (k, &i) in kept.iter().enumerate() {
            y[i] = y_int[k] * row_scale[k] * factor;
        }
        y
    };

    let mut state = State::initial(&prob);
    let mut stalled = 0;
    // Best iterate meeting the tolerance so far, kept in case later steps lose accuracy.
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, usize)> = None;
    let outcome_or_failure =
        |best: Option<(f64, Vec<f64>, Vec<f64>, usize)>, res: &Residuals, iterations: usize| match best {
            Some((_, x, y, it)) => Ok(optimal(p, x, y, it)),
            None => Err(ConicError::NumericalFailure { iterations, primal: res.primal, dual: res.dual, gap: res.gap }),
        };
    for iteration in 0..MAX_ITERATIONS {
        let res = Residuals::new(&prob, &state);

        // Infeasibility: bᵀy > 0 with Aᵀy + s ≈ 0.
        let bty = dot(&prob.b, &state.y);
        if bty > 0.0 && res.aty_s_norm <= tol * bty {
            let y = to_external_y(&state.y, 1.0);
            let ny = norm(&y);
            if ny > 0.0 {
                let y: Vec<f64> = y.iter().map(|v| v / ny).collect();
                let check = verify_certificate(p, &y, tol);
                if check.valid {
                    return Ok(infeasible(y, check.gap, iteration));
                }
            }
        }
        // Unboundedness of the primal (minimization) objective.
        let ctx = dot(&prob.c, &state.x);
        if ctx < 0.0 && res.ax_norm <= 1e-9 * -ctx && state.tau < 1e-6 * state.kappa {
            return Err(ConicError::Unbounded);
        }

        if res.primal <= tol && res.dual <= tol && res.gap <= tol {
            let x_ext: Vec<f64> = state.x.iter().zip(&colscale).map(|(x, s)| x * s / state.tau).collect();
            if p.residual(&x_ext) <= tol {
                let score = res.primal.max(res.dual).max(res.gap);
                let y_ext = to_external_y(&state.y, -cscale / state.tau);
                if score <= tol * 0.1 {
                    return Ok(optimal(p, x_ext, y_ext, iteration));
                }
                if best.as_ref().is_none_or(|b| score < b.0) {
                    best = Some((score, x_ext, y_ext, iteration));
                }
            }
        }

        let Some(scaling) = Scaling::new(&prob, &state) else {
            return outcome_or_failure(best, &res, iteration);
        };
        let Some(step) = newton_step(&prob, &state, &res, &scaling) else {
            return outcome_or_failure(best, &res, iteration);
        };
        state.advance(&step);
        if step.alpha < 1e-6 {
            stalled += 1;
            if stalled > 3 || best.is_some() {
                return outcome_or_failure(best, &res, iteration);
            }
        } else {
            stalled = 0;
        }
    }
    let res = Residuals::new(&prob, &state);
    outcome_or_failure(best, &res, MAX_ITERATIONS)
}

fn infeasible(y: Vec<f64>, gap: f64, iterations: usize) -> ConicOutcome {
    ConicOutcome {
        status: ConicStatus::Infeasible,
        solution: None,
        certificate: Some(Certificate { y, gap }),
        objective: None,
        dual_objective: None,
        iterations,
    }
}

fn optimal(p: &ConicProgram, x: Vec<f64>, y: Vec<f64>, iterations: usize) -> ConicOutcome {
    let residual = p.residual(&x);
    let objective = p.objective_value(&x);
    let dual_objective = objective.map(|_| dot(&y, &p.rhs));
    ConicOutcome {
        status: if objective.is_some() { ConicStatus::Maximized } else { ConicStatus::Feasible },
        solution: Some(Solution { x, residual, y }),
        certificate: None,
        objective,
        dual_objective,
        iterations,
    }
}

fn column_scaling(p: &ConicProgram) -> Vec<f64> {
    let mut s = vec![1.0; p.n_params];
    for (cone, &off) in p.cones.iter().zip(&p.offsets) {
        if let Cone::Psd(d) = *cone {
            for v in &mut s[off + d..off + d * d] {
                *v = std::f64::consts::FRAC_1_SQRT_2;
            }
        }
    }
    s
}

/// Unit vector `y` with `Aᵀy = 0` and `yᵀb > 0` when `b` is not in the range of `A`.
fn inconsistency_certificate(rows: &[Vec<f64>], kept: &[usize], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = rows.len();
    if m == 0 {
        return None;
    }
    // Columns of A·A_keptᵀ span range(A).
    let columns: Vec<Vec<f64>> = kept.iter().map(|&k| rows.iter().map(|r| dot(r, &rows[k])).collect()).collect();
    let q = orthonormal_basis(&columns, 1e-12);
    let mut r = b.to_vec();
    for _ in 0..2 {
        for qv in &q {
            let proj = dot(qv, &r);
            r.iter_mut().zip(qv).for_each(|(x, qx)| *x -= proj * qx);
        }
    }
    let rn = norm(&r);
    if rn < tol {
        return None;
    }
    Some(r.iter().map(|v| v / rn).collect())
}

// ---------------------------------------------------------------------------
// Iterates and residuals

struct State {
    x: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
    tau: f64,
    kappa: f64,
}

impl State {
    fn initial(p: &Problem) -> Self {
        let e = identity_vector(p);
        Self { x: e.clone(), s: e, y: vec![0.0; p.rows.len()], tau: 1.0, kappa: 1.0 }
    }

    fn advance(&mut self, step: &Step) {
        let a = step.alpha;
        self.x.iter_mut().zip(&step.dx).for_each(|(v, d)| *v += a * d);
        self.s.iter_mut().zip(&step.ds).for_each(|(v, d)| *v += a * d);
        self.y.iter_mut().zip(&step.dy).for_each(|(v, d)| *v += a * d);
        self.tau += a * step.dtau;
        self.kappa += a * step.dkappa;
    }
}

fn identity_vector(p: &Problem) -> Vec<f64> {
    let mut e = vec![0.0; p.n];
    for &(cone, off) in &p.cones {
        match cone {
            Cone::Nonnegative(len) => e[off..off + len].iter_mut().for_each(|v| *v = 1.0),
            Cone::Psd(d) => e[off..off + d].iter_mut().for_each(|v| *v = 1.0),
        }
    }
    e
}

struct Residuals {
    rp: Vec<f64>,
    rd: Vec<f64>,
    rg: f64,
    mu: f64,
    primal: f64,
    dual: f64,
    gap: f64,
    aty_s_norm: f64,
    ax_norm: f64,
}

fn mat_vec(rows: &[Row], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| sparse_dot(r, x)).collect()
}

fn mat_t_vec(rows: &[Row], y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (row, &yi) in rows.iter().zip(y) {
        if yi != 0.0 {
            for &(j, a) in row {
                out[j] += a * yi;
            }
        }
    }
    out
}

impl Residuals {
    fn new(p: &Problem, st: &State) -> Self {
        let ax = mat_vec(&p.rows, &st.x);
        let aty = mat_t_vec(&p.rows, &st.y, p.n);
        let rp: Vec<f64> = ax.iter().zip(&p.b).map(|(a, b)| a - b * st.tau).collect();
        let aty_s: Vec<f64> = aty.iter().zip(&st.s).map(|(a, s)| a + s).collect();
        let rd: Vec<f64> = aty_s.iter().zip(&p.c).map(|(v, c)| v - c * st.tau).collect();
        let ctx = dot(&p.c, &st.x);
        let bty = dot(&p.b, &st.y);
        let rg = ctx - bty + st.kappa;
        let mu = (dot(&st.x, &st.s) + st.tau * st.kappa) / (p.nu + 1.0);
        let primal = norm(&rp) / st.tau / (1.0 + norm(&p.b));
        let dual = norm(&rd) / st.tau / (1.0 + norm(&p.c));
        let gap = ((ctx - bty) / st.tau).abs().max(dot(&st.x, &st.s) / (st.tau * st.tau))
            / (1.0 + (ctx / st.tau).abs().max((bty / st.tau).abs()));
        Self { rp, rd, rg, mu, primal, dual, gap, aty_s_norm: norm(&aty_s), ax_norm: norm(&ax) }
    }
}

// ---------------------------------------------------------------------------
// Nesterov–Todd scaling

enum BlockScaling {
    Orthant { r: Vec<f64>, lambda: Vec<f64> },
    Psd { d: usize, r: CMatrix, rinv: CMatrix, w: CMatrix, winv: CMatrix, lambda: Vec<f64> },
}

/// A value in the scaled space: a vector for orthant blocks, a Hermitian matrix for PSD blocks.
#[derive(Clone)]
enum Scaled {
    Vec(Vec<f64>),
    Mat(CMatrix),
}

struct Scaling {
    blocks: Vec<(BlockScaling, usize)>,
}

fn smat(u: &[f64], d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[(j, j)] = Complex::new(u[j], 0.0);
    }
    for j in 0..d {
        for k in j + 1..d {
            let o = offdiag_offset(d, j, k);
            let z = Complex::new(u[o], u[o + 1]) / SQRT_2;
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    m
}

fn svec_into(m: &CMatrix, out: &mut [f64]) {
    let d = m.rows();
    for j in 0..d {
        out[j] = m[(j, j)].re;
    }
    for j in 0..d {
        for k in j + 1..d {
            let o = offdiag_offset(d, j, k);
            // Average both triangles to absorb rounding asymmetry.
            let z = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
            out[o] = SQRT_2 * z.re;
            out[o + 1] = SQRT_2 * z.im;
        }
    }
}

impl Scaling {
    fn new(p: &Problem, st: &State) -> Option<Self> {
        let mut blocks = Vec::with_capacity(p.cones.len());
        for &(cone, off) in &p.cones {
            let b = match cone {
                Cone::Nonnegative(len) => {
                    let (x, s) = (&st.x[off..off + len], &st.s[off..off + len]);
                    if x.iter().chain(s).any(|&v| !(v > 0.0)) {
                        return None;
                    }
                    BlockScaling::Orthant {
                        r: x.iter().zip(s).map(|(a, b)| (a / b).sqrt()).collect(),
                        lambda: x.iter().zip(s).map(|(a, b)| (a * b).sqrt()).collect(),
                    }
                }
                Cone::Psd(d) => {
                    let l1 = cholesky(&smat(&st.x[off..off + d * d], d)).ok()?;
                    let l2 = cholesky(&smat(&st.s[off..off + d * d], d)).ok()?;
                    let (u, sigma, v) = svd(&(&l2.adjoint() * &l1)).ok()?;
                    if sigma.iter().any(|&v| !(v > 0.0)) {
                        return None;
                    }
                    let inv_sqrt: Vec<f64> = sigma.iter().map(|v| 1.0 / v.sqrt()).collect();
                    let r = CMatrix::from_fn(d, d, |i, j| {
                        (0..d).fold(Complex::new(0.0, 0.0), |acc, k| acc + l1[(i, k)] * v[(k, j)]) * inv_sqrt[j]
                    });
                    let uh_l2h = &u.adjoint() * &l2.adjoint();
                    let rinv = CMatrix::from_fn(d, d, |i, j| uh_l2h[(i, j)] * inv_sqrt[i]);
                    let w = &r * &r.adjoint();
                    let winv = &rinv.adjoint() * &rinv;
                    BlockScaling::Psd { d, r, rinv, w, winv, lambda: sigma }
                }
            };
            blocks.push((b, off));
        }
        Some(Self { blocks })
    }

    /// `H⁻¹ v`: `r² ∘ v` on orthants, `W V W` on PSD blocks.
    fn hinv(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (b, off) in &self.blocks {
            self.hinv_block(b, *off, v, &mut out);
        }
        out
    }

    fn hinv_block(&self, b: &BlockScaling, off: usize, v: &[f64], out: &mut [f64]) {
        match b {
            BlockScaling::Orthant { r, .. } => {
                for (i, ri) in r.iter().enumerate() {
                    out[off + i] = ri * ri * v[off + i];
                }
            }
            BlockScaling::Psd { d, w, .. } => {
                let m = smat(&v[off..off + d * d], *d);
                svec_into(&(&(w * &m) * w), &mut out[off..off + d * d]);
            }
        }
    }

    /// `H v`: `v / r²` on orthants, `W⁻¹ V W⁻¹` on PSD blocks.
    fn hmul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (b, off) in &self.blocks {
            match b {
                BlockScaling::Orthant { r, .. } => {
                    for (i, ri) in r.iter().enumerate() {
                        out[off + i] = v[off + i] / (ri * ri);
                    }
                }
                BlockScaling::Psd { d, winv, .. } => {
                    let m = smat(&v[*off..off + d * d], *d);
                    svec_into(&(&(winv * &m) * winv), &mut out[*off..off + d * d]);
                }
            }
        }
        out
    }

    /// `H⁻¹ a` for a sparse row, touching only blocks the row uses.
    fn hinv_row(&self, row: &Row, n: usize) -> Vec<f64> {
        let mut dense = vec![0.0; n];
        for &(j, a) in row {
            dense[j] = a;
        }
        let mut out = vec![0.0; n];
        for (b, off) in &self.blocks {
            let len = match b {
                BlockScaling::Orthant { r, .. } => r.len(),
                BlockScaling::Psd { d, .. } => d * d,
            };
            if dense[*off..*off + len].iter().any(|&v| v != 0.0) {
                self.hinv_block(b, *off, &dense, &mut out);
            }
        }
        out
    }

    fn lambda_squared(&self) -> Vec<Scaled> {
        self.blocks
            .iter()
            .map(|(b, _)| match b {
                BlockScaling::Orthant { lambda, .. } => Scaled::Vec(lambda.iter().map(|l| l * l).collect()),
                BlockScaling::Psd { lambda, .. } => {
                    Scaled::Mat(CMatrix::diag(&lambda.iter().map(|l| l * l).collect::<Vec<_>>()))
                }
            })
            .collect()
    }

    /// `(R⁻¹ dX R⁻†, R† dS R)` per block.
    fn scale_pair(&self, dx: &[f64], ds: &[f64]) -> (Vec<Scaled>, Vec<Scaled>) {
        let mut sx = Vec::with_capacity(self.blocks.len());
        let mut ss = Vec::with_capacity(self.blocks.len());
        for (b, off) in &self.blocks {
            match b {
                BlockScaling::Orthant { r, .. } => {
                    let len = r.len();
                    sx.push(Scaled::Vec((0..len).map(|i| dx[off + i] / r[i]).collect()));
                    ss.push(Scaled::Vec((0..len).map(|i| ds[off + i] * r[i]).collect()));
                }
                BlockScaling::Psd { d, r, rinv, .. } => {
                    let mx = smat(&dx[*off..off + d * d], *d);
                    let ms = smat(&ds[*off..off + d * d], *d);
                    sx.push(Scaled::Mat(&(rinv * &mx) * &rinv.adjoint()));
                    ss.push(Scaled::Mat(&(&r.adjoint() * &ms) * r));
                }
            }
        }
        (sx, ss)
    }

    /// Given the scaled complementarity right-hand side, returns `q` with `ds = q − H dx`.
    fn complementarity_rhs(&self, rc: &[Scaled], n: usize) -> Vec<f64> {
        let mut q = vec![0.0; n];
        for ((b, off), r_c) in self.blocks.iter().zip(rc) {
            match (b, r_c) {
                (BlockScaling::Orthant { r, lambda }, Scaled::Vec(v)) => {
                    for i in 0..r.len() {
                        q[off + i] = v[i] / (lambda[i] * r[i]);
                    }
                }
                (BlockScaling::Psd { d, rinv, lambda, .. }, Scaled::Mat(m)) => {
                    let t = CMatrix::from_fn(*d, *d, |i, j| m[(i, j)] * (2.0 / (lambda[i] + lambda[j])));
                    let qm = &(&rinv.adjoint() * &t) * rinv;
                    svec_into(&qm, &mut q[*off..off + d * d]);
                }
                _ => unreachable!("scaled value does not match block kind"),
            }
        }
        q
    }

    /// Largest `α` keeping `λ + α·d` in the cone, over all blocks.
    fn max_step(&self, dirs: &[Scaled]) -> f64 {
        let mut alpha = f64::INFINITY;
        for ((b, _), dir) in self.blocks.iter().zip(dirs) {
            match (b, dir) {
                (BlockScaling::Orthant { lambda, .. }, Scaled::Vec(v)) => {
                    for (l, dv) in lambda.iter().zip(v) {
                        if *dv < 0.0 {
                            alpha = alpha.min(-l / dv);
                        }
                    }
                }
                (BlockScaling::Psd { d, lambda, .. }, Scaled::Mat(m)) => {
                    let inv: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
                    let scaled = CMatrix::from_fn(*d, *d, |i, j| m[(i, j)] * (inv[i] * inv[j])).hermitian_part();
                    let lmin = eigvalsh(&scaled).map(|v| v[0]).unwrap_or(f64::NEG_INFINITY);
                    if lmin < 0.0 {
                        alpha = alpha.min(-1.0 / lmin);
                    }
                }
                _ => unreachable!("scaled value does not match block kind"),
            }
        }
        alpha
    }
}

fn jordan(a: &[Scaled], b: &[Scaled]) -> Vec<Scaled> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Scaled::Vec(u), Scaled::Vec(v)) => Scaled::Vec(u.iter().zip(v).map(|(p, q)| p * q).collect()),
            (Scaled::Mat(u), Scaled::Mat(v)) => Scaled::Mat((&(u * v) + &(v * u)).scale(0.5)),
            _ => unreachable!("mismatched scaled blocks"),
        })
        .collect()
}

/// `−λ∘λ − corr + σμ e`.
fn combine_rc(lam2: &[Scaled], corr: Option<&[Scaled]>, sigma_mu: f64) -> Vec<Scaled> {
    lam2.iter()
        .enumerate()
        .map(|(k, l)| match l {
            Scaled::Vec(v) => {
                let mut out: Vec<f64> = v.iter().map(|x| -x + sigma_mu).collect();
                if let Some(Scaled::Vec(c)) = corr.map(|c| &c[k]) {
                    out.iter_mut().zip(c).for_each(|(o, ci)| *o -= ci);
                }
                Scaled::Vec(out)
            }
            Scaled::Mat(m) => {
                let d = m.rows();
                let mut out = (&m.scale(-1.0) + &CMatrix::identity(d).scale(sigma_mu)).clone();
                if let Some(Scaled::Mat(c)) = corr.map(|c| &c[k]) {
                    out = &out - c;
                }
                Scaled::Mat(out)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Newton direction

struct Step {
    dx: Vec<f64>,
    ds: Vec<f64>,
    dy: Vec<f64>,
    dtau: f64,
    dkappa: f64,
    alpha: f64,
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<f64>,
    dy: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

struct Kkt<'a> {
    p: &'a Problem,
    st: &'a State,
    scaling: &'a Scaling,
    hrows: Vec<Vec<f64>>,
    mm: SymMatrix,
    chol: Cholesky,
    v: Vec<f64>,
    x1: Vec<f64>,
    denom: f64,
}

impl<'a> Kkt<'a> {
    fn new(p: &'a Problem, st: &'a State, scaling: &'a Scaling) -> Option<Self> {
        let m = p.rows.len();
        let hrows: Vec<Vec<f64>> = p.rows.iter().map(|r| scaling.hinv_row(r, p.n)).collect();
        let mut mm = SymMatrix::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                let v = sparse_dot(&p.rows[j], &hrows[i]);
                mm.set(i, j, v);
                mm.set(j, i, v);
            }
        }
        let chol = Cholesky::factor_regularized(&mm)?;
        let rhs_v: Vec<f64> = hrows.iter().zip(&p.b).map(|(h, b)| dot(h, &p.c) + b).collect();
        let v = refined_solve(&mm, &chol, &rhs_v);
        let mut atv_c = mat_t_vec(&p.rows, &v, p.n);
        atv_c.iter_mut().zip(&p.c).for_each(|(a, c)| *a -= c);
        let x1 = scaling.hinv(&atv_c);
        // cᵀx1 − bᵀv equals −zᵀH⁻¹z with z = Aᵀv − c; this form cannot lose its sign
        // to cancellation.
        let denom = -dot(&atv_c, &x1) - st.kappa / st.tau;
        if !(denom < 0.0) || !denom.is_finite() {
            return None;
        }
        Some(Self { p, st, scaling, hrows, mm, chol, v, x1, denom })
    }

    /// Solves the linearized embedding equations, then refines the direction
    /// against the exact (unfactored) operators.
    fn solve(&self, p1: &[f64], p2: &[f64], p3: f64, rc: &[Scaled], rc_tau: f64) -> Direction {
        let p = self.p;
        let st = self.st;
        let q = self.scaling.complementarity_rhs(rc, p.n);
        let mut dir = self.solve_q(p1, p2, p3, &q, rc_tau);
        for _ in 0..2 {
            let adx = mat_vec(&p.rows, &dir.dx);
            let r1: Vec<f64> = (0..p1.len()).map(|i| p1[i] - (adx[i] - p.b[i] * dir.dtau)).collect();
            let aty = mat_t_vec(&p.rows, &dir.dy, p.n);
            let r2: Vec<f64> = (0..p.n).map(|j| p2[j] - (aty[j] + dir.ds[j] - p.c[j] * dir.dtau)).collect();
            let r3 = p3 - (dot(&p.c, &dir.dx) - dot(&p.b, &dir.dy) + dir.dkappa);
            let hdx = self.scaling.hmul(&dir.dx);
            let r4: Vec<f64> = (0..p.n).map(|j| q[j] - dir.ds[j] - hdx[j]).collect();
            let r5 = rc_tau - (st.kappa * dir.dtau + st.tau * dir.dkappa);
            let c = self.solve_q(&r1, &r2, r3, &r4, r5);
            let add = |a: &mut Vec<f64>, b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            add(&mut dir.dx, &c.dx);
            add(&mut dir.ds, &c.ds);
            add(&mut dir.dy, &c.dy);
            dir.dtau += c.dtau;
            dir.dkappa += c.dkappa;
        }
        dir
    }

    fn solve_q(&self, p1: &[f64], p2: &[f64], p3: f64, q: &[f64], rc_tau: f64) -> Direction {
        let (p, st) = (self.p, self.st);
        let q_p2: Vec<f64> = q.iter().zip(p2).map(|(a, b)| a - b).collect();
        let rhs_u: Vec<f64> = p1.iter().zip(&self.hrows).map(|(a, h)| a - dot(h, &q_p2)).collect();
        let u = refined_solve(&self.mm, &self.chol, &rhs_u);
        let mut t = mat_t_vec(&p.rows, &u, p.n);
        t.iter_mut().zip(&q_p2).for_each(|(a, b)| *a += b);
        let x0 = self.scaling.hinv(&t);
        let dtau = (p3 - dot(&p.c, &x0) + dot(&p.b, &u) - rc_tau / st.tau) / self.denom;
        let dkappa = (rc_tau - st.kappa * dtau) / st.tau;
        let dy: Vec<f64> = u.iter().zip(&self.v).map(|(a, b)| a + b * dtau).collect();
        let dx: Vec<f64> = x0.iter().zip(&self.x1).map(|(a, b)| a + b * dtau).collect();
        let aty = mat_t_vec(&p.rows, &dy, p.n);
        let ds: Vec<f64> = (0..p.n).map(|j| p2[j] - aty[j] + p.c[j] * dtau).collect();
        Direction { dx, ds, dy, dtau, dkappa }
    }
}

/// Cholesky solve followed by iterative refinement against the unregularized matrix.
fn refined_solve(m: &SymMatrix, chol: &Cholesky, rhs: &[f64]) -> Vec<f64> {
    let mut x = chol.solve(rhs);
    for _ in 0..3 {
        let r: Vec<f64> = (0..m.n).map(|i| rhs[i] - dot(&m.data[i * m.n..(i + 1) * m.n], &x)).collect();
        let correction = chol.solve(&r);
        x.iter_mut().zip(&correction).for_each(|(a, c)| *a += c);
    }
    x
}

fn step_length(scaling: &Scaling, st: &State, dir: &Direction) -> (f64, Vec<Scaled>, Vec<Scaled>) {
    let (sx, ss) = scaling.scale_pair(&dir.dx, &dir.ds);
    let mut alpha = scaling.max_step(&sx).min(scaling.max_step(&ss));
    if dir.dtau < 0.0 {
        alpha = alpha.min(-st.tau / dir.dtau);
    }
    if dir.dkappa < 0.0 {
        alpha = alpha.min(-st.kappa / dir.dkappa);
    }
    (alpha, sx, ss)
}

fn newton_step(p: &Problem, st: &State, res: &Residuals, scaling: &Scaling) -> Option<Step> {
    let kkt = Kkt::new(p, st, scaling)?;
    let lam2 = scaling.lambda_squared();

    // Predictor (affine scaling).
    let p1: Vec<f64> = res.rp.iter().map(|v| -v).collect();
    let p2: Vec<f64> = res.rd.iter().map(|v| -v).collect();
    let rc_aff = combine_rc(&lam2, None, 0.0);
    let aff = kkt.solve(&p1, &p2, -res.rg, &rc_aff, -st.tau * st.kappa);
    let (alpha_aff, sx, ss) = step_length(scaling, st, &aff);
    let alpha_aff = alpha_aff.min(1.0);
    let sigma = (1.0 - alpha_aff).powi(3);

    // Corrector.
    let eta = 1.0 - sigma;
    let p1: Vec<f64> = res.rp.iter().map(|v| -eta * v).collect();
    let p2: Vec<f64> = res.rd.iter().map(|v| -eta * v).collect();
    let corr = jordan(&sx, &ss);
    let rc = combine_rc(&lam2, Some(&corr), sigma * res.mu);
    let rc_tau = -st.tau * st.kappa - aff.dtau * aff.dkappa + sigma * res.mu;
    let dir = kkt.solve(&p1, &p2, -eta * res.rg, &rc, rc_tau);
    let (alpha_max, _, _) = step_length(scaling, st, &dir);
    let alpha = (STEP_FRACTION * alpha_max).min(1.0);
    if !alpha.is_finite() {
        return None;
    }
    Some(Step { dx: dir.dx, ds: dir.ds, dy: dir.dy, dtau: dir.dtau, dkappa: dir.dkappa, alpha })
}
