//! Small dense complex matrices and a cyclic Jacobi Hermitian eigensolver.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length mismatch");
        CMat { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|` scaled by `weight`.
    pub fn outer(v: &[C64], weight: f64) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj() * weight)
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨v|M|v⟩`.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let mv = self.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMat) -> CMat {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = CMat::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * cols + j * other.cols;
                    for l in 0..other.cols {
                        out.data[base + l] = a * other.data[k * other.cols + l];
                    }
                }
            }
        }
        out
    }

    /// `M^{⊗k}` (the 1×1 identity for `k = 0`).
    pub fn kron_power(&self, k: usize) -> CMat {
        let mut out = CMat::identity(1);
        for _ in 0..k {
            out = out.kron(self);
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `P M Pᵀ` for the permutation sending basis index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> CMat {
        assert!(self.is_square() && perm.len() == self.rows);
        let mut out = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(perm[i], perm[j])] = self[(i, j)];
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[CMat]) -> CMat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMat::zeros(n, m);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r + i, c + j)] = b[(i, j)];
                }
            }
            r += b.rows;
            c += b.cols;
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl MulAssign<f64> for CMat {
    fn mul_assign(&mut self, rhs: f64) {
        for a in &mut self.data {
            *a *= rhs;
        }
    }
}

/// Scalar field the Jacobi sweep runs over.
trait JacobiScalar: Copy + Add<Output = Self> + Mul<Output = Self> + PartialEq {
    const ZERO: Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn from_re(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn unscale(self, s: f64) -> Self;
}

impl JacobiScalar for f64 {
    const ZERO: Self = 0.0;
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn unscale(self, s: f64) -> Self {
        self / s
    }
}

impl JacobiScalar for C64 {
    const ZERO: Self = ZERO;
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn unscale(self, s: f64) -> Self {
        self / s
    }
}

const MAX_SWEEPS: usize = 100;
/// Sweeps stop once the off-diagonal Frobenius norm drops below this
/// fraction of the full Frobenius norm.
const SWEEP_THRESHOLD: f64 = 1e-13;

/// Cyclic Jacobi on a Hermitian matrix stored row-major in `a` (destroyed).
/// Returns the diagonal and, if requested, the accumulated unitary.
fn jacobi<T: JacobiScalar>(a: &mut [T], n: usize, want_vectors: bool) -> (Vec<f64>, Option<Vec<T>>) {
    let mut v = want_vectors.then(|| {
        let mut v = vec![T::ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = T::from_re(1.0);
        }
        v
    });
    let total: f64 = a.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt();
    let threshold = SWEEP_THRESHOLD * total;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p * n + q].modulus().powi(2);
                }
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = apq.modulus();
                if g <= f64::MIN_POSITIVE * 1e6 || g <= 1e-3 * threshold / n as f64 {
                    continue;
                }
                // D = diag(1, conj(phase)) makes the pivot real; R is the
                // classical real rotation, U = D R.
                let phase_conj = apq.conj().unscale(g);
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_pp = T::from_re(c);
                let u_pq = T::from_re(s);
                let u_qp = phase_conj.scale(-s);
                let u_qq = phase_conj.scale(c);

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * u_pp + akq * u_qp;
                    a[k * n + q] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[p * n + q] = T::ZERO;
                a[q * n + p] = T::ZERO;
                a[p * n + p] = T::from_re(app - t * g);
                a[q * n + q] = T::from_re(aqq + t * g);

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * u_pp + vkq * u_qp;
                        v[k * n + q] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i].re()).collect();
    (values, v)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMat {
        let vd = CMat::from_fn(self.vectors.rows(), self.vectors.cols(), |i, j| {
            self.vectors[(i, j)] * self.values[j]
        });
        vd.matmul(&self.vectors.adjoint())
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Full eigendecomposition. The input must be Hermitian; only that part of
/// it is used. Real input takes a real-arithmetic path.
pub fn eigh(m: &CMat) -> Eigh {
    assert!(m.is_square(), "eigh needs a square matrix");
    let n = m.rows();
    let (values, vectors) = if m.is_real() {
        let mut a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
        let (vals, v) = jacobi(&mut a, n, true);
        let v: Vec<C64> = v.unwrap().into_iter().map(|x| C64::new(x, 0.0)).collect();
        (vals, CMat::from_vec(n, n, v))
    } else {
        let mut a = m.as_slice().to_vec();
        let (vals, v) = jacobi(&mut a, n, true);
        (vals, CMat::from_vec(n, n, v.unwrap()))
    };
    let order = descending_order(&values);
    Eigh {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: CMat::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    }
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    assert!(m.is_square(), "eigvalsh needs a square matrix");
    let n = m.rows();
    let mut values = if m.is_real() {
        let mut a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
        jacobi(&mut a, n, false).0
    } else {
        let mut a = m.as_slice().to_vec();
        jacobi(&mut a, n, false).0
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Cholesky test of `m + tol·I ≻ 0`, i.e. whether `m` is positive
/// semidefinite up to `tol`. Cheaper than an eigensolve.
pub fn is_psd(m: &CMat, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut d = m[(j, j)].re + tol;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

/// `M^{-1/2}` for a positive definite Hermitian `M`.
pub fn inverse_sqrt(m: &CMat) -> CMat {
    let e = eigh(m);
    let scaled = CMat::from_fn(m.rows(), m.cols(), |i, j| e.vectors[(i, j)] / e.values[j].sqrt());
    scaled.matmul(&e.vectors.adjoint())
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
