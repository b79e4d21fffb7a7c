//! Dense least squares by column-pivoted Householder QR.
//!
//! Columns are scaled to unit 2-norm before factorization and the scaling is
//! folded back into the returned coefficients. Pivots whose diagonal falls
//! below [`RANK_TOLERANCE`] times the largest one are treated as rank
//! deficient and the corresponding coefficients are set to zero.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use thiserror::Error;

/// Relative diagonal threshold for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LstsqError {
    #[error("system is underdetermined: {rows} rows, {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry in the {0}")]
    NonFinite(&'static str),
    #[error("weight {0} is zero")]
    ZeroWeight(usize),
}

/// Field operations needed by the factorization.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const ZERO: Self;
    fn from_real(r: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    fn scale(self, s: f64) -> Self;
    /// `Σ conj(a_i)·b_i`
    fn dot_conj(a: &[Self], b: &[Self]) -> Self;
    /// `y += alpha·x`
    fn axpy(alpha: Self, x: &[Self], y: &mut [Self]);
    /// `y −= Σ c_t·v_t` over four vectors in one pass.
    fn sub4(y: &mut [Self], v: [&[Self]; 4], c: [Self; 4]);

    fn norm2(a: &[Self]) -> f64 {
        let big = a.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        if big == 0.0 || !big.is_finite() {
            return big;
        }
        let inv = 1.0 / big;
        big * a.iter().map(|v| v.scale(inv).abs2()).sum::<f64>().sqrt()
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn from_real(r: f64) -> Self {
        r
    }
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn dot_conj(a: &[f64], b: &[f64]) -> f64 {
        kernels::dot_real(a, b)
    }
    fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
        kernels::axpy_real(alpha, x, y)
    }
    fn sub4(y: &mut [f64], v: [&[f64]; 4], c: [f64; 4]) {
        kernels::sub4_real(y, v, c)
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        kernels::dot_complex(a, b)
    }
    fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        kernels::axpy_complex(alpha, x, y)
    }
    fn sub4(y: &mut [Complex64], v: [&[Complex64]; 4], c: [Complex64; 4]) {
        kernels::sub4_complex(y, v, c)
    }
}

/// Inner loops of the factorization. Each is compiled twice, once for the
/// baseline target and once with AVX2 enabled, and the wide version is picked
/// at run time. Summation order is fixed by the source, so both versions
/// return identical results.
mod kernels {
    use num_complex::Complex64;

    macro_rules! dispatch {
        ($(fn $name:ident($($arg:ident: $ty:ty),*) $(-> $ret:ty)? $body:block)*) => {$(
            pub fn $name($($arg: $ty),*) $(-> $ret)? {
                #[inline(always)]
                fn body($($arg: $ty),*) $(-> $ret)? $body

                #[cfg(target_arch = "x86_64")]
                {
                    #[target_feature(enable = "avx2")]
                    unsafe fn wide($($arg: $ty),*) $(-> $ret)? {
                        body($($arg),*)
                    }
                    if std::arch::is_x86_feature_detected!("avx2") {
                        // SAFETY: AVX2 support was just confirmed.
                        return unsafe { wide($($arg),*) };
                    }
                }
                body($($arg),*)
            }
        )*};
    }

    dispatch! {
        fn dot_real(a: &[f64], b: &[f64]) -> f64 {
            let n = a.len().min(b.len());
            let (a, b) = (&a[..n], &b[..n]);
            let mut acc = [0.0; 16];
            let ca = a.chunks_exact(16);
            let cb = b.chunks_exact(16);
            let (ra, rb) = (ca.remainder(), cb.remainder());
            for (x, y) in ca.zip(cb) {
                for t in 0..16 {
                    acc[t] += x[t] * y[t];
                }
            }
            let mut tail = 0.0;
            for (x, y) in ra.iter().zip(rb) {
                tail += x * y;
            }
            let mut half = [0.0; 8];
            for t in 0..8 {
                half[t] = acc[t] + acc[t + 8];
            }
            let quad = [half[0] + half[4], half[1] + half[5], half[2] + half[6], half[3] + half[7]];
            (quad[0] + quad[2]) + (quad[1] + quad[3]) + tail
        }

        fn axpy_real(alpha: f64, x: &[f64], y: &mut [f64]) {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += alpha * xi;
            }
        }

        fn sub4_real(y: &mut [f64], v: [&[f64]; 4], c: [f64; 4]) {
            let it = y.iter_mut().zip(v[0]).zip(v[1]).zip(v[2]).zip(v[3]);
            for ((((yi, &a), &b), &d), &e) in it {
                *yi -= (a * c[0] + b * c[1]) + (d * c[2] + e * c[3]);
            }
        }

        fn dot_complex(a: &[Complex64], b: &[Complex64]) -> Complex64 {
            let n = a.len().min(b.len());
            let (a, b) = (&a[..n], &b[..n]);
            let mut re = [0.0; 4];
            let mut im = [0.0; 4];
            let ca = a.chunks_exact(4);
            let cb = b.chunks_exact(4);
            let (ra, rb) = (ca.remainder(), cb.remainder());
            for (x, y) in ca.zip(cb) {
                for t in 0..4 {
                    re[t] += x[t].re * y[t].re + x[t].im * y[t].im;
                    im[t] += x[t].re * y[t].im - x[t].im * y[t].re;
                }
            }
            let mut out = Complex64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]));
            for (x, y) in ra.iter().zip(rb) {
                out += x.conj() * y;
            }
            out
        }

        fn axpy_complex(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
            for (yi, xi) in y.iter_mut().zip(x) {
                yi.re += alpha.re * xi.re - alpha.im * xi.im;
                yi.im += alpha.re * xi.im + alpha.im * xi.re;
            }
        }

        fn sub4_complex(y: &mut [Complex64], v: [&[Complex64]; 4], c: [Complex64; 4]) {
            let it = y.iter_mut().zip(v[0]).zip(v[1]).zip(v[2]).zip(v[3]);
            for ((((yi, a), b), d), e) in it {
                let re = (a.re * c[0].re - a.im * c[0].im + b.re * c[1].re - b.im * c[1].im)
                    + (d.re * c[2].re - d.im * c[2].im + e.re * c[3].re - e.im * c[3].im);
                let im = (a.re * c[0].im + a.im * c[0].re + b.re * c[1].im + b.im * c[1].re)
                    + (d.re * c[2].im + d.im * c[2].re + e.re * c[3].im + e.im * c[3].re);
                yi.re -= re;
                yi.im -= im;
            }
        }
    }
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Scales row `i` by `w[i]`.
    pub fn scale_rows(&mut self, w: &[f64]) {
        for col in self.data.chunks_exact_mut(self.rows) {
            for (v, &s) in col.iter_mut().zip(w) {
                *v = v.scale(s);
            }
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::ZERO; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::ZERO {
                T::axpy(xj, self.column(j), &mut out);
            }
        }
        out
    }

    /// `Aᴴ·y`
    pub fn adjoint_matvec(&self, y: &[T]) -> Vec<T> {
        (0..self.cols).map(|j| T::dot_conj(self.column(j), y)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        T::norm2(&self.data)
    }

    /// Appends a column.
    pub fn push_column(&mut self, col: &[T]) {
        assert_eq!(col.len(), self.rows, "column length mismatch");
        self.data.extend_from_slice(col);
        self.cols += 1;
    }
}

/// Overdetermined system `A·x ≈ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsProblem<T> {
    pub matrix: DenseMatrix<T>,
    pub rhs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution<T> {
    pub coefficients: Vec<T>,
    /// `‖A·x − b‖₂`
    pub residual_norm: f64,
    /// 2-norm of each original column.
    pub column_scales: Vec<f64>,
    /// Columns that were identically zero; their coefficients are zero.
    pub dropped_columns: Vec<usize>,
    /// Numerical rank of the scaled system.
    pub rank: usize,
}

impl<T: Scalar> LsProblem<T> {
    pub fn new(matrix: DenseMatrix<T>, rhs: Vec<T>) -> Result<Self, LstsqError> {
        if rhs.len() != matrix.rows() {
            return Err(LstsqError::DimensionMismatch {
                expected: matrix.rows(),
                got: rhs.len(),
            });
        }
        Ok(Self { matrix, rhs })
    }

    /// `A·x − b`
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = self.matrix.matvec(x);
        for (ri, &bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }
}

/// Minimizes `‖A·x − b‖₂` for a system with at least as many rows as columns.
pub fn solve_ls<T: Scalar>(prob: &LsProblem<T>) -> Result<LsSolution<T>, LstsqError> {
    let (m, n) = (prob.matrix.rows(), prob.matrix.cols());
    if m < n {
        return Err(LstsqError::Underdetermined { rows: m, cols: n });
    }
    if prob.rhs.len() != m {
        return Err(LstsqError::DimensionMismatch {
            expected: m,
            got: prob.rhs.len(),
        });
    }
    if !prob.matrix.data.iter().all(|v| v.is_finite()) {
        return Err(LstsqError::NonFinite("matrix"));
    }
    if !prob.rhs.iter().all(|v| v.is_finite()) {
        return Err(LstsqError::NonFinite("right-hand side"));
    }

    let column_scales: Vec<f64> = (0..n).map(|j| T::norm2(prob.matrix.column(j))).collect();
    let active: Vec<usize> = (0..n).filter(|&j| column_scales[j] > 0.0).collect();
    let dropped_columns: Vec<usize> = (0..n).filter(|&j| column_scales[j] == 0.0).collect();

    let mut work = Vec::with_capacity(m * active.len());
    for &j in &active {
        let inv = 1.0 / column_scales[j];
        work.extend(prob.matrix.column(j).iter().map(|v| v.scale(inv)));
    }
    let qr = PivotedQr::factor(work, m, active.len());
    let rank = qr.rank(RANK_TOLERANCE);
    let y = qr.solve(&prob.rhs, rank);

    let mut coefficients = vec![T::ZERO; n];
    for (slot, &j) in active.iter().enumerate() {
        coefficients[j] = y[slot].scale(1.0 / column_scales[j]);
    }
    let residual_norm = T::norm2(&prob.residual(&coefficients));
    Ok(LsSolution {
        coefficients,
        residual_norm,
        column_scales,
        dropped_columns,
        rank,
    })
}

/// `max_i |(A·x − b)_i / w_i|`, the residual in unweighted units when the
/// rows of `A` and `b` carry weights `w`.
pub fn residual_sup<T: Scalar>(
    prob: &LsProblem<T>,
    x: &[T],
    weights: &[f64],
) -> Result<f64, LstsqError> {
    if x.len() != prob.matrix.cols() {
        return Err(LstsqError::DimensionMismatch {
            expected: prob.matrix.cols(),
            got: x.len(),
        });
    }
    if weights.len() != prob.matrix.rows() {
        return Err(LstsqError::DimensionMismatch {
            expected: prob.matrix.rows(),
            got: weights.len(),
        });
    }
    if let Some(i) = weights.iter().position(|&w| w == 0.0) {
        return Err(LstsqError::ZeroWeight(i));
    }
    Ok(prob
        .residual(x)
        .iter()
        .zip(weights)
        .map(|(r, w)| r.modulus() / w.abs())
        .fold(0.0, f64::max))
}

/// Householder QR with column pivoting, `A·P = Q·R`, in LAPACK's compact
/// storage: `R` on and above the diagonal, reflector tails below.
struct PivotedQr<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    taus: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> PivotedQr<T> {
    /// Blocked factorization with lazily applied trailing updates. Within a
    /// block only the pivot row and the next column are brought up to date;
    /// the rest of the matrix receives `A −= V·Fᴴ` once per block.
    fn factor(mut data: Vec<T>, rows: usize, cols: usize) -> Self {
        let (m, n) = (rows, cols);
        let steps = m.min(n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut taus = vec![T::ZERO; steps];
        let mut vn1: Vec<f64> = data.chunks_exact(m.max(1)).map(T::norm2).collect();
        let mut vn2 = vn1.clone();
        let tol3z = f64::EPSILON.sqrt();
        let mut f: Vec<T> = Vec::new();
        let mut difficult: Vec<usize> = Vec::new();

        let mut k0 = 0;
        while k0 < steps {
            let nb = QR_BLOCK.min(steps - k0);
            let nrem = n - k0;
            f.clear();
            f.resize(nrem * nb, T::ZERO);
            let fidx = |l: usize, jrel: usize| l * nrem + jrel;

            let mut kb = 0;
            while kb < nb && difficult.is_empty() {
                let k = k0 + kb;
                let p = k + argmax(&vn1[k..]);
                if p != k {
                    let (lo, hi) = data.split_at_mut(p * m);
                    lo[k * m..(k + 1) * m].swap_with_slice(&mut hi[..m]);
                    perm.swap(k, p);
                    vn1.swap(k, p);
                    vn2.swap(k, p);
                    for l in 0..kb {
                        f.swap(fidx(l, p - k0), fidx(l, kb));
                    }
                }

                let (left, right) = data.split_at_mut(k * m);
                let col = &mut right[..m];
                for l in 0..kb {
                    let c = f[fidx(l, kb)].conj();
                    T::axpy(-c, &left[(k0 + l) * m + k..(k0 + l + 1) * m], &mut col[k..]);
                }

                let tau = householder(&mut col[k..]);
                taus[k] = tau;
                let akk = col[k];
                col[k] = T::from_real(1.0);

                let (left, right) = data.split_at_mut((k + 1) * m);
                let v = &left[k * m + k..];
                for (jj, c) in right.chunks_exact(m).enumerate() {
                    f[fidx(kb, kb + 1 + jj)] = tau * T::dot_conj(&c[k..], v);
                }
                if kb > 0 {
                    let aux: Vec<T> = (0..kb)
                        .map(|l| -tau * T::dot_conj(&left[(k0 + l) * m + k..(k0 + l + 1) * m], v))
                        .collect();
                    for jrel in kb + 1..nrem {
                        let mut acc = T::ZERO;
                        for (l, &a) in aux.iter().enumerate() {
                            acc += f[fidx(l, jrel)] * a;
                        }
                        f[fidx(kb, jrel)] += acc;
                    }
                }

                let arow: Vec<T> = (0..=kb).map(|l| data[(k0 + l) * m + k]).collect();
                for j in k + 1..n {
                    let jrel = j - k0;
                    let mut acc = T::ZERO;
                    for (l, &a) in arow.iter().enumerate() {
                        acc += a * f[fidx(l, jrel)].conj();
                    }
                    data[j * m + k] -= acc;
                }

                if k + 1 < m {
                    for j in k + 1..n {
                        if vn1[j] == 0.0 {
                            continue;
                        }
                        let ratio = data[j * m + k].modulus() / vn1[j];
                        let temp = ((1.0 + ratio) * (1.0 - ratio)).max(0.0);
                        let temp2 = temp * (vn1[j] / vn2[j]).powi(2);
                        if temp2 <= tol3z {
                            difficult.push(j);
                        } else {
                            vn1[j] *= temp.sqrt();
                        }
                    }
                }
                data[k * m + k] = akk;
                kb += 1;
            }

            let rk = k0 + kb;
            if rk < m && rk < n {
                let (left, right) = data.split_at_mut(rk * m);
                for (jj, col) in right.chunks_exact_mut(m).enumerate() {
                    let jrel = kb + jj;
                    let col = &mut col[rk..];
                    let mut l = 0;
                    while l + 4 <= kb {
                        let v = |t: usize| &left[(k0 + l + t) * m + rk..(k0 + l + t + 1) * m];
                        let c = |t: usize| f[fidx(l + t, jrel)].conj();
                        T::sub4(col, [v(0), v(1), v(2), v(3)], [c(0), c(1), c(2), c(3)]);
                        l += 4;
                    }
                    for l in l..kb {
                        let c = f[fidx(l, jrel)].conj();
                        T::axpy(-c, &left[(k0 + l) * m + rk..(k0 + l + 1) * m], col);
                    }
                }
            }
            for j in difficult.drain(..) {
                vn1[j] = if rk < m { T::norm2(&data[j * m + rk..(j + 1) * m]) } else { 0.0 };
                vn2[j] = vn1[j];
            }
            k0 = rk;
        }
        Self {
            rows,
            cols,
            data,
            taus,
            perm,
        }
    }

    fn diag(&self, k: usize) -> T {
        self.data[k * self.rows + k]
    }

    fn rank(&self, rel_tol: f64) -> usize {
        let steps = self.taus.len();
        if steps == 0 {
            return 0;
        }
        let first = self.diag(0).modulus();
        if first == 0.0 {
            return 0;
        }
        (0..steps)
            .find(|&k| self.diag(k).modulus() <= rel_tol * first)
            .unwrap_or(steps)
    }

    /// Basic solution using the leading `rank` columns of the pivoted system,
    /// returned in the original column order.
    fn solve(&self, b: &[T], rank: usize) -> Vec<T> {
        let m = self.rows;
        let mut qb = b.to_vec();
        for k in 0..rank {
            let v = &self.data[k * m + k..(k + 1) * m];
            let tau = self.taus[k];
            if tau == T::ZERO {
                continue;
            }
            let seg = &mut qb[k..];
            let s = tau.conj() * (seg[0] + T::dot_conj(&v[1..], &seg[1..]));
            seg[0] -= s;
            T::axpy(-s, &v[1..], &mut seg[1..]);
        }
        let mut y = vec![T::ZERO; rank];
        for i in (0..rank).rev() {
            let mut acc = qb[i];
            for (j, &yj) in y.iter().enumerate().skip(i + 1) {
                acc -= self.data[j * m + i] * yj;
            }
            y[i] = acc / self.diag(i);
        }
        let mut x = vec![T::ZERO; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            x[self.perm[i]] = yi;
        }
        x
    }
}

/// Columns per block of the factorization.
const QR_BLOCK: usize = 32;

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Overwrites `v` with `beta` followed by the reflector tail and returns
/// `tau` such that `(I − τ·u·uᴴ)ᴴ·v = beta·e₁` with `u = (1, tail)`.
fn householder<T: Scalar>(v: &mut [T]) -> T {
    let alpha = v[0];
    let xnorm = T::norm2(&v[1..]);
    let alpha_im2 = alpha.abs2() - alpha.re() * alpha.re();
    if xnorm == 0.0 && alpha_im2 <= 0.0 {
        return T::ZERO;
    }
    let mag = alpha.modulus().hypot(xnorm);
    let beta = if alpha.re() >= 0.0 { -mag } else { mag };
    let tau = (T::from_real(beta) - alpha) / T::from_real(beta);
    let inv = T::from_real(1.0) / (alpha - T::from_real(beta));
    for x in &mut v[1..] {
        *x = *x * inv;
    }
    v[0] = T::from_real(beta);
    tau
}
