//! Dense complex linear algebra.
//!
//! Everything here is sized for the small operators this crate works with
//! (qudit states, `d² × d²` superoperators and Choi matrices, system-reference
//! states). Storage is row-major and indices are zero-based.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Default bound on `max(|M - M†|)` accepted by [`hermitian_eig`].
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-10;

/// Default bound on either dimension of a Kronecker product.
pub const DEFAULT_DIMENSION_BOUND: usize = 1 << 16;

const MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch("entry count differs from rows x cols"));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix with the given real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// The outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
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

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry of `|self - other|`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |M - M†|`; infinite for non-square matrices.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Matrix product. Panics when the inner dimensions differ.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `Σ conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product with the default dimension bound.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_bounded(a, b, DEFAULT_DIMENSION_BOUND)
}

/// Kronecker product; entry `(i·b.rows + k, j·b.cols + l)` is `a[i,j]·b[k,l]`.
pub fn kron_bounded(a: &ComplexMatrix, b: &ComplexMatrix, bound: usize) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows).ok_or(Error::DimensionOverflow(usize::MAX))?;
    let cols = a.cols.checked_mul(b.cols).ok_or(Error::DimensionOverflow(usize::MAX))?;
    if rows > bound || cols > bound {
        return Err(Error::DimensionOverflow(rows.max(cols)));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    }))
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Which factor of `H_A ⊗ H_B` a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn partial_trace(m: &ComplexMatrix, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<ComplexMatrix> {
    if !m.is_square() || dim_a == 0 || dim_b == 0 || m.rows != dim_a * dim_b {
        return Err(Error::DimensionMismatch("partial trace needs a square (dim_a*dim_b) matrix"));
    }
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
    };
    Ok(out)
}

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V · diag(f(λ)) · V†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }
}

/// The 2×2 unitary `J` with `J† [[a, b], [b*, d]] J` diagonal, returned as
/// `(J, t)` where the new diagonal is `(a - t|b|, d + t|b|)`.
fn jacobi_rotation(a: f64, d: f64, b: Complex64) -> ([Complex64; 4], f64) {
    let abs_b = b.norm();
    let tau = (d - a) / (2.0 * abs_b);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let t = if t.is_finite() { t } else { 0.0 };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = (b / abs_b).conj();
    (
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0), phase * (-s), phase * c],
        t,
    )
}

/// Applies `M ← M J` on columns `p`, `q`, with `J = [[j00, j01], [j10, j11]]`.
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, j: &[Complex64; 4]) {
    let cols = m.cols;
    for k in 0..m.rows {
        let xp = m.data[k * cols + p];
        let xq = m.data[k * cols + q];
        m.data[k * cols + p] = xp * j[0] + xq * j[2];
        m.data[k * cols + q] = xp * j[1] + xq * j[3];
    }
}

/// Applies `M ← J† M` on rows `p`, `q`.
fn rotate_rows(m: &mut ComplexMatrix, p: usize, q: usize, j: &[Complex64; 4]) {
    let cols = m.cols;
    for k in 0..cols {
        let xp = m.data[p * cols + k];
        let xq = m.data[q * cols + k];
        m.data[p * cols + k] = j[0].conj() * xp + j[2].conj() * xq;
        m.data[q * cols + k] = j[1].conj() * xp + j[3].conj() * xq;
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input must satisfy `max |M - M†| ≤ hermiticity_tol`; its Hermitian
/// part is diagonalized. Row-cyclic ordering with no pivot selection keeps the
/// result bit-reproducible.
pub fn hermitian_eig(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows, cols: m.cols });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = m.hermiticity_deviation();
    if deviation > hermiticity_tol {
        return Err(Error::NonHermitian { deviation, tolerance: hermiticity_tol });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off == 0.0 || off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                if b.norm() == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let (j, t) = jacobi_rotation(app, aqq, b);
                let abs_b = b.norm();
                rotate_columns(&mut a, p, q, &j);
                rotate_rows(&mut a, p, q, &j);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(app - t * abs_b, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * abs_b, 0.0);
                rotate_columns(&mut v, p, q, &j);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<Vec<f64>> {
    hermitian_eig(m, hermiticity_tol).map(|e| e.eigenvalues)
}

/// Thin singular value decomposition `M = U · diag(σ) · V†`.
///
/// `u` is `rows × cols` with orthonormal columns wherever `σ > 0` (zero
/// columns otherwise), `v` is `cols × cols` unitary, `singular_values` is
/// descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueDecomposition {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. Small singular values come out with
/// absolute accuracy near `ε·σ_max`, which the rank decisions downstream rely on.
pub fn svd(m: &ComplexMatrix) -> Result<SingularValueDecomposition> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (rows, n) = (m.rows, m.cols);
    let mut u = m.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..rows {
                    let (x, y) = (u[(k, p)], u[(k, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if alpha == 0.0 || beta == 0.0 || gamma.norm() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                let (j, _) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut u, p, q, &j);
                rotate_columns(&mut v, p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| (0..rows).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    for (j, &s) in sigma.iter().enumerate() {
        for i in 0..rows {
            u[(i, j)] = if s > 0.0 { u[(i, j)] / s } else { ZERO };
        }
    }
    // selection sort keeps the column swaps explicit
    for k in 0..n {
        let best = (k..n).fold(k, |b, j| if sigma[j] > sigma[b] { j } else { b });
        if best != k {
            sigma.swap(k, best);
            u.swap_columns(k, best);
            v.swap_columns(k, best);
        }
    }
    Ok(SingularValueDecomposition { u, singular_values: sigma, v })
}

/// Moore-Penrose pseudo-inverse; singular values at or below
/// `rel_tol · σ_max` are treated as zero. Returns the inverse and the rank.
pub fn pseudo_inverse(m: &ComplexMatrix, rel_tol: f64) -> Result<(ComplexMatrix, usize)> {
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(m.cols, m.rows);
    let mut rank = 0;
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= rel_tol * smax {
            continue;
        }
        rank += 1;
        for i in 0..m.cols {
            let vik = dec.v[(i, k)] / s;
            for j in 0..m.rows {
                out[(i, j)] += vik * dec.u[(j, k)].conj();
            }
        }
    }
    Ok((out, rank))
}
