//! Dense complex linear algebra and the exact-evolution oracle.
//!
//! Matrices are stored row-major. Every other module builds its operators
//! here and checks its results against [`exact_evolution`], which goes
//! through a Hermitian eigendecomposition so that the propagator is unitary
//! up to round-off.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Phase convention of a propagator: `Minus` is `exp(-iHt)`, `Plus` is `exp(+iHt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    #[default]
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    /// `sign * i`.
    pub fn imaginary_unit(self) -> C64 {
        I * self.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            -1 => Ok(Sign::Minus),
            1 => Ok(Sign::Plus),
            other => Err(format!("sign must be -1 or +1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            rows >= 1 && cols >= 1,
            "matrix dimensions must be at least 1x1"
        );
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    /// Real matrix literal helper, mostly for tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
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

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix product. Panics if the inner dimensions differ.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product. Panics if `v.len() != cols`.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> ComplexMatrix {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        self.map(|z| z * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entry difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |h - h^dagger|`; infinite for non-square input.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Integer power by repeated squaring. Panics for non-square input.
    pub fn pow(&self, mut exponent: u64) -> ComplexMatrix {
        assert!(self.is_square(), "pow needs a square matrix");
        let mut result = ComplexMatrix::identity(self.rows);
        let mut base = self.clone();
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = result.matmul(&base);
            }
            exponent >>= 1;
            if exponent > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Sub-matrix of the entries whose row index is `row_offset + row_stride * i`
    /// and column index `col_offset + col_stride * j`.
    pub fn strided_block(
        &self,
        row_offset: usize,
        row_stride: usize,
        col_offset: usize,
        col_stride: usize,
    ) -> ComplexMatrix {
        let rows = (self.rows - row_offset).div_ceil(row_stride);
        let cols = (self.cols - col_offset).div_ceil(col_stride);
        ComplexMatrix::from_fn(rows, cols, |r, c| {
            self[(row_offset + row_stride * r, col_offset + col_stride * c)]
        })
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "elementwise shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> ComplexMatrix {
        ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

pub(crate) fn check_finite(values: &[C64]) -> Result<()> {
    match values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(index) => {
            let z = values[index];
            let value = if z.re.is_finite() { z.im } else { z.re };
            Err(Error::NonFinite { index, value })
        }
        None => Ok(()),
    }
}

/// Operators with a cheap structure: diagonals, cyclic shifts, basis exchanges.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredOperator {
    Diagonal(Vec<C64>),
    /// `(S psi)_m = psi_{m + offset mod dim}`, with `offset` in `[0, dim)`.
    CyclicShift {
        offset: usize,
        dim: usize,
    },
    /// Permutation exchanging basis states `a` and `b`.
    Transposition {
        a: usize,
        b: usize,
        dim: usize,
    },
    Dense(ComplexMatrix),
}

impl StructuredOperator {
    pub fn cyclic_shift(offset: isize, dim: usize) -> Self {
        assert!(dim >= 1);
        StructuredOperator::CyclicShift {
            offset: offset.rem_euclid(dim as isize) as usize,
            dim,
        }
    }

    pub fn transposition(a: usize, b: usize, dim: usize) -> Result<Self> {
        if a >= dim || b >= dim {
            return Err(Error::IndexOutOfRange { m: a, n: b, dim });
        }
        Ok(StructuredOperator::Transposition { a, b, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            StructuredOperator::Diagonal(v) => v.len(),
            StructuredOperator::CyclicShift { dim, .. } => *dim,
            StructuredOperator::Transposition { dim, .. } => *dim,
            StructuredOperator::Dense(m) => m.rows(),
        }
    }

    pub fn densify(&self) -> ComplexMatrix {
        match self {
            StructuredOperator::Diagonal(v) => ComplexMatrix::diagonal(v),
            StructuredOperator::CyclicShift { offset, dim } => {
                let mut m = ComplexMatrix::zeros(*dim, *dim);
                for r in 0..*dim {
                    m[(r, (r + offset) % dim)] = ONE;
                }
                m
            }
            StructuredOperator::Transposition { a, b, dim } => {
                let mut m = ComplexMatrix::identity(*dim);
                m[(*a, *a)] = ZERO;
                m[(*b, *b)] = ZERO;
                m[(*a, *b)] = ONE;
                m[(*b, *a)] = ONE;
                m
            }
            StructuredOperator::Dense(m) => m.clone(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        Ok(match self {
            StructuredOperator::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            StructuredOperator::CyclicShift { offset, dim } => {
                (0..*dim).map(|r| v[(r + offset) % dim]).collect()
            }
            StructuredOperator::Transposition { a, b, .. } => {
                let mut out = v.to_vec();
                out.swap(*a, *b);
                out
            }
            StructuredOperator::Dense(m) => m.matvec(v),
        })
    }
}

/// Kronecker product; the left factor carries the slow index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Kronecker product of two vectors, same index convention as [`tensor`].
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Eigendecomposition `h = V diag(eigenvalues) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn of_hermitian(h: &ComplexMatrix) -> Result<Self> {
        require_hermitian(h)?;
        // Exact symmetrization so the solver sees a Hermitian input.
        let sym = (h + &h.adjoint()).scale(C64::new(0.5, 0.0));
        let eig = SymmetricEigen::new(sym.to_nalgebra());
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: ComplexMatrix::from_nalgebra(&eig.eigenvectors),
        })
    }

    /// `V f(diag(eigenvalues)) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| v[(r, c)] * weights[c]);
        scaled.matmul(&v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|l| C64::new(l, 0.0))
    }
}

pub(crate) fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NonSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOLERANCE || err.is_nan() {
        return Err(Error::NonHermitian(err));
    }
    Ok(())
}

/// `exp(sign * i * h * t)` for Hermitian `h`.
pub fn exact_evolution(h: &ComplexMatrix, t: f64, sign: Sign) -> Result<ComplexMatrix> {
    let decomposition = SpectralDecomposition::of_hermitian(h)?;
    let s = sign.value();
    Ok(decomposition.apply_function(|l| C64::from_polar(1.0, s * l * t)))
}

/// `sqrt(||A||_1 ||A||_inf)`, which bounds the largest singular value from above.
pub fn spectral_norm_upper_bound(h: &ComplexMatrix) -> f64 {
    let max_row = (0..h.rows())
        .map(|r| h.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let max_col = (0..h.cols())
        .map(|c| (0..h.rows()).map(|r| h[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    (max_row * max_col).sqrt()
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    norm_sqr(v).sqrt()
}

/// Euclidean distance between two equal-length vectors.
pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff_vec(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|z| z / n).collect())
}

/// `|<a|b>| / (||a|| ||b||)`, clamped to `[0, 1]`.
pub fn fidelity(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((inner(a, b).norm() / (na * nb)).clamp(0.0, 1.0))
}
