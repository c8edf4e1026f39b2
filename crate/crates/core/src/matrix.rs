//! Dense real matrices, the standard symplectic form, and 1-based index sets.
//!
//! [`Matrix`] is the row-major workhorse for every construction in the crate;
//! [`SquareMatrix`] wraps it with a checked square-shape invariant. Dimensions
//! stay small (a few hundred at most), so everything is plain `Vec<f64>`
//! storage with O(n^3) kernels.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Dense real matrix in row-major order. Rows or columns may be zero, which
/// makes empty frames (e.g. a `2n x 0` symplectic frame) first-class values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting shape mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            data: entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Domain("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
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

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.cols);
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        assert_eq!(col.len(), self.rows);
        for (i, &x) in col.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "hcat row mismatch");
        Matrix::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                rhs[(i, j - self.cols)]
            }
        })
    }

    /// Submatrix picked by 1-based row and column index sets, preserving order.
    pub fn submatrix(&self, row_set: &IndexSet, col_set: &IndexSet) -> Result<Matrix> {
        row_set.check_within(self.rows)?;
        col_set.check_within(self.cols)?;
        let rows: Vec<usize> = row_set.iter().collect();
        let cols: Vec<usize> = col_set.iter().collect();
        Ok(Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i] - 1, cols[j] - 1)]
        }))
    }

    /// Ordinary (non-symplectic) direct sum `diag(self, rhs)`.
    pub fn direct_sum(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..rhs.rows {
            for j in 0..rhs.cols {
                out[(self.rows + i, self.cols + j)] = rhs[(i, j)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Square root of the sum of squared entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest singular value, via the symmetric eigensolver applied to the
    /// smaller of `M^T M` and `M M^T`.
    pub fn spectral_norm(&self) -> f64 {
        crate::numerics::spectral_norm_impl(self)
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn det(&self) -> f64 {
        assert!(self.is_square(), "det requires a square matrix");
        let n = self.rows;
        let mut lu = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if lu[(p, k)] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                det = -det;
            }
            det *= lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / lu[(k, k)];
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        det
    }

    /// `(M + M^T) / 2`; handy for scrubbing round-off asymmetry.
    pub fn symmetrized(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>12.6}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Square matrix with the shape invariant checked at construction.
///
/// Derefs to [`Matrix`], so all rectangular operations apply directly.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(Matrix);

impl SquareMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain(
                "square matrix dimension must be positive".into(),
            ));
        }
        Ok(Self(Matrix::new(dim, dim, entries)?))
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Domain(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if m.entries().iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl std::ops::Deref for SquareMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl From<SquareMatrix> for Matrix {
    fn from(m: SquareMatrix) -> Matrix {
        m.0
    }
}

/// The standard symplectic form `J_{2n} = [[0, I_n], [-I_n, 0]]`, kept as a
/// half-dimension so applications are index shuffles rather than matmuls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    n: usize,
}

impl SymplecticForm {
    pub fn new(half_dim: usize) -> Self {
        Self { n: half_dim }
    }

    /// Form acting on vectors of length `dim`; `dim` must be even.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "symplectic form needs even dimension, got {dim}"
            )));
        }
        Ok(Self::new(dim / 2))
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Materializes `J_{2n}`.
    pub fn matrix(&self) -> SquareMatrix {
        let n = self.n;
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        SquareMatrix(j)
    }

    /// `J * M` as a row shuffle: top half becomes the bottom rows of `M`,
    /// bottom half the negated top rows.
    pub fn left_apply(&self, m: &Matrix) -> Matrix {
        assert_eq!(m.rows(), 2 * self.n, "form dimension mismatch");
        Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            if i < self.n {
                m[(self.n + i, j)]
            } else {
                -m[(i - self.n, j)]
            }
        })
    }

    /// `M * J` as a column shuffle.
    pub fn right_apply(&self, m: &Matrix) -> Matrix {
        assert_eq!(m.cols(), 2 * self.n, "form dimension mismatch");
        Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            if j < self.n {
                -m[(i, self.n + j)]
            } else {
                m[(i, j - self.n)]
            }
        })
    }

    /// `J * v` on a single vector.
    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), 2 * self.n);
        let mut out = vec![0.0; 2 * self.n];
        for i in 0..self.n {
            out[i] = v[self.n + i];
            out[self.n + i] = -v[i];
        }
        out
    }

    /// The bilinear form `u^T J v`.
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), 2 * self.n);
        assert_eq!(v.len(), 2 * self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += u[i] * v[self.n + i] - u[self.n + i] * v[i];
        }
        acc
    }

    /// `M^T J N` for frames with `2n` rows.
    pub fn form_product(&self, m: &Matrix, rhs: &Matrix) -> Matrix {
        m.transpose().matmul(&self.left_apply(rhs))
    }
}

/// Strictly increasing 1-based index set, mirroring the natural notation for
/// cluster index sets. May be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "index set must be strictly increasing".into(),
            ));
        }
        if indices.first().is_some_and(|&i| i == 0) {
            return Err(Error::Domain("index sets are 1-based".into()));
        }
        Ok(Self { indices })
    }

    /// `{lo, lo+1, ..., hi}` (inclusive, 1-based).
    pub fn from_range(lo: usize, hi: usize) -> Self {
        assert!(lo >= 1 && lo <= hi + 1);
        Self {
            indices: (lo..=hi).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    /// Every index shifted up by `offset`.
    pub fn shifted(&self, offset: usize) -> IndexSet {
        IndexSet {
            indices: self.indices.iter().map(|i| i + offset).collect(),
        }
    }

    /// Union with a set known to lie strictly above `self` (as for gamma =
    /// alpha followed by alpha + n).
    pub fn concat_above(&self, upper: &IndexSet) -> Result<IndexSet> {
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&upper.indices);
        IndexSet::new(indices)
    }

    pub fn check_within(&self, ambient: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max > ambient => Err(Error::Domain(format!(
                "index {max} exceeds ambient dimension {ambient}"
            ))),
            _ => Ok(()),
        }
    }
}
