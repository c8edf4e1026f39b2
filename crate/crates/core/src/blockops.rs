//! Structural operations on symplectic matrices: block extraction that
//! respects the half-split, the symplectic direct sum, column-interleaving
//! concatenation of symplectic frames, and the associated predicates.
//!
//! Conventions: a `2m x 2m` matrix `T = [[W, X], [Y, Z]]` has `m x m` blocks;
//! a `2n x 2k` frame stores its columns as `(p_1..p_k, q_1..q_k)`.

use crate::error::{Error, Result};
use crate::matrix::{IndexSet, Matrix, SquareMatrix, SymplecticForm};
use crate::numerics::ComplexPair;

/// Default predicate tolerance, scaled by the matrix dimension to absorb
/// round-off accumulated over O(dim) products.
pub fn default_predicate_tol(dim: usize) -> f64 {
    1e-8 * dim as f64
}

fn check_even(label: &str, value: usize) -> Result<usize> {
    if !value.is_multiple_of(2) {
        return Err(Error::Domain(format!("{label} must be even, got {value}")));
    }
    Ok(value / 2)
}

/// Extracts the block `[[W_IJ, X_IJ], [Y_IJ, Z_IJ]]` of a `2m x 2m` matrix;
/// the result is `2|I| x 2|J|`.
pub fn symplectic_block(t: &Matrix, row_set: &IndexSet, col_set: &IndexSet) -> Result<Matrix> {
    if !t.is_square() {
        return Err(Error::Domain(format!(
            "expected square input, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let m = check_even("matrix dimension", t.rows())?;
    row_set.check_within(m)?;
    col_set.check_within(m)?;
    let rows = row_set.concat_above(&row_set.shifted(m))?;
    let cols = col_set.concat_above(&col_set.shifted(m))?;
    t.submatrix(&rows, &cols)
}

/// [`symplectic_block`] with equal row and column index sets.
pub fn symplectic_diagonal_block(t: &Matrix, set: &IndexSet) -> Result<Matrix> {
    symplectic_block(t, set, set)
}

/// The symplectic direct sum `[[W + W', X + X'], [Y + Y', Z + Z']]` (ordinary
/// direct sums blockwise), which preserves symplecticity.
pub fn symplectic_direct_sum(t: &Matrix, t2: &Matrix) -> Result<Matrix> {
    if !t.is_square() || !t2.is_square() {
        return Err(Error::Domain(
            "symplectic direct sum needs square inputs".into(),
        ));
    }
    let m = check_even("first summand dimension", t.rows())?;
    let m2 = check_even("second summand dimension", t2.rows())?;
    let total = m + m2;
    let out = Matrix::from_fn(2 * total, 2 * total, |i, j| {
        let (bi, ri) = if i < total { (0, i) } else { (1, i - total) };
        let (bj, rj) = if j < total { (0, j) } else { (1, j - total) };
        match (ri < m, rj < m) {
            (true, true) => t[(bi * m + ri, bj * m + rj)],
            (false, false) => t2[(bi * m2 + ri - m, bj * m2 + rj - m)],
            _ => 0.0,
        }
    });
    Ok(out)
}

/// Folds [`symplectic_direct_sum`] over a list of square blocks.
pub fn symplectic_direct_sum_all(blocks: &[Matrix]) -> Result<Matrix> {
    let mut blocks = blocks.iter();
    let first = blocks
        .next()
        .ok_or_else(|| Error::Domain("need at least one block".into()))?
        .clone();
    blocks.try_fold(first, |acc, b| symplectic_direct_sum(&acc, b))
}

/// Symplectic concatenation: columns `(p, q)` of `M` and `(x, y)` of `N`
/// interleave to `(p_1..p_k, x_1..x_l, q_1..q_k, y_1..y_l)`.
pub fn symplectic_concat(m: &Matrix, n2: &Matrix) -> Result<Matrix> {
    if m.rows() != n2.rows() {
        return Err(Error::Domain(format!(
            "row counts differ: {} vs {}",
            m.rows(),
            n2.rows()
        )));
    }
    check_even("row count", m.rows())?;
    let k = check_even("first column count", m.cols())?;
    let l = check_even("second column count", n2.cols())?;
    let out = Matrix::from_fn(m.rows(), 2 * (k + l), |i, j| {
        let (half, jj) = if j < k + l { (0, j) } else { (1, j - (k + l)) };
        if jj < k {
            m[(i, half * k + jj)]
        } else {
            n2[(i, half * l + (jj - k))]
        }
    });
    Ok(out)
}

/// Outcome of a symplecticity test: `residual = ||M^T J M - J_{2k}||`.
#[derive(Debug, Clone, Copy)]
pub struct SymplecticCheck {
    pub pass: bool,
    pub residual: f64,
}

/// Tests whether a `2n x 2k` frame satisfies `M^T J_{2n} M = J_{2k}`.
pub fn is_symplectic(m: &Matrix, tol: f64) -> Result<SymplecticCheck> {
    let n = check_even("row count", m.rows())?;
    let k = check_even("column count", m.cols())?;
    if k > n {
        return Err(Error::Domain(format!(
            "frame has more column pairs ({k}) than row pairs ({n})"
        )));
    }
    let form = SymplecticForm::new(n);
    let gram = form.form_product(m, m);
    let target = SymplecticForm::new(k).matrix();
    let residual = (&gram - target.as_matrix()).spectral_norm();
    Ok(SymplecticCheck {
        pass: residual <= tol,
        residual,
    })
}

/// Outcome of an orthosymplecticity test, reporting both residuals.
#[derive(Debug, Clone, Copy)]
pub struct OrthosymplecticCheck {
    pub pass: bool,
    pub ortho_residual: f64,
    pub sympl_residual: f64,
}

/// Tests `Q^T Q = I` and `Q^T J Q = J` for a square even-dimensional matrix.
pub fn is_orthosymplectic(q: &Matrix, tol: f64) -> Result<OrthosymplecticCheck> {
    if !q.is_square() {
        return Err(Error::Domain(
            "orthosymplectic test needs a square matrix".into(),
        ));
    }
    let ortho_residual = (&q.transpose().matmul(q) - &Matrix::identity(q.rows())).spectral_norm();
    let sympl = is_symplectic(q, tol)?;
    Ok(OrthosymplecticCheck {
        pass: ortho_residual <= tol && sympl.residual <= tol,
        ortho_residual,
        sympl_residual: sympl.residual,
    })
}

/// Builds the orthosymplectic matrix `[[X, Y], [-Y, X]]` from a unitary
/// `X + iY`.
pub fn orthosymplectic_from_unitary(u: &ComplexPair) -> Result<SquareMatrix> {
    if u.rows() != u.cols() || u.rows() == 0 {
        return Err(Error::Domain(format!(
            "expected square unitary, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let n = u.rows();
    let (gram, skew) = u.unitarity_residuals();
    let tol = 1e-10 * n as f64;
    if gram > tol || skew > tol {
        return Err(Error::Domain(format!(
            "input is not unitary: residuals {gram:.3e}, {skew:.3e} exceed {tol:.1e}"
        )));
    }
    let q = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => u.re[(i, j)],
        (true, false) => u.im[(i, j - n)],
        (false, true) => -u.im[(i - n, j)],
        (false, false) => u.re[(i - n, j - n)],
    });
    SquareMatrix::from_matrix(q)
}

/// `||M^T J_{2n} N||`; the concatenation `M <> N` of two symplectic frames is
/// symplectic exactly when this vanishes.
pub fn concat_compatibility(m: &Matrix, n2: &Matrix) -> Result<f64> {
    if m.rows() != n2.rows() {
        return Err(Error::Domain("frames must share the row dimension".into()));
    }
    let n = check_even("row count", m.rows())?;
    let k = check_even("first column count", m.cols())?;
    let l = check_even("second column count", n2.cols())?;
    if k + l > n {
        return Err(Error::Domain(format!(
            "combined frame width {} exceeds ambient dimension {}",
            2 * (k + l),
            2 * n
        )));
    }
    let form = SymplecticForm::new(n);
    Ok(form.form_product(m, n2).spectral_norm())
}

/// Inverse of a symplectic matrix through the group identity
/// `S^{-1} = -J S^T J`, avoiding general inversion.
pub fn symplectic_inverse(s: &Matrix) -> Result<Matrix> {
    if !s.is_square() {
        return Err(Error::Domain(
            "symplectic inverse needs a square matrix".into(),
        ));
    }
    let n = check_even("matrix dimension", s.rows())?;
    let form = SymplecticForm::new(n);
    Ok(form
        .left_apply(&form.right_apply(&s.transpose()))
        .scale(-1.0))
}
