//! Dense numerical kernels: a cyclic Jacobi eigensolver for symmetric
//! matrices, positive definite matrix powers, seeded unitary generation, and
//! log-log slope fitting.
//!
//! Jacobi was chosen over QR iteration deliberately: the matrices here are
//! small, the sweep order is deterministic, and eigenvalues of positive
//! definite matrices come out with high relative accuracy, which the
//! inverse-square-root path depends on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquareMatrix};

/// Relative off-diagonal mass at which a Jacobi sweep is declared converged.
const JACOBI_TOL: f64 = 1e-14;
/// Hard cap on Jacobi sweeps before reporting non-convergence.
const MAX_SWEEPS: usize = 100;
/// Default floor below which residuals are excluded from slope fits; values
/// this small sit on the round-off floor and would bias the fitted exponent.
pub const DEFAULT_DROP_BELOW: f64 = 1e-13;

/// Result of a symmetric eigendecomposition: `A V = V diag(eigenvalues)` with
/// orthonormal columns and eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: SquareMatrix,
}

impl SymmetricEigen {
    /// `V diag(f(lambda)) V^T`, explicitly symmetrized.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> SquareMatrix {
        let v = self.eigenvectors.as_matrix();
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let scaled = Matrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * mapped[j]);
        let m = scaled.matmul(&v.transpose()).symmetrized();
        SquareMatrix::from_matrix(m).expect("spectral function of a square matrix is square")
    }
}

fn off_diagonal_mass(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps run in deterministic row-cyclic order until the off-diagonal
/// Frobenius mass drops below `1e-14 * ||A||_F`. Rejects matrices whose
/// asymmetry exceeds `1e-10 * ||A||_F`; the iteration itself works on the
/// symmetrized input.
pub fn sym_eigen(a: &SquareMatrix) -> Result<SymmetricEigen> {
    let n = a.dim();
    let scale = a.frobenius_norm();
    let asym = (a.as_matrix() - &a.transpose()).frobenius_norm();
    if asym > 1e-10 * scale {
        return Err(Error::Domain(format!(
            "matrix is not symmetric: asymmetry {asym:.3e} exceeds 1e-10 * {scale:.3e}"
        )));
    }

    let mut m = a.symmetrized();
    let mut v = Matrix::identity(n);
    let tol = JACOBI_TOL * scale;
    let mut converged = off_diagonal_mass(&m) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi failed to converge after {MAX_SWEEPS} sweeps (off-diagonal mass {:.3e})",
                off_diagonal_mass(&m)
            )));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(p, k)] = m[(k, p)];
                    m[(k, q)] = s * mkp + c * mkq;
                    m[(q, k)] = m[(k, q)];
                }
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .partial_cmp(&m[(j, j)])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &v.column(src));
    }

    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors: SquareMatrix::from_matrix(sorted)?,
    })
}

/// `A^p` for symmetric positive definite `A` through the eigendecomposition.
pub fn pd_power(a: &SquareMatrix, p: f64) -> Result<SquareMatrix> {
    let eig = sym_eigen(a)?;
    pd_power_from_eigen(&eig, p)
}

/// Same as [`pd_power`] but reusing an existing decomposition.
pub fn pd_power_from_eigen(eig: &SymmetricEigen, p: f64) -> Result<SquareMatrix> {
    let min = eig.eigenvalues[0];
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue is {min:.6e}"
        )));
    }
    Ok(eig.apply_spectral(|l| l.powf(p)))
}

/// Real and imaginary parts of a complex matrix, kept as two equally shaped
/// real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPair {
    pub re: Matrix,
    pub im: Matrix,
}

impl ComplexPair {
    pub fn new(re: Matrix, im: Matrix) -> Result<Self> {
        if re.rows() != im.rows() || re.cols() != im.cols() {
            return Err(Error::Domain(format!(
                "real part is {}x{} but imaginary part is {}x{}",
                re.rows(),
                re.cols(),
                im.rows(),
                im.cols()
            )));
        }
        Ok(Self { re, im })
    }

    pub fn rows(&self) -> usize {
        self.re.rows()
    }

    pub fn cols(&self) -> usize {
        self.re.cols()
    }

    /// Residuals of the two real-form unitarity identities
    /// `X^T X + Y^T Y = I` and `X^T Y - Y^T X = 0`.
    pub fn unitarity_residuals(&self) -> (f64, f64) {
        let xtx = self.re.transpose().matmul(&self.re);
        let yty = self.im.transpose().matmul(&self.im);
        let gram = &(&xtx + &yty) - &Matrix::identity(self.cols());
        let xty = self.re.transpose().matmul(&self.im);
        let ytx = self.im.transpose().matmul(&self.re);
        let skew = &xty - &ytx;
        (gram.spectral_norm(), skew.spectral_norm())
    }
}

/// Complex modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Columns are `re[:,j] + i im[:,j]`, processed in index order. Fails with the
/// supplied error when a column's post-projection norm drops below `fail_tol`.
pub(crate) fn complex_gram_schmidt(
    re: &Matrix,
    im: &Matrix,
    fail_tol: f64,
    on_fail: impl Fn(usize) -> Error,
) -> Result<(Matrix, Matrix)> {
    let rows = re.rows();
    let cols = re.cols();
    let mut q_re = Matrix::zeros(rows, cols);
    let mut q_im = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut zr = re.column(j);
        let mut zi = im.column(j);
        // two passes: plain Gram-Schmidt, then a re-orthogonalization sweep
        for _ in 0..2 {
            for k in 0..j {
                let qr = q_re.column(k);
                let qi = q_im.column(k);
                // <q_k, z> with the first argument conjugated
                let mut pr = 0.0;
                let mut pi = 0.0;
                for i in 0..rows {
                    pr += qr[i] * zr[i] + qi[i] * zi[i];
                    pi += qr[i] * zi[i] - qi[i] * zr[i];
                }
                for i in 0..rows {
                    zr[i] -= pr * qr[i] - pi * qi[i];
                    zi[i] -= pr * qi[i] + pi * qr[i];
                }
            }
        }
        let norm = zr
            .iter()
            .chain(zi.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm < fail_tol {
            return Err(on_fail(j));
        }
        for i in 0..rows {
            zr[i] /= norm;
            zi[i] /= norm;
        }
        q_re.set_column(j, &zr);
        q_im.set_column(j, &zi);
    }
    Ok((q_re, q_im))
}

/// Haar-style random unitary matrix, deterministic in the seed.
///
/// Draws a standard complex Gaussian sample and orthonormalizes it with
/// modified Gram-Schmidt; the triangular factor's diagonal is automatically
/// positive real, so no phase fixing is needed.
pub fn random_unitary(n: usize, seed: u64) -> ComplexPair {
    assert!(n >= 1, "unitary dimension must be at least 1");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    loop {
        let mut re = Matrix::zeros(n, n);
        let mut im = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                re[(i, j)] = rng.sample(StandardNormal);
                im[(i, j)] = rng.sample(StandardNormal);
            }
        }
        // A singular Gaussian draw has probability zero; redraw if it happens.
        match complex_gram_schmidt(&re, &im, 1e-10, |_| Error::Numeric("redraw".into())) {
            Ok((q_re, q_im)) => {
                return ComplexPair { re: q_re, im: q_im };
            }
            Err(_) => continue,
        }
    }
}

/// Least-squares line through `(log t, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Fits `log y = slope * log t + intercept`, dropping points with
/// `y <= drop_below` (they sit at the round-off floor). Requires at least
/// three retained points.
pub fn fit_loglog_slope(ts: &[f64], ys: &[f64], drop_below: f64) -> Result<LineFit> {
    if ts.len() != ys.len() {
        return Err(Error::Domain(format!(
            "ts and ys must have equal length ({} vs {})",
            ts.len(),
            ys.len()
        )));
    }
    let points: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(&t, &y)| t > 0.0 && y > drop_below && y.is_finite())
        .map(|(&t, &y)| (t.ln(), y.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points above the floor {drop_below:.1e}, have {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all retained abscissae coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

/// Largest singular value via the symmetric eigensolver on the smaller Gram
/// matrix. Backs [`Matrix::spectral_norm`].
pub(crate) fn spectral_norm_impl(m: &Matrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let gram = if m.rows() >= m.cols() {
        m.transpose().matmul(m)
    } else {
        m.matmul(&m.transpose())
    };
    let sq = SquareMatrix::from_matrix(gram.symmetrized())
        .expect("gram matrix is square with finite entries");
    let eig = sym_eigen(&sq).expect("gram matrix is symmetric by construction");
    eig.eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}
