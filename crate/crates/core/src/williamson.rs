//! Williamson diagonalization `S^T A S = D (+) D` of positive definite
//! matrices, an independent symplectic-spectrum oracle, and seeded random
//! instance generators.
//!
//! The diagonalizer follows the classical constructive route: with
//! `R = A^{-1/2}` the skew matrix `K = R J R` has eigenvalues `+-i/d_j`, so an
//! orthogonal basis pairing each direction `u` with `-d K u` brings `K` to the
//! canonical form `[[0, D^{-1}], [-D^{-1}, 0]]`, and rescaling by `D^{1/2}`
//! yields the symplectic diagonalizer. How `S` is computed is not canonical;
//! the residual contracts on the result are what certify it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::blockops::orthosymplectic_from_unitary;
use crate::cluster::{build_clusters, ClusterStructure};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquareMatrix, SymplecticForm};
use crate::numerics::{pd_power_from_eigen, random_unitary, sym_eigen};

/// Condition numbers beyond this are refused: forming `A^{-1/2}` squares the
/// rounding error, and the residual contracts could not be met anyway.
pub const MAX_CONDITION: f64 = 1e12;

/// A symplectic diagonalization of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct WilliamsonResult {
    /// Symplectic matrix with `S^T A S = D (+) D`.
    pub s: SquareMatrix,
    /// Ascending symplectic eigenvalues `d_1 <= ... <= d_n`.
    pub d: Vec<f64>,
    /// Clustering of `d` at the requested tolerance.
    pub clusters: ClusterStructure,
    /// `||S^T A S - D (+) D||`.
    pub residual_diag: f64,
    /// `||S^T J S - J||`.
    pub residual_sympl: f64,
}

/// Recipe for a random positive definite test instance with a prescribed
/// symplectic spectrum.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub n: usize,
    pub spectrum: Vec<f64>,
    pub seed: u64,
    pub conditioning: f64,
}

fn pd_eigen(a: &SquareMatrix) -> Result<crate::numerics::SymmetricEigen> {
    let eig = sym_eigen(a)?;
    let min = eig.eigenvalues[0];
    let max = *eig.eigenvalues.last().expect("nonempty");
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue is {min:.6e}"
        )));
    }
    if max / min > MAX_CONDITION {
        return Err(Error::Numeric(format!(
            "condition number {:.3e} exceeds the {MAX_CONDITION:.0e} guard",
            max / min
        )));
    }
    Ok(eig)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Canonical pairing of the eigenvectors of `-K^2`.
///
/// Maintains per-candidate residuals against the already chosen pairs and at
/// each step promotes the candidate with the largest remaining mass; its
/// partner is `-d K u`, re-orthogonalized once. This works uniformly for
/// simple and repeated symplectic eigenvalues because any orthonormal pair
/// basis of an eigenspace is valid.
fn pair_eigenbasis(
    k: &Matrix,
    eigenvalues: &[f64],
    eigenvectors: &Matrix,
    cluster_tol: f64,
) -> Result<(Vec<f64>, Matrix)> {
    let two_n = k.rows();
    let n = two_n / 2;

    // d estimate per candidate, used only for error reporting
    let d_of = |lambda: f64| 1.0 / lambda.max(f64::MIN_POSITIVE).sqrt();

    let mut residuals: Vec<Vec<f64>> = (0..two_n).map(|j| eigenvectors.column(j)).collect();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(two_n);
    let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);

    for _ in 0..n {
        let (best, best_norm) = residuals
            .iter()
            .map(|r| norm(r))
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite norms"))
            .expect("nonempty candidate list");
        if best_norm * best_norm <= 0.5 {
            let ds: Vec<f64> = {
                let mut v: Vec<f64> = eigenvalues.iter().map(|&l| d_of(l)).collect();
                v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                v
            };
            let cluster = build_clusters(&ds, cluster_tol)
                .ok()
                .and_then(|c| {
                    let d = d_of(eigenvalues[best]);
                    c.mus()
                        .iter()
                        .position(|&mu| (mu - d).abs() <= cluster_tol * mu.max(1.0) * 4.0)
                })
                .map(|i| i + 1);
            return Err(Error::Numeric(format!(
                "eigenvector pairing failed: rank defect in cluster {} (candidate mass {best_norm:.3e})",
                cluster.map_or_else(|| "?".to_string(), |i| i.to_string())
            )));
        }

        let lambda = eigenvalues[best];
        if lambda <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "form operator has nonpositive squared frequency {lambda:.6e}"
            )));
        }
        let d = 1.0 / lambda.sqrt();

        let mut u = residuals[best].clone();
        let inv = 1.0 / best_norm;
        u.iter_mut().for_each(|x| *x *= inv);

        // partner -d K u, orthogonal to u exactly by skewness of K
        let ku = {
            let mu = Matrix::new(two_n, 1, u.clone()).expect("finite column");
            k.matmul(&mu).column(0)
        };
        let mut v: Vec<f64> = ku.iter().map(|x| -d * x).collect();
        for w in &chosen {
            let c = dot(w, &v);
            axpy(&mut v, -c, w);
        }
        let vn = norm(&v);
        if vn < 0.5 {
            return Err(Error::Numeric(format!(
                "eigenvector pairing failed: partner collapsed (norm {vn:.3e}) at d = {d:.6}"
            )));
        }
        let inv = 1.0 / vn;
        v.iter_mut().for_each(|x| *x *= inv);

        for r in residuals.iter_mut() {
            let cu = dot(&u, r);
            axpy(r, -cu, &u);
            let cv = dot(&v, r);
            axpy(r, -cv, &v);
        }
        chosen.push(u.clone());
        chosen.push(v.clone());
        pairs.push((d, u, v));
    }

    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite d"));
    let d: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut basis = Matrix::zeros(two_n, two_n);
    for (j, (_, u, v)) in pairs.iter().enumerate() {
        basis.set_column(j, u);
        basis.set_column(n + j, v);
    }
    Ok((d, basis))
}

/// Williamson diagonalization of a symmetric positive definite `2n x 2n`
/// matrix. Returns the symplectic `S`, the ascending symplectic eigenvalues,
/// their clustering at `cluster_tol`, and both certifying residuals.
pub fn williamson_decompose(a: &SquareMatrix, cluster_tol: f64) -> Result<WilliamsonResult> {
    let two_n = a.dim();
    if !two_n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "dimension must be even, got {two_n}"
        )));
    }
    let n = two_n / 2;
    let form = SymplecticForm::new(n);

    let eig = pd_eigen(a)?;
    let r = pd_power_from_eigen(&eig, -0.5)?;
    let k = r.matmul(&form.left_apply(&r));
    let minus_k2 = SquareMatrix::from_matrix(k.matmul(&k).scale(-1.0).symmetrized())?;
    let keig = sym_eigen(&minus_k2)?;

    let (d, basis) = pair_eigenbasis(
        &k,
        &keig.eigenvalues,
        keig.eigenvectors.as_matrix(),
        cluster_tol,
    )?;

    // S = R * O * (D^{1/2} (+) D^{1/2}) as a column scaling
    let mut s = r.matmul(&basis);
    for (j, &dj) in d.iter().enumerate() {
        let scale = dj.sqrt();
        for i in 0..two_n {
            s[(i, j)] *= scale;
            s[(i, n + j)] *= scale;
        }
    }

    let d_oplus_d = Matrix::from_diagonal(&[d.as_slice(), d.as_slice()].concat());
    let residual_diag =
        (&s.transpose().matmul(a.as_matrix()).matmul(&s) - &d_oplus_d).spectral_norm();
    let residual_sympl = (&form.form_product(&s, &s) - form.matrix().as_matrix()).spectral_norm();

    let a_norm = eig.eigenvalues.last().expect("nonempty").abs();
    if residual_sympl > 1e-8 * n as f64 {
        return Err(Error::Numeric(format!(
            "symplecticity residual {residual_sympl:.3e} exceeds 1e-8 * n"
        )));
    }
    if residual_diag > 1e-8 * a_norm * n as f64 {
        return Err(Error::Numeric(format!(
            "diagonalization residual {residual_diag:.3e} exceeds 1e-8 * ||A|| * n"
        )));
    }

    let clusters = build_clusters(&d, cluster_tol)?;
    Ok(WilliamsonResult {
        s: SquareMatrix::from_matrix(s)?,
        d,
        clusters,
        residual_diag,
        residual_sympl,
    })
}

/// Symplectic spectrum of a positive definite matrix without forming a
/// diagonalizer: the eigenvalues of `(M J M)^T (M J M)` with `M = A^{1/2}`
/// are the `d_j^2`, each twice. Serves as the independent cross-check for
/// [`williamson_decompose`].
pub fn symplectic_spectrum_oracle(a: &SquareMatrix) -> Result<Vec<f64>> {
    let two_n = a.dim();
    if !two_n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "dimension must be even, got {two_n}"
        )));
    }
    let n = two_n / 2;
    let form = SymplecticForm::new(n);
    let eig = pd_eigen(a)?;
    let m = pd_power_from_eigen(&eig, 0.5)?;
    let k = m.matmul(&form.left_apply(&m));
    let gram = SquareMatrix::from_matrix(k.transpose().matmul(&k).symmetrized())?;
    let geig = sym_eigen(&gram)?;
    let mut ds: Vec<f64> = geig
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ds.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok((0..n).map(|j| 0.5 * (ds[2 * j] + ds[2 * j + 1])).collect())
}

fn split_seed(seed: u64) -> (u64, u64, ChaCha20Rng) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let s1 = rng.random();
    let s2 = rng.random();
    (s1, s2, rng)
}

/// Random symplectic matrix `K_1 (L (+) L^{-1}) K_2` with orthosymplectic
/// `K_1, K_2` and `L` diagonal, entries log-uniform in `[1, conditioning]`.
pub fn random_symplectic(n: usize, seed: u64, conditioning: f64) -> Result<SquareMatrix> {
    if !conditioning.is_finite() || conditioning < 1.0 {
        return Err(Error::Domain(format!(
            "conditioning must be >= 1, got {conditioning}"
        )));
    }
    let (s1, s2, mut rng) = split_seed(seed);
    let k1 = orthosymplectic_from_unitary(&random_unitary(n, s1))?;
    let k2 = orthosymplectic_from_unitary(&random_unitary(n, s2))?;
    let log_max = conditioning.ln();
    let lambdas: Vec<f64> = (0..n)
        .map(|_| (rng.random::<f64>() * log_max).exp())
        .collect();
    let mut stretch = vec![0.0; 2 * n];
    for (i, &l) in lambdas.iter().enumerate() {
        stretch[i] = l;
        stretch[n + i] = 1.0 / l;
    }
    let s = k1.matmul(&Matrix::from_diagonal(&stretch)).matmul(&k2);
    SquareMatrix::from_matrix(s)
}

/// Random positive definite instance with prescribed symplectic spectrum.
///
/// Returns `(A, G)` where `A = G^{-T} (D (+) D) G^{-1}`, so `G` diagonalizes
/// `A` exactly up to round-off.
pub fn make_instance(spec: &InstanceSpec) -> Result<(SquareMatrix, SquareMatrix)> {
    if spec.spectrum.len() != spec.n {
        return Err(Error::Domain(format!(
            "spectrum length {} does not match n = {}",
            spec.spectrum.len(),
            spec.n
        )));
    }
    if spec.spectrum.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Domain("target spectrum must be positive".into()));
    }
    let g = random_symplectic(spec.n, spec.seed, spec.conditioning)?;
    let g_inv = crate::blockops::symplectic_inverse(&g)?;
    let d_oplus_d =
        Matrix::from_diagonal(&[spec.spectrum.as_slice(), spec.spectrum.as_slice()].concat());
    let a = g_inv
        .transpose()
        .matmul(&d_oplus_d)
        .matmul(&g_inv)
        .symmetrized();
    Ok((SquareMatrix::from_matrix(a)?, g))
}

/// Random symmetric matrix normalized to unit spectral norm; the standard
/// perturbation direction for the scaling studies.
pub fn random_symmetric(dim: usize, seed: u64) -> SquareMatrix {
    assert!(dim >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let b = Matrix::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let h = b.symmetrized();
    let norm = h.spectral_norm();
    SquareMatrix::from_matrix(h.scale(1.0 / norm)).expect("normalized symmetric matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockops::{is_orthosymplectic, is_symplectic};
    use crate::cluster::DEFAULT_CLUSTER_TOL;

    #[test]
    fn identity_decomposes_to_ones() {
        let a = SquareMatrix::identity(6);
        let w = williamson_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(w.d.len(), 3);
        for d in &w.d {
            assert!((d - 1.0).abs() < 1e-12);
        }
        assert!(w.residual_diag <= 1e-12);
        assert!(w.residual_sympl <= 1e-12);
        assert!(is_orthosymplectic(&w.s, 1e-10).unwrap().pass);
        assert_eq!(w.clusters.r(), 1);
    }

    #[test]
    fn n1_diagonal_recovers_sqrt_det() {
        let a = SquareMatrix::from_diagonal(&[1.0, 4.0]);
        let w = williamson_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(w.d.len(), 1);
        assert!((w.d[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn construct_then_recover_with_repeats() {
        let spec = InstanceSpec {
            n: 3,
            spectrum: vec![1.0, 1.0, 2.0],
            seed: 11,
            conditioning: 3.0,
        };
        let (a, g) = make_instance(&spec).unwrap();
        let w = williamson_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        for (got, want) in w.d.iter().zip(&[1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-8 * want, "got {got}, want {want}");
        }
        assert_eq!(w.clusters.r(), 2);
        // the generator really does diagonalize A
        let residual = (&g.transpose().matmul(a.as_matrix()).matmul(&g)
            - &Matrix::from_diagonal(&[1.0, 1.0, 2.0, 1.0, 1.0, 2.0]))
            .spectral_norm();
        assert!(residual < 1e-12, "residual {residual:.3e}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let indefinite = SquareMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            williamson_decompose(&indefinite, 1e-8),
            Err(Error::NotPositiveDefinite(_))
        ));
        let odd = SquareMatrix::identity(3);
        assert!(matches!(
            williamson_decompose(&odd, 1e-8),
            Err(Error::Domain(_))
        ));
        let harsh = SquareMatrix::from_diagonal(&[1e14, 1.0e-4, 1e14, 1.0e-4]);
        assert!(matches!(
            williamson_decompose(&harsh, 1e-8),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn oracle_identity_and_2x2() {
        let id = SquareMatrix::identity(8);
        let d = symplectic_spectrum_oracle(&id).unwrap();
        for x in &d {
            assert!((x - 1.0).abs() < 1e-13);
        }
        let a = SquareMatrix::from_diagonal(&[3.0, 12.0]);
        let d = symplectic_spectrum_oracle(&a).unwrap();
        assert!((d[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_diagonal_is_near_exact() {
        let d0 = [0.25, 1.0, 2.0, 7.5];
        let a = SquareMatrix::from_diagonal(&[&d0[..], &d0[..]].concat());
        let d = symplectic_spectrum_oracle(&a).unwrap();
        for (got, want) in d.iter().zip(&d0) {
            assert!((got - want).abs() <= 1e-14 * want, "got {got}, want {want}");
        }
    }

    #[test]
    fn oracle_congruence_invariance_and_scaling() {
        let spec = InstanceSpec {
            n: 4,
            spectrum: vec![0.5, 1.0, 1.0, 3.0],
            seed: 5,
            conditioning: 4.0,
        };
        let (a, _) = make_instance(&spec).unwrap();
        let base = symplectic_spectrum_oracle(&a).unwrap();

        let g = random_symplectic(4, 77, 3.0).unwrap();
        let congruent =
            SquareMatrix::from_matrix(g.transpose().matmul(a.as_matrix()).matmul(&g).symmetrized())
                .unwrap();
        let moved = symplectic_spectrum_oracle(&congruent).unwrap();
        for (x, y) in base.iter().zip(&moved) {
            assert!((x - y).abs() <= 1e-8 * x, "congruence broke: {x} vs {y}");
        }

        for c in [0.5, 2.0, 10.0] {
            let scaled = SquareMatrix::from_matrix(a.scale(c)).unwrap();
            let sd = symplectic_spectrum_oracle(&scaled).unwrap();
            for (x, y) in base.iter().zip(&sd) {
                assert!((c * x - y).abs() <= 1e-10 * c * x);
            }
        }
    }

    #[test]
    fn random_symplectic_properties() {
        for seed in [0u64, 1, 2] {
            let s = random_symplectic(3, seed, 4.0).unwrap();
            let check = is_symplectic(&s, 1e-10 * 3.0).unwrap();
            assert!(check.pass, "seed {seed}: residual {:.3e}", check.residual);
            assert!((s.det() - 1.0).abs() < 1e-8, "seed {seed}: det {}", s.det());
        }
        let ortho = random_symplectic(4, 9, 1.0).unwrap();
        assert!(is_orthosymplectic(&ortho, 1e-10 * 4.0).unwrap().pass);
        assert!(random_symplectic(2, 0, 0.5).is_err());
    }

    #[test]
    fn make_instance_unit_spectrum_is_identity() {
        let spec = InstanceSpec {
            n: 3,
            spectrum: vec![1.0; 3],
            seed: 21,
            conditioning: 1.0,
        };
        let (a, _) = make_instance(&spec).unwrap();
        assert!((a.as_matrix() - &Matrix::identity(6)).spectral_norm() < 1e-12);
    }

    #[test]
    fn make_instance_is_positive_definite() {
        let spec = InstanceSpec {
            n: 4,
            spectrum: vec![0.5, 1.0, 2.0, 2.0],
            seed: 3,
            conditioning: 5.0,
        };
        let (a, _) = make_instance(&spec).unwrap();
        let eig = sym_eigen(&a).unwrap();
        assert!(eig.eigenvalues[0] > 0.0);
    }

    #[test]
    fn random_symmetric_contract() {
        let h = random_symmetric(6, 123);
        assert_eq!(h.as_matrix(), &h.transpose());
        assert!((h.spectral_norm() - 1.0).abs() < 1e-12);
        let h2 = random_symmetric(6, 123);
        assert_eq!(h.entries(), h2.entries());
    }
}
