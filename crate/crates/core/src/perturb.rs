//! Perturbation machinery for symplectic diagonalizers.
//!
//! Given diagonalizers `S` of `A` and `S~` of `A + H`, the transition matrix
//! `C = S^{-1} S~` is, to first order in `||H||`, a symplectic-block-diagonal
//! orthosymplectic matrix with blocks sized by the symplectic eigenvalue
//! multiplicities of `A`. This module measures that structure
//! ([`perturbation_report`]), constructs the nearest block-diagonal
//! orthosymplectic alignment ([`align_orthosymplectic`]) and the induced
//! first-order diagonalizer ([`nearest_diagonalizer`]), builds the
//! second-order symplectic correction from elementary SR steps
//! ([`symplectic_correction`]), and drives residual-vs-scale sweeps
//! ([`scaling_study`]) that expose the first- and second-order rates.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::blockops::{
    default_predicate_tol, is_symplectic, symplectic_block, symplectic_concat,
    symplectic_direct_sum_all, symplectic_inverse,
};
use crate::cluster::{ClusterStructure, DEFAULT_CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquareMatrix, SymplecticForm};
use crate::numerics::{complex_gram_schmidt, fit_loglog_slope, LineFit};
use crate::williamson::{make_instance, random_symmetric, williamson_decompose, InstanceSpec};

/// Absolute tolerance on the normalized pivot `u^T J v / (||u|| ||v||)` below
/// which a column pair is declared isotropic. In the perturbative regime the
/// pivot is `1 + O(||H||^2)`, so a vanishing pivot signals a broken regime
/// rather than a tolerance problem.
pub const ESR_ISO_TOL: f64 = 1e-12;

/// Residual norms of the five first/second-order block relations of the
/// transition matrix `C = S^{-1} S~`, keyed by 1-based cluster indices.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    /// `||C_{gamma_i gamma_j}||` for `i != j`; first order in `||H||`.
    pub offdiag: BTreeMap<(usize, usize), f64>,
    /// `||C_{alpha_i alpha_i} - C_{beta_i beta_i}||`; first order.
    pub sym_defect: Vec<f64>,
    /// `||C_{alpha_i beta_i} + C_{beta_i alpha_i}||`; first order.
    pub antisym_defect: Vec<f64>,
    /// `||B^T B - I||` for `B = C_{gamma_i gamma_i}`; first order.
    pub ortho_defect: Vec<f64>,
    /// `||B^T J B - J||`; second order.
    pub sympl_defect: Vec<f64>,
    /// Spectral norm of the perturbation `H`.
    pub h_norm: f64,
    /// Frobenius norm of `H`, kept alongside as a diagnostic.
    pub h_norm_frobenius: f64,
}

impl PerturbationReport {
    pub fn offdiag_max(&self) -> f64 {
        self.offdiag.values().fold(0.0, |acc, v| acc.max(*v))
    }

    pub fn sym_defect_max(&self) -> f64 {
        self.sym_defect.iter().fold(0.0, |acc, v| acc.max(*v))
    }

    pub fn antisym_defect_max(&self) -> f64 {
        self.antisym_defect.iter().fold(0.0, |acc, v| acc.max(*v))
    }

    pub fn ortho_defect_max(&self) -> f64 {
        self.ortho_defect.iter().fold(0.0, |acc, v| acc.max(*v))
    }

    pub fn sympl_defect_max(&self) -> f64 {
        self.sympl_defect.iter().fold(0.0, |acc, v| acc.max(*v))
    }
}

/// Block-diagonal orthosymplectic alignment of `S~` against `S`.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// `Q = Q_1 (+s) ... (+s) Q_r`, orthosymplectic by construction.
    pub q: SquareMatrix,
    /// Per-cluster orthosymplectic blocks `Q_i` of size `2|alpha_i|`.
    pub blocks: Vec<SquareMatrix>,
    /// `||S~ - S Q||`.
    pub residual: f64,
}

/// Per-cluster symplectic matrices within `O(||H||^2)` of the diagonal
/// transition blocks.
#[derive(Debug, Clone)]
pub struct CorrectionResult {
    /// `N_i`, symplectic by construction, one per cluster.
    pub blocks: Vec<SquareMatrix>,
    /// `||C_{gamma_i gamma_i} - N_i||` per cluster.
    pub residuals: Vec<f64>,
}

impl CorrectionResult {
    pub fn residual_max(&self) -> f64 {
        self.residuals.iter().fold(0.0, |acc, v| acc.max(*v))
    }
}

fn check_inputs(
    label: &str,
    s: &SquareMatrix,
    s_tilde: &SquareMatrix,
    clusters: &ClusterStructure,
) -> Result<()> {
    let two_n = 2 * clusters.n();
    if s.dim() != two_n || s_tilde.dim() != two_n {
        return Err(Error::Domain(format!(
            "{label}: matrices are {}x{} and {}x{} but clusters describe dimension {two_n}",
            s.dim(),
            s.dim(),
            s_tilde.dim(),
            s_tilde.dim()
        )));
    }
    let tol = default_predicate_tol(two_n);
    for (name, m) in [("S", s), ("S~", s_tilde)] {
        let check = is_symplectic(m, tol)?;
        if !check.pass {
            return Err(Error::Domain(format!(
                "{label}: {name} is not symplectic (residual {:.3e} > {tol:.1e})",
                check.residual
            )));
        }
    }
    Ok(())
}

fn transition(s: &SquareMatrix, s_tilde: &SquareMatrix) -> Result<Matrix> {
    Ok(symplectic_inverse(s)?.matmul(s_tilde))
}

/// Measures the block structure of `C = S^{-1} S~` against the clusters of
/// `A`: off-diagonal block norms, the two component defects, and the
/// orthogonality/symplecticity defects of the diagonal blocks.
///
/// `S^{-1}` is computed through the group identity `-J S^T J`; `a` fixes the
/// ambient dimension and `h` only contributes its norm to the report.
pub fn perturbation_report(
    a: &SquareMatrix,
    h: &SquareMatrix,
    s: &SquareMatrix,
    s_tilde: &SquareMatrix,
    clusters: &ClusterStructure,
) -> Result<PerturbationReport> {
    let two_n = 2 * clusters.n();
    if a.dim() != two_n || h.dim() != two_n {
        return Err(Error::Domain(format!(
            "A and H must be {two_n}x{two_n} to match the cluster structure"
        )));
    }
    check_inputs("perturbation_report", s, s_tilde, clusters)?;
    let c = transition(s, s_tilde)?;
    let r = clusters.r();

    let mut offdiag = BTreeMap::new();
    for i in 0..r {
        for j in 0..r {
            if i != j {
                let block = symplectic_block(&c, &clusters.alphas()[i], &clusters.alphas()[j])?;
                offdiag.insert((i + 1, j + 1), block.spectral_norm());
            }
        }
    }

    let mut sym_defect = Vec::with_capacity(r);
    let mut antisym_defect = Vec::with_capacity(r);
    let mut ortho_defect = Vec::with_capacity(r);
    let mut sympl_defect = Vec::with_capacity(r);
    for i in 0..r {
        let alpha = &clusters.alphas()[i];
        let beta = &clusters.betas()[i];
        let c_aa = c.submatrix(alpha, alpha)?;
        let c_bb = c.submatrix(beta, beta)?;
        let c_ab = c.submatrix(alpha, beta)?;
        let c_ba = c.submatrix(beta, alpha)?;
        sym_defect.push((&c_aa - &c_bb).spectral_norm());
        antisym_defect.push((&c_ab + &c_ba).spectral_norm());

        let b = symplectic_block(&c, alpha, alpha)?;
        let k = alpha.len();
        ortho_defect.push((&b.transpose().matmul(&b) - &Matrix::identity(2 * k)).spectral_norm());
        let form = SymplecticForm::new(k);
        sympl_defect.push((&form.form_product(&b, &b) - form.matrix().as_matrix()).spectral_norm());
    }

    Ok(PerturbationReport {
        offdiag,
        sym_defect,
        antisym_defect,
        ortho_defect,
        sympl_defect,
        h_norm: h.spectral_norm(),
        h_norm_frobenius: h.frobenius_norm(),
    })
}

/// Aligns `S~` to `S` by a symplectic-block-diagonal orthosymplectic `Q`.
///
/// Per cluster, the columns of `C_{alpha_i alpha_i} + i C_{alpha_i beta_i}`
/// are orthonormalized (complex Gram-Schmidt, index order, one
/// re-orthogonalization pass) into a unitary `U + iV`, which maps to the
/// orthosymplectic block `[[U, V], [-V, U]]`. The blocks combine by
/// symplectic direct sum; off-diagonal blocks of `Q` are exactly zero.
pub fn align_orthosymplectic(
    s: &SquareMatrix,
    s_tilde: &SquareMatrix,
    clusters: &ClusterStructure,
) -> Result<AlignmentResult> {
    check_inputs("align_orthosymplectic", s, s_tilde, clusters)?;
    let c = transition(s, s_tilde)?;

    let mut blocks = Vec::with_capacity(clusters.r());
    for i in 0..clusters.r() {
        let alpha = &clusters.alphas()[i];
        let beta = &clusters.betas()[i];
        let re = c.submatrix(alpha, alpha)?;
        let im = c.submatrix(alpha, beta)?;
        let (u, v) = complex_gram_schmidt(&re, &im, 1e-12, |col| {
            Error::DegenerateInput(format!(
                "Gram-Schmidt column {} of cluster {} vanished; the perturbation is far outside \
                 the alignment regime",
                col + 1,
                i + 1
            ))
        })?;
        let k = alpha.len();
        let q_i = Matrix::from_fn(2 * k, 2 * k, |r_, c_| match (r_ < k, c_ < k) {
            (true, true) => u[(r_, c_)],
            (true, false) => v[(r_, c_ - k)],
            (false, true) => -v[(r_ - k, c_)],
            (false, false) => u[(r_ - k, c_ - k)],
        });
        blocks.push(SquareMatrix::from_matrix(q_i)?);
    }

    let block_mats: Vec<Matrix> = blocks.iter().map(|b| b.as_matrix().clone()).collect();
    let q = SquareMatrix::from_matrix(symplectic_direct_sum_all(&block_mats)?)?;
    let residual = (s_tilde.as_matrix() - &s.matmul(&q)).spectral_norm();
    Ok(AlignmentResult {
        q,
        blocks,
        residual,
    })
}

/// Given any diagonalizer `m` of `a` and any diagonalizer `s_tilde` of a
/// perturbed matrix, returns the diagonalizer `m * Q` of `a` that is within
/// the alignment residual of `s_tilde`.
pub fn nearest_diagonalizer(
    a: &SquareMatrix,
    m: &SquareMatrix,
    s_tilde: &SquareMatrix,
    clusters: &ClusterStructure,
) -> Result<SquareMatrix> {
    let n = clusters.n();
    let a_norm = a.spectral_norm();
    let tol = 1e-8 * a_norm * n as f64;
    let ideal = ideal_diag(clusters);
    let m_residual = (&m.transpose().matmul(a.as_matrix()).matmul(m) - &ideal).spectral_norm();
    if m_residual > tol {
        return Err(Error::Domain(format!(
            "M does not diagonalize A: residual {m_residual:.3e} exceeds {tol:.3e}"
        )));
    }
    let alignment = align_orthosymplectic(m, s_tilde, clusters)?;
    let s = SquareMatrix::from_matrix(m.matmul(&alignment.q))?;
    let s_residual = (&s.transpose().matmul(a.as_matrix()).matmul(&s) - &ideal).spectral_norm();
    if s_residual > tol {
        return Err(Error::Numeric(format!(
            "aligned diagonalizer drifted off the fiber: residual {s_residual:.3e} exceeds {tol:.3e}"
        )));
    }
    Ok(s)
}

fn ideal_diag(clusters: &ClusterStructure) -> Matrix {
    let d = clusters.representative_spectrum();
    Matrix::from_diagonal(&[d.as_slice(), d.as_slice()].concat())
}

/// Elementary SR decomposition of a two-column frame `W = [u, v]`:
/// `R = [[1, 0], [0, u^T J v]]` and `S = W R^{-1}`, which satisfies
/// `S^T J S = J_2` whenever the pivot is nonzero.
///
/// The isotropy test uses the pivot of the normalized columns so that column
/// scaling cannot mask a genuinely isotropic plane.
pub fn esr(w: &Matrix) -> Result<(Matrix, Matrix)> {
    if w.cols() != 2 || !w.rows().is_multiple_of(2) || w.rows() == 0 {
        return Err(Error::Domain(format!(
            "ESR expects a 2n x 2 frame, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    let form = SymplecticForm::new(w.rows() / 2);
    let u = w.column(0);
    let v = w.column(1);
    let pivot = form.pairing(&u, &v);
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 || (pivot / (nu * nv)).abs() <= ESR_ISO_TOL {
        return Err(Error::IsotropicRange(format!(
            "normalized pivot {:.3e} is below {ESR_ISO_TOL:.1e}",
            if nu == 0.0 || nv == 0.0 {
                0.0
            } else {
                pivot / (nu * nv)
            }
        )));
    }
    let r = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, pivot]])?;
    let mut s = w.clone();
    for i in 0..w.rows() {
        s[(i, 1)] /= pivot;
    }
    Ok((s, r))
}

/// Builds, for each cluster, the symplectic matrix `N_i` that the diagonal
/// transition block `B = C_{gamma_i gamma_i}` approaches to second order.
///
/// The columns of `B` split into pairs `M_j = [col_j, col_{j+k}]`; each pair
/// is projected against the frame accumulated so far,
/// `W_{j+1} = M_{j+1} - F J_{2j}^T F^T J_{2k} M_{j+1}`, normalized by an
/// elementary SR step, and appended by symplectic concatenation. The
/// projection guarantees `F^T J W = 0`, so the growing frame stays symplectic
/// independent of `||H||`.
pub fn symplectic_correction(
    s: &SquareMatrix,
    s_tilde: &SquareMatrix,
    clusters: &ClusterStructure,
) -> Result<CorrectionResult> {
    check_inputs("symplectic_correction", s, s_tilde, clusters)?;
    let c = transition(s, s_tilde)?;

    let mut blocks = Vec::with_capacity(clusters.r());
    let mut residuals = Vec::with_capacity(clusters.r());
    for i in 0..clusters.r() {
        let alpha = &clusters.alphas()[i];
        let k = alpha.len();
        let b = symplectic_block(&c, alpha, alpha)?;
        let ambient = SymplecticForm::new(k);

        let mut frame = Matrix::zeros(2 * k, 0);
        for j in 0..k {
            let m_j = Matrix::from_fn(
                2 * k,
                2,
                |r_, c_| {
                    if c_ == 0 {
                        b[(r_, j)]
                    } else {
                        b[(r_, k + j)]
                    }
                },
            );
            let partial = SymplecticForm::new(frame.cols() / 2);
            // W = M - F J^T F^T J M; the empty frame contributes nothing
            let f_jt = partial.right_apply(&frame).scale(-1.0);
            let ftjm = ambient.form_product(&frame, &m_j);
            let w = &m_j - &f_jt.matmul(&ftjm);
            let (s_j, _r_j) = esr(&w).map_err(|e| match e {
                Error::IsotropicRange(msg) => Error::IsotropicRange(format!(
                    "cluster {}, step {}: {msg} (perturbation outside the correction regime)",
                    i + 1,
                    j + 1
                )),
                other => other,
            })?;
            frame = symplectic_concat(&frame, &s_j)?;
        }
        residuals.push((&b - &frame).spectral_norm());
        blocks.push(SquareMatrix::from_matrix(frame)?);
    }
    Ok(CorrectionResult { blocks, residuals })
}

/// Metric names recorded by [`scaling_study`], in output order.
pub const METRIC_NAMES: [&str; 8] = [
    "offdiag_max",
    "sym_defect_max",
    "antisym_defect_max",
    "ortho_defect_max",
    "sympl_defect_max",
    "align_residual",
    "correction_residual_max",
    "spectrum_drift",
];

/// Echo of the inputs that produced a [`ScalingStudy`].
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub spectrum: Vec<f64>,
    pub seed: u64,
    pub conditioning: f64,
    pub drop_below: f64,
}

/// Residual curves over a sweep of perturbation scales plus fitted log-log
/// slopes. Curves are indexed by [`METRIC_NAMES`]; a `None` slope means too
/// few points survived the round-off floor filter.
#[derive(Debug, Clone)]
pub struct ScalingStudy {
    pub ts: Vec<f64>,
    pub dropped_ts: Vec<f64>,
    pub curves: BTreeMap<String, Vec<f64>>,
    pub slopes: BTreeMap<String, Option<LineFit>>,
    pub config: StudyConfig,
}

struct StudyRow {
    t: f64,
    metrics: [f64; 8],
}

fn study_rows(
    a: &SquareMatrix,
    s_true: &SquareMatrix,
    h: &SquareMatrix,
    clusters: &ClusterStructure,
    d_base: &[f64],
    ts: &[f64],
) -> Result<(Vec<StudyRow>, Vec<f64>)> {
    let evaluated: Vec<Result<Option<StudyRow>>> = ts
        .par_iter()
        .map(|&t| {
            let h_t = SquareMatrix::from_matrix(h.scale(t))?;
            let a_t = SquareMatrix::from_matrix(a.as_matrix() + h_t.as_matrix())?;
            let decomposed = match williamson_decompose(&a_t, clusters.tolerance()) {
                Ok(w) => w,
                Err(Error::NotPositiveDefinite(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let report = perturbation_report(a, &h_t, s_true, &decomposed.s, clusters)?;
            let alignment = align_orthosymplectic(s_true, &decomposed.s, clusters)?;
            let correction = symplectic_correction(s_true, &decomposed.s, clusters)?;
            let drift = decomposed
                .d
                .iter()
                .zip(d_base)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            Ok(Some(StudyRow {
                t,
                metrics: [
                    report.offdiag_max(),
                    report.sym_defect_max(),
                    report.antisym_defect_max(),
                    report.ortho_defect_max(),
                    report.sympl_defect_max(),
                    alignment.residual,
                    correction.residual_max(),
                    drift,
                ],
            }))
        })
        .collect();

    let mut rows = Vec::with_capacity(ts.len());
    let mut dropped = Vec::new();
    for (row, &t) in evaluated.into_iter().zip(ts) {
        match row? {
            Some(r) => rows.push(r),
            None => dropped.push(t),
        }
    }
    Ok((rows, dropped))
}

fn assemble_study(
    rows: Vec<StudyRow>,
    dropped_ts: Vec<f64>,
    config: StudyConfig,
) -> Result<ScalingStudy> {
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} perturbation scales kept A + tH positive definite; need at least 3",
            rows.len()
        )));
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mut curves = BTreeMap::new();
    let mut slopes = BTreeMap::new();
    for (m, name) in METRIC_NAMES.iter().enumerate() {
        let ys: Vec<f64> = rows.iter().map(|r| r.metrics[m]).collect();
        let fit = fit_loglog_slope(&ts, &ys, config.drop_below).ok();
        curves.insert(name.to_string(), ys);
        slopes.insert(name.to_string(), fit);
    }
    Ok(ScalingStudy {
        ts,
        dropped_ts,
        curves,
        slopes,
        config,
    })
}

/// Sweep driver with explicit instance matrices; [`scaling_study`] is the
/// seeded front end. `ts` must be positive ascending.
pub fn scaling_study_with(
    a: &SquareMatrix,
    s_true: &SquareMatrix,
    h: &SquareMatrix,
    ts: &[f64],
    config: StudyConfig,
) -> Result<ScalingStudy> {
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 perturbation scales, got {}",
            ts.len()
        )));
    }
    if ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "perturbation scales must be positive and ascending".into(),
        ));
    }
    let base = williamson_decompose(a, DEFAULT_CLUSTER_TOL)?;
    let (rows, dropped) = study_rows(a, s_true, h, &base.clusters, &base.d, ts)?;
    assemble_study(rows, dropped, config)
}

/// The `(A, S, H)` triple a seeded [`scaling_study`] sweeps over: a random
/// instance with the given spectrum (sorted ascending) plus a unit-norm
/// symmetric perturbation direction, both derived deterministically from
/// `seed`.
pub fn study_instance(
    spectrum: &[f64],
    seed: u64,
    conditioning: f64,
) -> Result<(SquareMatrix, SquareMatrix, SquareMatrix)> {
    if spectrum.is_empty() {
        return Err(Error::Domain("spectrum must be nonempty".into()));
    }
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).ok_or(()).expect("finite spectrum entries"));

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let instance_seed: u64 = rng.random();
    let h_seed: u64 = rng.random();

    let spec = InstanceSpec {
        n: sorted.len(),
        spectrum: sorted,
        seed: instance_seed,
        conditioning,
    };
    let (a, s_true) = make_instance(&spec)?;
    let h = random_symmetric(a.dim(), h_seed);
    Ok((a, s_true, h))
}

/// Runs a full residual scaling sweep for a seeded random instance with the
/// given target spectrum.
///
/// The spectrum is sorted ascending; the instance generator, the perturbation
/// direction, and therefore the whole study are deterministic in `seed`.
pub fn scaling_study(
    spectrum: &[f64],
    seed: u64,
    ts: &[f64],
    conditioning: f64,
    drop_below: f64,
) -> Result<ScalingStudy> {
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).ok_or(()).expect("finite spectrum entries"));
    let (a, s_true, h) = study_instance(&sorted, seed, conditioning)?;
    let config = StudyConfig {
        spectrum: sorted,
        seed,
        conditioning,
        drop_below,
    };
    scaling_study_with(&a, &s_true, &h, ts, config)
}

/// Log-spaced perturbation scales from `t_min` to `t_max` inclusive.
pub fn logspace(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::Domain(format!(
            "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::Domain("need at least 2 points".into()));
    }
    let (lo, hi) = (t_min.log10(), t_max.log10());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| 10f64.powf(lo + step * k as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockops::{is_orthosymplectic, orthosymplectic_from_unitary};
    use crate::numerics::{random_unitary, DEFAULT_DROP_BELOW};

    fn instance(spectrum: &[f64], seed: u64) -> (SquareMatrix, SquareMatrix, ClusterStructure) {
        let spec = InstanceSpec {
            n: spectrum.len(),
            spectrum: spectrum.to_vec(),
            seed,
            conditioning: 3.0,
        };
        let (a, g) = make_instance(&spec).unwrap();
        let clusters = williamson_decompose(&a, DEFAULT_CLUSTER_TOL)
            .unwrap()
            .clusters;
        (a, g, clusters)
    }

    fn block_diag_orthosymplectic(clusters: &ClusterStructure, seed: u64) -> SquareMatrix {
        let blocks: Vec<Matrix> = (0..clusters.r())
            .map(|i| {
                let u = random_unitary(clusters.size(i), seed + i as u64);
                orthosymplectic_from_unitary(&u).unwrap().into_matrix()
            })
            .collect();
        SquareMatrix::from_matrix(symplectic_direct_sum_all(&blocks).unwrap()).unwrap()
    }

    #[test]
    fn zero_perturbation_report_is_clean() {
        let (a, g, clusters) = instance(&[1.0, 1.0, 2.0], 4);
        let h = SquareMatrix::new(6, vec![0.0; 36]).unwrap();
        let report = perturbation_report(&a, &h, &g, &g, &clusters).unwrap();
        assert_eq!(report.h_norm, 0.0);
        assert!(report.offdiag_max() < 1e-14);
        assert!(report.ortho_defect_max() < 1e-13);
        assert!(report.sympl_defect_max() < 1e-13);
        assert!(report.sym_defect_max() < 1e-13);
        assert!(report.antisym_defect_max() < 1e-13);
    }

    #[test]
    fn block_rotated_diagonalizer_reports_clean() {
        // S~ = S Q for block-diagonal orthosymplectic Q stays on the fiber
        let (a, g, clusters) = instance(&[1.0, 1.0, 2.0], 8);
        let q = block_diag_orthosymplectic(&clusters, 31);
        let s_tilde = SquareMatrix::from_matrix(g.matmul(&q)).unwrap();
        let h = SquareMatrix::new(6, vec![0.0; 36]).unwrap();
        let report = perturbation_report(&a, &h, &g, &s_tilde, &clusters).unwrap();
        assert!(report.offdiag_max() < 1e-12);
        assert!(report.ortho_defect_max() < 1e-12);
        assert!(report.sym_defect_max() < 1e-12);
        assert!(report.antisym_defect_max() < 1e-12);
    }

    #[test]
    fn offdiag_invariant_under_block_orthosymplectic_factors() {
        let (a, g, clusters) = instance(&[1.0, 1.0, 2.0], 14);
        let h = random_symmetric(6, 5);
        let h_t = SquareMatrix::from_matrix(h.scale(1e-3)).unwrap();
        let a_t = SquareMatrix::from_matrix(a.as_matrix() + h_t.as_matrix()).unwrap();
        let s_tilde = williamson_decompose(&a_t, DEFAULT_CLUSTER_TOL).unwrap().s;

        let base = perturbation_report(&a, &h_t, &g, &s_tilde, &clusters).unwrap();

        let q0 = block_diag_orthosymplectic(&clusters, 100);
        let q1 = block_diag_orthosymplectic(&clusters, 200);
        let s_rot = SquareMatrix::from_matrix(g.matmul(&q0)).unwrap();
        let st_rot = SquareMatrix::from_matrix(s_tilde.matmul(&q1)).unwrap();
        let rotated = perturbation_report(&a, &h_t, &s_rot, &st_rot, &clusters).unwrap();

        for (k, v) in &base.offdiag {
            let w = rotated.offdiag[k];
            assert!((v - w).abs() < 1e-10, "pair {k:?}: {v} vs {w}");
        }
    }

    #[test]
    fn alignment_identity_and_orthosymplectic_recovery() {
        let (_a, g, clusters) = instance(&[1.0, 2.0, 2.0], 2);
        let same = align_orthosymplectic(&g, &g, &clusters).unwrap();
        assert!(same.residual < 1e-12);
        assert!((same.q.as_matrix() - &Matrix::identity(6)).spectral_norm() < 1e-12);

        // single cluster: S = I, S~ = any orthosymplectic G is recovered exactly
        let id = SquareMatrix::identity(8);
        let clusters_id = williamson_decompose(&id, DEFAULT_CLUSTER_TOL)
            .unwrap()
            .clusters;
        let q_true = orthosymplectic_from_unitary(&random_unitary(4, 17)).unwrap();
        let alignment = align_orthosymplectic(&id, &q_true, &clusters_id).unwrap();
        assert!(alignment.residual < 1e-10);
        assert!((alignment.q.as_matrix() - q_true.as_matrix()).spectral_norm() < 1e-10);
    }

    #[test]
    fn alignment_q_structure() {
        let (a, g, clusters) = instance(&[1.0, 1.0, 3.0], 6);
        let h = random_symmetric(6, 9);
        let a_t = SquareMatrix::from_matrix(a.as_matrix() + &h.scale(1e-2)).unwrap();
        let s_tilde = williamson_decompose(&a_t, DEFAULT_CLUSTER_TOL).unwrap().s;
        let alignment = align_orthosymplectic(&g, &s_tilde, &clusters).unwrap();

        // Q reassembles exactly from its blocks and off-diagonal blocks vanish
        let mats: Vec<Matrix> = alignment
            .blocks
            .iter()
            .map(|b| b.as_matrix().clone())
            .collect();
        assert_eq!(
            symplectic_direct_sum_all(&mats).unwrap(),
            *alignment.q.as_matrix()
        );
        for i in 0..clusters.r() {
            for j in 0..clusters.r() {
                if i != j {
                    let block = symplectic_block(
                        alignment.q.as_matrix(),
                        &clusters.alphas()[i],
                        &clusters.alphas()[j],
                    )
                    .unwrap();
                    assert_eq!(block.max_abs(), 0.0);
                }
            }
        }
        for b in &alignment.blocks {
            assert!(is_orthosymplectic(b, 1e-9 * 3.0).unwrap().pass);
        }
    }

    #[test]
    fn nearest_diagonalizer_fixed_points() {
        let (a, g, clusters) = instance(&[1.0, 1.0, 2.0], 12);
        let back = nearest_diagonalizer(&a, &g, &g, &clusters).unwrap();
        assert!((back.as_matrix() - g.as_matrix()).spectral_norm() < 1e-12);

        let q0 = block_diag_orthosymplectic(&clusters, 55);
        let s_tilde = SquareMatrix::from_matrix(g.matmul(&q0)).unwrap();
        let s = nearest_diagonalizer(&a, &g, &s_tilde, &clusters).unwrap();
        assert!((s.as_matrix() - s_tilde.as_matrix()).spectral_norm() < 1e-10);

        // a non-diagonalizer is rejected
        let wrong = SquareMatrix::from_matrix(g.scale(2.0)).unwrap();
        assert!(nearest_diagonalizer(&a, &wrong, &g, &clusters).is_err());
    }

    #[test]
    fn esr_examples() {
        let e = Matrix::identity(4);
        // u = e1, v = 2 e3: pivot 2
        let w = Matrix::from_fn(4, 2, |i, j| match j {
            0 => e[(i, 0)],
            _ => 2.0 * e[(i, 2)],
        });
        let (s, r) = esr(&w).unwrap();
        assert_eq!(r, Matrix::from_diagonal(&[1.0, 2.0]));
        assert_eq!(s.column(0), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.column(1), vec![0.0, 0.0, 1.0, 0.0]);
        assert!(is_symplectic(&s, 1e-10).unwrap().pass);

        // already normalized: R = I
        let w = Matrix::from_fn(4, 2, |i, j| e[(i, 2 * j)]);
        let (s, r) = esr(&w).unwrap();
        assert_eq!(r, Matrix::identity(2));
        assert_eq!(s, w);

        // isotropic plane: u = e1, v = e2
        let w = Matrix::from_fn(4, 2, |i, j| e[(i, j)]);
        assert!(matches!(esr(&w), Err(Error::IsotropicRange(_))));
    }

    #[test]
    fn correction_fixed_points() {
        let (a, g, clusters) = instance(&[1.0, 1.0, 2.0], 19);
        let same = symplectic_correction(&g, &g, &clusters).unwrap();
        for (i, b) in same.blocks.iter().enumerate() {
            let k = clusters.size(i);
            assert!((b.as_matrix() - &Matrix::identity(2 * k)).spectral_norm() < 1e-12);
        }
        assert!(same.residual_max() < 1e-12);

        // already-symplectic blocks are reproduced: the projections annihilate
        let q0 = block_diag_orthosymplectic(&clusters, 77);
        let s_tilde = SquareMatrix::from_matrix(g.matmul(&q0)).unwrap();
        let corr = symplectic_correction(&g, &s_tilde, &clusters).unwrap();
        assert!(
            corr.residual_max() < 1e-10,
            "max {:.3e}",
            corr.residual_max()
        );
        let _ = a;
    }

    #[test]
    fn zero_perturbation_study_reports_unfit_slopes() {
        let (a, g, _clusters) = instance(&[1.0, 1.0, 2.0], 23);
        let h = SquareMatrix::new(6, vec![0.0; 36]).unwrap();
        let ts = logspace(1e-8, 1e-6, 5).unwrap();
        let config = StudyConfig {
            spectrum: vec![1.0, 1.0, 2.0],
            seed: 0,
            conditioning: 3.0,
            drop_below: DEFAULT_DROP_BELOW,
        };
        let study = scaling_study_with(&a, &g, &h, &ts, config).unwrap();
        assert_eq!(study.ts.len(), 5);
        for name in METRIC_NAMES {
            assert!(study.slopes[name].is_none(), "{name} should be unfit");
            assert!(study.curves[name].iter().all(|&y| y <= DEFAULT_DROP_BELOW));
        }
    }

    #[test]
    fn study_validates_inputs() {
        assert!(matches!(
            scaling_study(&[1.0, 2.0], 1, &[1e-3, 1e-2], 2.0, DEFAULT_DROP_BELOW),
            Err(Error::InsufficientData(_))
        ));
        assert!(scaling_study(&[1.0], 1, &[1e-2, 1e-3, 1e-1], 2.0, DEFAULT_DROP_BELOW).is_err());
        assert!(scaling_study(&[-1.0], 1, &[1e-3, 1e-2, 1e-1], 2.0, DEFAULT_DROP_BELOW).is_err());
    }

    #[test]
    fn logspace_endpoints() {
        let ts = logspace(1e-6, 1e-2, 9).unwrap();
        assert_eq!(ts.len(), 9);
        assert!((ts[0] - 1e-6).abs() < 1e-18);
        assert!((ts[8] - 1e-2).abs() < 1e-14);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(logspace(1e-2, 1e-6, 5).is_err());
    }
}
