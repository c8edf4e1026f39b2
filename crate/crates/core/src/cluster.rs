//! Clustering of a symplectic spectrum into groups of equal eigenvalues.
//!
//! A spectrum `d_1 <= ... <= d_n` splits into clusters of (numerically) equal
//! values `mu_1 < ... < mu_r`. Cluster `i` owns three 1-based index sets:
//! `alpha_i` (positions in the first half), `beta_i = alpha_i + n`, and
//! `gamma_i = alpha_i ∪ beta_i`. All block extraction downstream is driven by
//! these sets.

use crate::error::{Error, Result};
use crate::matrix::IndexSet;

/// Default relative tolerance for deciding that two consecutive spectrum
/// entries belong to the same cluster. Solver output carries round-off noise
/// on the order of machine epsilon times the conditioning, so exact equality
/// is the wrong test.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Distinct symplectic eigenvalues of a spectrum together with their index
/// sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStructure {
    n: usize,
    mus: Vec<f64>,
    alphas: Vec<IndexSet>,
    betas: Vec<IndexSet>,
    gammas: Vec<IndexSet>,
    tolerance: f64,
}

impl ClusterStructure {
    /// Half-dimension `n` (the spectrum length).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct clusters `r`.
    pub fn r(&self) -> usize {
        self.mus.len()
    }

    /// Ascending distinct cluster values.
    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn alphas(&self) -> &[IndexSet] {
        &self.alphas
    }

    pub fn betas(&self) -> &[IndexSet] {
        &self.betas
    }

    pub fn gammas(&self) -> &[IndexSet] {
        &self.gammas
    }

    /// `|alpha_i|` for the 0-based cluster position `i`.
    pub fn size(&self, i: usize) -> usize {
        self.alphas[i].len()
    }

    /// The idealized spectrum with each entry replaced by its cluster value.
    pub fn representative_spectrum(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, alpha) in self.alphas.iter().enumerate() {
            for j in alpha.iter() {
                d[j - 1] = self.mus[i];
            }
        }
        d
    }
}

/// Groups an ascending positive spectrum into clusters.
///
/// Consecutive entries `d <= d'` land in one cluster iff
/// `d' - d <= rel_tol * max(d, 1)` (single linkage on consecutive gaps);
/// each `mu_i` is the mean of its cluster members.
pub fn build_clusters(spectrum: &[f64], rel_tol: f64) -> Result<ClusterStructure> {
    if spectrum.is_empty() {
        return Err(Error::Domain("spectrum must be nonempty".into()));
    }
    if !rel_tol.is_finite() || rel_tol < 0.0 {
        return Err(Error::Domain(format!(
            "rel_tol must be nonnegative, got {rel_tol}"
        )));
    }
    if spectrum.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Domain(
            "spectrum entries must be finite and positive".into(),
        ));
    }
    if spectrum.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("spectrum must be sorted ascending".into()));
    }

    let n = spectrum.len();
    let mut boundaries = vec![0usize];
    for k in 1..n {
        let prev = spectrum[k - 1];
        if spectrum[k] - prev > rel_tol * prev.max(1.0) {
            boundaries.push(k);
        }
    }
    boundaries.push(n);

    let mut mus = Vec::with_capacity(boundaries.len() - 1);
    let mut alphas = Vec::with_capacity(boundaries.len() - 1);
    let mut betas = Vec::with_capacity(boundaries.len() - 1);
    let mut gammas = Vec::with_capacity(boundaries.len() - 1);
    for w in boundaries.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let members = &spectrum[lo..hi];
        mus.push(members.iter().sum::<f64>() / members.len() as f64);
        let alpha = IndexSet::from_range(lo + 1, hi);
        let beta = alpha.shifted(n);
        let gamma = alpha.concat_above(&beta)?;
        alphas.push(alpha);
        betas.push(beta);
        gammas.push(gamma);
    }

    Ok(ClusterStructure {
        n,
        mus,
        alphas,
        betas,
        gammas,
        tolerance: rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(sets: &[IndexSet]) -> Vec<Vec<usize>> {
        sets.iter().map(|s| s.as_slice().to_vec()).collect()
    }

    #[test]
    fn ten_eigenvalue_worked_example() {
        let spectrum = [1.0, 1.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 5.0];
        let c = build_clusters(&spectrum, 1e-8).unwrap();
        assert_eq!(c.r(), 5);
        assert_eq!(c.mus(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(
            sets(c.alphas()),
            vec![vec![1, 2], vec![3], vec![4, 5, 6], vec![7, 8, 9], vec![10]]
        );
        assert_eq!(
            sets(c.betas()),
            vec![
                vec![11, 12],
                vec![13],
                vec![14, 15, 16],
                vec![17, 18, 19],
                vec![20]
            ]
        );
        assert_eq!(
            sets(c.gammas()),
            vec![
                vec![1, 2, 11, 12],
                vec![3, 13],
                vec![4, 5, 6, 14, 15, 16],
                vec![7, 8, 9, 17, 18, 19],
                vec![10, 20]
            ]
        );
    }

    #[test]
    fn single_eigenvalue() {
        let c = build_clusters(&[1.0], 0.0).unwrap();
        assert_eq!(c.r(), 1);
        assert_eq!(sets(c.alphas()), vec![vec![1]]);
        assert_eq!(sets(c.betas()), vec![vec![2]]);
        assert_eq!(sets(c.gammas()), vec![vec![1, 2]]);
    }

    #[test]
    fn near_tie_merges_wide_gap_splits() {
        let c = build_clusters(&[1.0, 1.0 + 1e-12, 5.0], 1e-8).unwrap();
        assert_eq!(c.r(), 2);
        assert_eq!(sets(c.alphas()), vec![vec![1, 2], vec![3]]);
        assert!((c.mus()[0] - (1.0 + 5e-13)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(build_clusters(&[], 1e-8).is_err());
        assert!(build_clusters(&[2.0, 1.0], 1e-8).is_err());
        assert!(build_clusters(&[0.0, 1.0], 1e-8).is_err());
        assert!(build_clusters(&[-1.0], 1e-8).is_err());
        assert!(build_clusters(&[1.0], -1.0).is_err());
    }

    #[test]
    fn alphas_partition_everything() {
        let spectrum = [0.5, 0.5, 0.5, 1.25, 2.0, 2.0, 7.5];
        let c = build_clusters(&spectrum, 1e-10).unwrap();
        let mut all: Vec<usize> = c.alphas().iter().flat_map(|a| a.iter()).collect();
        all.sort_unstable();
        assert_eq!(all, (1..=spectrum.len()).collect::<Vec<_>>());
        for (alpha, gamma) in c.alphas().iter().zip(c.gammas()) {
            assert_eq!(gamma.len(), 2 * alpha.len());
        }
        let total: usize = c.alphas().iter().map(|a| a.len()).sum();
        assert_eq!(total, c.n());
    }
}
