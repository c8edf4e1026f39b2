//! Williamson diagonalization of positive definite matrices and the block
//! perturbation analysis of the symplectic matrices it produces.
//!
//! Every positive definite `2n x 2n` matrix `A` admits a symplectic `S` with
//! `S^T A S = D (+) D`; the diagonal of `D` holds the symplectic eigenvalues.
//! When `A` is perturbed to `A + H`, any diagonalizer of the perturbed matrix
//! factors through `S` times a symplectic-block-diagonal orthosymplectic
//! matrix, up to `O(||H||)`, with block sizes given by the eigenvalue
//! multiplicities — and the diagonal transition blocks sit within
//! `O(||H||^2)` of the symplectic group. The crate provides:
//!
//! - [`williamson`]: the decomposition itself, an independent spectrum
//!   oracle, and seeded random instance generators;
//! - [`blockops`]: symplectic blocks, the symplectic direct sum, frame
//!   concatenation, and the (ortho)symplecticity predicates;
//! - [`perturb`]: block residual reports, orthosymplectic alignment, the
//!   nearest diagonalizer, the SR-based symplectic correction, and sweep
//!   drivers that measure the first- and second-order residual rates;
//! - [`matrix`], [`cluster`], [`numerics`]: the dense kernels underneath.

pub mod blockops;
pub mod cluster;
pub mod error;
pub mod matrix;
pub mod numerics;
pub mod perturb;
pub mod williamson;

pub use blockops::{
    concat_compatibility, default_predicate_tol, is_orthosymplectic, is_symplectic,
    orthosymplectic_from_unitary, symplectic_block, symplectic_concat, symplectic_diagonal_block,
    symplectic_direct_sum, symplectic_direct_sum_all, symplectic_inverse, OrthosymplecticCheck,
    SymplecticCheck,
};
pub use cluster::{build_clusters, ClusterStructure, DEFAULT_CLUSTER_TOL};
pub use error::{Error, Result};
pub use matrix::{IndexSet, Matrix, SquareMatrix, SymplecticForm};
pub use numerics::{
    fit_loglog_slope, pd_power, random_unitary, sym_eigen, ComplexPair, LineFit, SymmetricEigen,
    DEFAULT_DROP_BELOW,
};
pub use perturb::{
    align_orthosymplectic, esr, logspace, nearest_diagonalizer, perturbation_report, scaling_study,
    scaling_study_with, study_instance, symplectic_correction, AlignmentResult, CorrectionResult,
    PerturbationReport, ScalingStudy, StudyConfig, ESR_ISO_TOL, METRIC_NAMES,
};
pub use williamson::{
    make_instance, random_symmetric, random_symplectic, symplectic_spectrum_oracle,
    williamson_decompose, InstanceSpec, WilliamsonResult, MAX_CONDITION,
};
