//! Numerical tolerances used across the crate.
//!
//! The algebraic identities implemented here are exact in real arithmetic;
//! these constants say how much floating-point slack each check is granted.

/// Hermiticity check: `‖A − A*‖_F ≤ TAU_HERM · max(1, ‖A‖_F)`.
pub const TAU_HERM: f64 = 1e-10;

/// Projector identities (idempotence, self-adjointness, orthogonality,
/// completeness) and frame validation.
pub const TAU_PROJ: f64 = 1e-9;

/// Spectral reconstruction `Σ λᵢ Pᵢ ≈ A` and valuation/spectrum residuals.
pub const TAU_EIG: f64 = 1e-9;

/// Overlap threshold `trace(P Q) > TAU_OVERLAP` in the context
/// intersection graph.
pub const TAU_OVERLAP: f64 = 1e-8;

/// Relative factor for the separation threshold between two observables:
/// `τ_sep = TAU_SEP_FACTOR · max(1, ‖A₁‖, ‖A₂‖)`.
pub const TAU_SEP_FACTOR: f64 = 1e-8;

/// Relative factor for the default eigenvalue clustering tolerance:
/// `tol_cluster = CLUSTER_FACTOR · max(1, ‖A‖_F)`.
pub const CLUSTER_FACTOR: f64 = 1e-8;

/// Gram-matrix rank cutoff in the GNS construction, relative to the
/// largest Gram eigenvalue. Near-null directions are dropped.
pub const EPS_NULL_FACTOR: f64 = 1e-10;

/// Default clustering tolerance for a matrix with Frobenius norm `norm`.
pub fn default_cluster_tol(norm: f64) -> f64 {
    CLUSTER_FACTOR * norm.max(1.0)
}
