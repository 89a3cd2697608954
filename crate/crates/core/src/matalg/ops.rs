//! Algebra operations on top of the matrix type: commutators, the
//! spectral-radius norm, and unitary conjugation by a matrix exponential.

use num_complex::Complex64;

use super::eig::eig_hermitian_default;
use super::matrix::ComplexMatrix;
use crate::error::Result;
use crate::tol;

/// `AB − BA`. Vanishes exactly when the observables are compatible.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// The spectral-radius norm `‖R‖ = sqrt(max σ(R*R))`, which makes the
/// matrix algebra a C*-algebra: `‖R*R‖ = ‖R‖²` and `‖R‖ = 0` iff `R = 0`.
pub fn cstar_norm(r: &ComplexMatrix) -> f64 {
    let gram = &r.adjoint() * r;
    let sd = eig_hermitian_default(&gram)
        .expect("R*R is Hermitian PSD; Jacobi converges on it");
    sd.max_eigenvalue().max(0.0).sqrt()
}

/// `exp(−iHt) · A · exp(+iHt)` for Hermitian `H`, built by exponentiating
/// the spectrum of `H`. The unitarity of the exponential is checked before
/// conjugating.
pub fn unitary_conjugate_exp(
    h: &ComplexMatrix,
    a: &ComplexMatrix,
    t: f64,
) -> Result<ComplexMatrix> {
    h.require_same_dim(a)?;
    h.require_hermitian(tol::TAU_HERM)?;
    let sd = eig_hermitian_default(h)?;
    let u = sd.map_complex(|e| Complex64::from_polar(1.0, -e * t));
    let unitarity = (&(&u * &u.adjoint()) - &ComplexMatrix::identity(h.dim())).frobenius_norm();
    assert!(
        unitarity <= tol::TAU_PROJ,
        "unitarity residual {unitarity:.2e}"
    );
    Ok(&(&u * a) * &u.adjoint())
}
