//! Dense complex matrix arithmetic, Hermitian spectral decomposition, and
//! the C*-norm machinery.

mod eig;
mod matrix;
mod ops;

pub use eig::{eig_hermitian, eig_hermitian_default, SpectralDecomposition};
pub use matrix::{parse_complex_vector, ComplexMatrix};
pub use ops::{commutator, cstar_norm, unitary_conjugate_exp};
