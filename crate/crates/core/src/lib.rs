//! Finite-dimensional operator algebras with contextual valuations.
//!
//! The crate models observables as Hermitian complex matrices and builds,
//! on top of them:
//!
//! - measurement contexts (maximal commutative subalgebras represented by
//!   orthonormal frames of rank-1 projectors),
//! - physical-state valuations: per-context real homomorphisms, possibly
//!   multivalued across contexts, with a Kochen–Specker obstruction search,
//! - quantum states as seeded Born-rule ensembles of physical states whose
//!   sample means reproduce trace expectation values,
//! - Heisenberg time evolution, infinite-time averages, and compression
//!   functionals,
//! - the GNS construction of a Hilbert-space representation from a state
//!   functional.
//!
//! All operations are deterministic: randomness comes from counter-based
//! streams keyed by explicit seeds.

pub mod contexts;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod gns;
pub mod matalg;
pub mod rng;
pub mod tol;
pub mod valuation;

pub use error::{Error, Result};
pub use matalg::{
    commutator, cstar_norm, eig_hermitian, eig_hermitian_default, unitary_conjugate_exp,
    ComplexMatrix, SpectralDecomposition,
};
