//! Shared helpers for the integration suites.
#![allow(dead_code)] // each suite uses a different subset

use num_complex::Complex64;
use opalg::rng::Stream;
use opalg::ComplexMatrix;

pub fn random_matrix(stream: &mut Stream, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        Complex64::new(stream.next_in(-1.0, 1.0), stream.next_in(-1.0, 1.0))
    })
    .unwrap()
}

pub fn random_hermitian(stream: &mut Stream, dim: usize) -> ComplexMatrix {
    let raw = random_matrix(stream, dim);
    (&raw + &raw.adjoint()).scale_re(0.5)
}

/// A random Hermitian matrix whose spectrum is nondegenerate under the
/// default clustering tolerance; regenerates until that holds.
pub fn random_nondegenerate_hermitian(stream: &mut Stream, dim: usize) -> ComplexMatrix {
    loop {
        let a = random_hermitian(stream, dim);
        if let Ok(sd) = opalg::eig_hermitian_default(&a) {
            if sd.len() == dim {
                return a;
            }
        }
    }
}

/// Characteristic polynomial coefficients `[c_1, …, c_n]` of
/// `λ^n + c_1 λ^{n−1} + … + c_n` via the Faddeev–LeVerrier recurrence.
pub fn charpoly(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.dim();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = a.clone();
    for k in 1..=n {
        let c = -m.trace() / Complex64::new(k as f64, 0.0);
        coeffs.push(c);
        if k < n {
            let shifted = &m + &ComplexMatrix::identity(n).scale(c);
            m = a * &shifted;
        }
    }
    coeffs
}
