//! The Gelfand–Naimark–Segal construction: from a state functional on the
//! n×n matrix algebra to a Hilbert-space representation.
//!
//! Elements are expanded over the matrix-unit basis. The Gram matrix
//! `G_{ij} = Ψ(B_i* B_j)` defines the pre-inner product; directions below
//! the rank cutoff are the null space being quotiented away, and the
//! represented operator of `S` is left multiplication projected onto the
//! surviving quotient. Completion adds nothing in finite dimensions.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::ensemble::StateFunctional;
use crate::error::{Error, Result};
use crate::matalg::{cstar_norm, eig_hermitian_default, ComplexMatrix};
use crate::rng::Stream;
use crate::tol;

/// A finite-dimensional GNS representation.
#[derive(Debug, Clone)]
pub struct GnsRepresentation {
    source_dim: usize,
    rep_dim: usize,
    density: ComplexMatrix,
    /// Orthonormal coordinate frame of the quotient space: columns `e_a`
    /// in the coefficient space, satisfying `e_a† G e_b = δ_ab`.
    frame: Vec<Vec<Complex64>>,
    /// `w_a = G e_a`, so a class vector is `c(R)_a = w_a† vec(R)`.
    weights: Vec<Vec<Complex64>>,
    cyclic: Vec<Complex64>,
}

/// Builds the GNS representation of a state functional.
///
/// The Gram matrix over the matrix-unit basis is diagonalized; eigenvalues
/// below `EPS_NULL_FACTOR` times the largest one count as null directions
/// and are dropped (rank decisions near machine precision resolve toward
/// the null space).
pub fn gns_construct(state: &StateFunctional) -> Result<GnsRepresentation> {
    let n = state.dim();
    let density = state.density().clone();
    let nn = n * n;

    // G_{ij} = Ψ(B_i* B_j) over B_{kl} = E_{kl}, index i = k·n + l.
    let gram = ComplexMatrix::from_fn(nn, |i, j| {
        let (k1, l1) = (i / n, i % n);
        let (k2, l2) = (j / n, j % n);
        // E_{k1 l1}† E_{k2 l2} = δ_{k1 k2} E_{l1 l2}; Ψ(E_{l1 l2}) = ρ_{l2 l1}.
        if k1 == k2 {
            density.at(l2, l1)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;

    let sd = eig_hermitian_default(&gram).map_err(|e| Error::InvalidState {
        reason: format!("Gram spectrum: {e}"),
    })?;
    let cutoff = tol::EPS_NULL_FACTOR * sd.max_eigenvalue().max(0.0);

    // Split surviving clusters into individual directions and normalize in
    // the Gram inner product, using the Rayleigh quotient as the
    // per-vector eigenvalue.
    let mut frame: Vec<Vec<Complex64>> = Vec::new();
    for (lambda, proj) in sd.eigenvalues().iter().zip(sd.projectors()) {
        if *lambda <= cutoff {
            continue;
        }
        let rank = proj.trace().re.round() as usize;
        for v in orthonormal_range_basis(proj, rank) {
            let gv = gram.apply(&v);
            let rayleigh = dot(&v, &gv).re;
            let scale = Complex64::new(1.0 / rayleigh.sqrt(), 0.0);
            frame.push(v.iter().map(|z| z * scale).collect());
        }
    }

    // One Gram-metric MGS pass to clean residual non-orthonormality.
    for a in 0..frame.len() {
        for b in 0..a {
            let gb = gram.apply(&frame[b]);
            let overlap = dot(&gb, &frame[a]);
            let (fb, fa) = (frame[b].clone(), &mut frame[a]);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x -= overlap * y;
            }
        }
        let ga = gram.apply(&frame[a]);
        let norm = dot(&frame[a], &ga).re.sqrt();
        for x in frame[a].iter_mut() {
            *x /= Complex64::new(norm, 0.0);
        }
    }

    let rep_dim = frame.len();
    let weights: Vec<Vec<Complex64>> = frame.iter().map(|e| gram.apply(e)).collect();

    let identity_vec = vectorize(&ComplexMatrix::identity(n));
    let cyclic: Vec<Complex64> = weights.iter().map(|w| dot(w, &identity_vec)).collect();

    Ok(GnsRepresentation {
        source_dim: n,
        rep_dim,
        density,
        frame,
        weights,
        cyclic,
    })
}

impl GnsRepresentation {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    /// The class of the identity, `Φ(Î)`, in quotient coordinates.
    pub fn cyclic_vector(&self) -> &[Complex64] {
        &self.cyclic
    }

    /// The state, linearly extended to the whole algebra: `Ψ(R) = trace(ρR)`.
    pub fn state_value(&self, r: &ComplexMatrix) -> Complex64 {
        self.density.trace_product(r)
    }

    /// Quotient coordinates of the class `Φ(R)`.
    pub fn class_vector(&self, r: &ComplexMatrix) -> Result<Vec<Complex64>> {
        if r.dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                left: self.source_dim,
                right: r.dim(),
            });
        }
        let x = vectorize(r);
        Ok(self.weights.iter().map(|w| dot(w, &x)).collect())
    }

    /// The represented operator `Π(S)` acting on the quotient space:
    /// `Π(S) Φ(R) = Φ(SR)`.
    pub fn represent(&self, s: &ComplexMatrix) -> Result<ComplexMatrix> {
        if s.dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                left: self.source_dim,
                right: s.dim(),
            });
        }
        let n = self.source_dim;
        ComplexMatrix::from_fn(self.rep_dim, |a, b| {
            // Column b of L_S in coefficient space: vec(S · mat(e_b)).
            let m = matricize(&self.frame[b], n);
            let sm = s * &m;
            dot(&self.weights[a], &vectorize(&sm))
        })
    }

    /// `⟨Ω, Π(A) Ω⟩`, which reproduces the state on the algebra.
    pub fn cyclic_expectation(&self, a: &ComplexMatrix) -> Result<Complex64> {
        let pi = self.represent(a)?;
        let applied = pi.apply(&self.cyclic);
        Ok(dot(&self.cyclic, &applied))
    }

    /// Representation dump with the operators of a named observable list.
    pub fn dump(&self, observables: &[(String, ComplexMatrix)]) -> Result<serde_json::Value> {
        let mut ops = serde_json::Map::new();
        for (name, a) in observables {
            ops.insert(name.clone(), serde_json::to_value(self.represent(a)?).unwrap());
        }
        Ok(json!({
            "source_dim": self.source_dim,
            "rep_dim": self.rep_dim,
            "cyclic_vector": self.cyclic.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "operators": serde_json::Value::Object(ops),
        }))
    }
}

/// Residuals of the defining representation identities over random pairs.
#[derive(Debug, Clone, Serialize)]
pub struct GnsReport {
    pub trials: usize,
    pub max_inner_product_residual: f64,
    pub max_homomorphism_residual: f64,
    pub max_adjoint_residual: f64,
    pub unit_residual: f64,
    pub max_cyclic_residual: f64,
    pub max_contraction_excess: f64,
    pub pass: bool,
}

/// Samples random pairs `(R, S)` and reports the worst violation of each
/// representation invariant: the inner product reproducing `Ψ(R*S)`, the
/// *-homomorphism identities, `⟨Ω, Π(A)Ω⟩ = Ψ(A)`, and contractivity in
/// the spectral norm. Randomness is keyed by the state, so the report is
/// reproducible.
pub fn gns_verify(rep: &GnsRepresentation, trials: usize) -> GnsReport {
    let n = rep.source_dim;
    let mut stream = Stream::from_parts(&[b"gns-verify", rep.density.canonical_key().as_bytes()]);
    let random_matrix = |stream: &mut Stream| {
        ComplexMatrix::from_fn(n, |_, _| {
            Complex64::new(stream.next_in(-1.0, 1.0), stream.next_in(-1.0, 1.0))
        })
        .unwrap()
    };

    let identity_rep = rep.represent(&ComplexMatrix::identity(n)).unwrap();
    let unit_residual =
        (&identity_rep - &ComplexMatrix::identity(rep.rep_dim)).frobenius_norm();

    let mut max_inner: f64 = 0.0;
    let mut max_hom: f64 = 0.0;
    let mut max_adj: f64 = 0.0;
    let mut max_cyclic: f64 = 0.0;
    let mut max_contraction: f64 = 0.0;

    for _ in 0..trials {
        let r = random_matrix(&mut stream);
        let s = random_matrix(&mut stream);

        let cr = rep.class_vector(&r).unwrap();
        let cs = rep.class_vector(&s).unwrap();
        let inner: Complex64 = cr.iter().zip(&cs).map(|(x, y)| x.conj() * y).sum();
        let expected = rep.state_value(&(&r.adjoint() * &s));
        max_inner = max_inner.max((inner - expected).norm());

        let pi_r = rep.represent(&r).unwrap();
        let pi_s = rep.represent(&s).unwrap();
        let pi_rs = rep.represent(&(&r * &s)).unwrap();
        max_hom = max_hom.max((&pi_rs - &(&pi_r * &pi_s)).frobenius_norm());

        let pi_r_adj = rep.represent(&r.adjoint()).unwrap();
        max_adj = max_adj.max((&pi_r_adj - &pi_r.adjoint()).frobenius_norm());

        let a = (&r + &r.adjoint()).scale_re(0.5);
        let cyc = rep.cyclic_expectation(&a).unwrap();
        max_cyclic = max_cyclic.max((cyc - rep.state_value(&a)).norm());

        max_contraction = max_contraction.max(cstar_norm(&pi_r) - cstar_norm(&r));
    }

    let pass = max_inner <= 1e-10
        && max_hom <= 1e-9
        && max_adj <= 1e-9
        && unit_residual <= 1e-9
        && max_cyclic <= 1e-10
        && max_contraction <= 1e-9;

    GnsReport {
        trials,
        max_inner_product_residual: max_inner,
        max_homomorphism_residual: max_hom,
        max_adjoint_residual: max_adj,
        unit_residual,
        max_cyclic_residual: max_cyclic,
        max_contraction_excess: max_contraction,
        pass,
    }
}

fn vectorize(m: &ComplexMatrix) -> Vec<Complex64> {
    m.entries().to_vec()
}

fn matricize(v: &[Complex64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| v[i * n + j]).unwrap()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal basis of a projector's range via modified Gram-Schmidt on
/// its columns.
fn orthonormal_range_basis(p: &ComplexMatrix, rank: usize) -> Vec<Vec<Complex64>> {
    let n = p.dim();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for col in 0..n {
        if basis.len() == rank {
            break;
        }
        let mut v: Vec<Complex64> = (0..n).map(|r| p.at(r, col)).collect();
        for b in &basis {
            let overlap = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= overlap * y;
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in v.iter_mut() {
                *z /= Complex64::new(norm, 0.0);
            }
            basis.push(v);
        }
    }
    basis
}
