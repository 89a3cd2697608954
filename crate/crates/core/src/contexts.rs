//! Measurement contexts: maximal commutative subalgebras represented by
//! orthonormal frames, i.e. partitions of the identity into rank-1
//! projectors. A context is the algebraic type of a measuring device.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matalg::{commutator, eig_hermitian_default, ComplexMatrix};
use crate::tol;

/// A maximal commutative subalgebra, stored as its frame of rank-1
/// projectors in a canonical order.
///
/// The canonical key (and the frame order itself) is derived from the
/// projectors rounded to six decimals and sorted lexicographically, so it
/// does not depend on which generator produced the context, on the phase
/// of the underlying vectors, or on the order the projectors arrived in.
#[derive(Debug, Clone, Serialize)]
pub struct Context {
    dim: usize,
    frame: Vec<ComplexMatrix>,
    #[serde(skip)]
    canonical_key: String,
}

impl Context {
    /// Validates a partition of identity into rank-1 projectors and wraps
    /// it as a context. The frame is re-sorted into canonical order.
    pub fn new(frame: Vec<ComplexMatrix>) -> Result<Self> {
        if frame.is_empty() {
            return Err(Error::InvalidFrame {
                reason: "empty frame".into(),
            });
        }
        let dim = frame[0].dim();
        if frame.len() != dim {
            return Err(Error::InvalidFrame {
                reason: format!("{} projectors for dimension {dim}", frame.len()),
            });
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, p) in frame.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            let idem = (&(p * p) - p).frobenius_norm();
            let herm = p.hermiticity_residual();
            let tr = p.trace().re;
            if idem > tol::TAU_PROJ || herm > tol::TAU_PROJ || (tr - 1.0).abs() > tol::TAU_PROJ {
                return Err(Error::InvalidFrame {
                    reason: format!(
                        "member {i}: idempotence {idem:.2e}, hermiticity {herm:.2e}, trace {tr:.6}"
                    ),
                });
            }
            for (j, q) in frame.iter().enumerate().skip(i + 1) {
                let overlap = (p * q).frobenius_norm();
                if overlap > tol::TAU_PROJ {
                    return Err(Error::InvalidFrame {
                        reason: format!("members {i},{j} overlap {overlap:.2e}"),
                    });
                }
            }
            sum = &sum + p;
        }
        let complete = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if complete > tol::TAU_PROJ {
            return Err(Error::InvalidFrame {
                reason: format!("completeness residual {complete:.2e}"),
            });
        }

        let mut frame = frame;
        frame.sort_by_key(|p| p.canonical_units());
        let canonical_key = frame
            .iter()
            .map(|p| p.canonical_key())
            .collect::<Vec<_>>()
            .join(";");
        Ok(Context {
            dim,
            frame,
            canonical_key,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The frame, in canonical order. Outcome indices refer to this order.
    pub fn frame(&self) -> &[ComplexMatrix] {
        &self.frame
    }

    pub fn canonical_key(&self) -> &str {
        &self.canonical_key
    }

    /// The coefficients `c_k = trace(P_k A)` of an observable over the
    /// frame. These are the spectral coefficients when `A` belongs to the
    /// context.
    pub fn coefficients(&self, a: &ComplexMatrix) -> Vec<f64> {
        self.frame.iter().map(|p| p.trace_product(a).re).collect()
    }

    /// Index of the frame member closest to a given rank-1 projector,
    /// together with the overlap `trace(P_k p)`.
    pub fn aligned_index(&self, p: &ComplexMatrix) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, q) in self.frame.iter().enumerate() {
            let overlap = q.trace_product(p).re;
            if overlap > best.1 {
                best = (k, overlap);
            }
        }
        best
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_key == other.canonical_key
    }
}

impl Eq for Context {}

impl<'de> Deserialize<'de> for Context {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            frame: Vec<ComplexMatrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let ctx = Context::new(raw.frame).map_err(serde::de::Error::custom)?;
        if ctx.dim() != raw.dim {
            return Err(serde::de::Error::custom(format!(
                "declared dim {} does not match frame dim {}",
                raw.dim,
                ctx.dim()
            )));
        }
        Ok(ctx)
    }
}

/// The context generated by a Hermitian observable with nondegenerate
/// spectrum. A degenerate observable does not own a context; callers must
/// supply a completing family (see [`joint_context`]).
pub fn context_of(a: &ComplexMatrix) -> Result<Context> {
    let sd = eig_hermitian_default(a)?;
    if !sd.is_nondegenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    Context::new(sd.projectors().to_vec())
}

/// The joint context of a family of pairwise commuting Hermitian
/// observables. Errors if some pair fails to commute or the common
/// eigenspaces are not all one-dimensional (the family is not maximal).
pub fn joint_context(family: &[ComplexMatrix]) -> Result<Context> {
    let blocks = common_refinement(family)?;
    if blocks
        .iter()
        .any(|b| (b.trace().re - 1.0).abs() > tol::TAU_PROJ)
    {
        return Err(Error::NonMaximalFamily);
    }
    Context::new(blocks)
}

/// A context containing every member of a commuting family, with any
/// remaining degeneracy split deterministically into rank-1 projectors.
pub fn completing_context(family: &[ComplexMatrix]) -> Result<Context> {
    let blocks = common_refinement(family)?;
    let mut frame = Vec::new();
    for b in blocks {
        let rank = b.trace().re.round() as usize;
        if rank <= 1 {
            frame.push(b);
        } else {
            frame.extend(split_projector_rank1(&b, rank)?);
        }
    }
    Context::new(frame)
}

/// True iff the observable lies in the context: `A = Σ c_k P_k` within the
/// projector tolerance (equivalently, `A` commutes with every frame
/// projector).
pub fn contains(context: &Context, a: &ComplexMatrix) -> Result<bool> {
    if context.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: context.dim(),
            right: a.dim(),
        });
    }
    let coeffs = context.coefficients(a);
    let mut rec = ComplexMatrix::zeros(context.dim());
    for (c, p) in coeffs.iter().zip(context.frame()) {
        rec = &rec + &p.scale_re(*c);
    }
    let residual = (&rec - a).frobenius_norm();
    Ok(residual <= tol::TAU_PROJ * a.frobenius_norm().max(1.0))
}

/// Minimal projectors of the common commutative subalgebra of two
/// contexts: connected components of the bipartite overlap graph on the
/// two frames, each component summed on the first context's side. The
/// trivial intersection yields `{I}`.
pub fn intersection(c1: &Context, c2: &Context) -> Result<Vec<ComplexMatrix>> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            left: c1.dim(),
            right: c2.dim(),
        });
    }
    let n = c1.dim();
    // Union-find over 2n nodes: first frame, then second frame offset by n.
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, p) in c1.frame().iter().enumerate() {
        for (j, q) in c2.frame().iter().enumerate() {
            if p.trace_product(q).re > tol::TAU_OVERLAP {
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
                parent[a] = b;
            }
        }
    }
    let mut components: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }
    let mut blocks: Vec<ComplexMatrix> = components
        .into_values()
        .map(|members| {
            let mut acc = ComplexMatrix::zeros(n);
            for i in members {
                acc = &acc + &c1.frame()[i];
            }
            acc
        })
        .collect();
    blocks.sort_by_key(|b| b.canonical_units());
    Ok(blocks)
}

/// Refines `{I}` by the spectral projectors of each family member in turn.
/// The result is the partition of identity generating the commutative
/// algebra spanned by the family; blocks commute with every member.
fn common_refinement(family: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    if family.is_empty() {
        return Err(Error::EmptyContexts);
    }
    let dim = family[0].dim();
    for (i, a) in family.iter().enumerate() {
        a.require_same_dim(&family[0])?;
        a.require_hermitian(tol::TAU_HERM)?;
        for (j, b) in family.iter().enumerate().skip(i + 1) {
            let comm = commutator(a, b)?.frobenius_norm();
            let scale = (a.frobenius_norm() * b.frobenius_norm()).max(1.0);
            if comm > tol::TAU_HERM * scale * 10.0 {
                return Err(Error::NonCommutingFamily { i, j });
            }
        }
    }

    let mut blocks = vec![ComplexMatrix::identity(dim)];
    for a in family {
        blocks = refine_partition(blocks, a)?;
    }
    Ok(blocks)
}

/// Splits each block `B` by the spectrum of `B·A·B`. The complement of the
/// block is pushed to a sentinel eigenvalue strictly above the spectrum of
/// `A`, so every returned eigenprojector lies inside one block.
fn refine_partition(blocks: Vec<ComplexMatrix>, a: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let dim = a.dim();
    let sentinel = a.frobenius_norm() + 1.0;
    let mut out = Vec::new();
    for b in blocks {
        if (b.trace().re - 1.0).abs() <= tol::TAU_PROJ {
            out.push(b);
            continue;
        }
        let outside = &ComplexMatrix::identity(dim) - &b;
        let compressed = &(&(&b * a) * &b) + &outside.scale_re(sentinel);
        let sd = eig_hermitian_default(&compressed)?;
        for (lambda, p) in sd.eigenvalues().iter().zip(sd.projectors()) {
            if *lambda < sentinel - 0.5 {
                out.push(p.clone());
            } else {
                // Sentinel cluster: contains the outside part, plus the
                // inside kernel only if trace exceeds the outside rank.
                let inside = p - &outside;
                let inside_rank = inside.trace().re;
                if inside_rank > 0.5 {
                    out.push(inside);
                }
            }
        }
    }
    Ok(out)
}

/// Deterministic rank-1 split of a projector of known rank, via modified
/// Gram-Schmidt over its columns.
fn split_projector_rank1(p: &ComplexMatrix, rank: usize) -> Result<Vec<ComplexMatrix>> {
    let n = p.dim();
    let mut basis: Vec<Vec<num_complex::Complex64>> = Vec::new();
    for col in 0..n {
        if basis.len() == rank {
            break;
        }
        let mut v: Vec<num_complex::Complex64> = (0..n).map(|r| p.at(r, col)).collect();
        for b in &basis {
            let dot: num_complex::Complex64 =
                b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in v.iter_mut() {
                *z /= num_complex::Complex64::new(norm, 0.0);
            }
            basis.push(v);
        }
    }
    if basis.len() != rank {
        return Err(Error::InvalidFrame {
            reason: format!("rank-{rank} projector yielded {} directions", basis.len()),
        });
    }
    basis
        .iter()
        .map(|v| ComplexMatrix::projector_onto(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn context_of_pauli_z_is_the_standard_frame() {
        let ctx = context_of(&ComplexMatrix::pauli_z()).unwrap();
        assert_eq!(ctx.dim(), 2);
        let e0 = ComplexMatrix::diag(&[1.0, 0.0]);
        let e1 = ComplexMatrix::diag(&[0.0, 1.0]);
        assert!(ctx.frame().iter().any(|p| p.approx_eq(&e0, 1e-12)));
        assert!(ctx.frame().iter().any(|p| p.approx_eq(&e1, 1e-12)));
    }

    #[test]
    fn context_of_x_axis_gives_half_sum_projectors() {
        let ctx = context_of(&ComplexMatrix::pauli_axis([1.0, 0.0, 0.0])).unwrap();
        let plus = ComplexMatrix::from_fn(2, |_, _| Complex64::new(0.5, 0.0)).unwrap();
        let minus = ComplexMatrix::from_fn(2, |i, j| {
            Complex64::new(if i == j { 0.5 } else { -0.5 }, 0.0)
        })
        .unwrap();
        assert!(ctx.frame().iter().any(|p| p.approx_eq(&plus, 1e-12)));
        assert!(ctx.frame().iter().any(|p| p.approx_eq(&minus, 1e-12)));
    }

    #[test]
    fn degenerate_observable_owns_no_context() {
        assert!(matches!(
            context_of(&ComplexMatrix::identity(2)),
            Err(Error::DegenerateSpectrum)
        ));
    }

    #[test]
    fn joint_context_of_single_generator_matches_context_of() {
        let z = ComplexMatrix::pauli_z();
        let a = joint_context(std::slice::from_ref(&z)).unwrap();
        let b = context_of(&z).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());

        let d = ComplexMatrix::diag(&[1.0, 2.0, 3.0]);
        let ctx = joint_context(std::slice::from_ref(&d)).unwrap();
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let p = ComplexMatrix::diag(&e);
            assert!(ctx.frame().iter().any(|q| q.approx_eq(&p, 1e-12)));
        }
    }

    #[test]
    fn joint_context_rejects_noncommuting_pair() {
        let family = [ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y()];
        assert!(matches!(
            joint_context(&family),
            Err(Error::NonCommutingFamily { .. })
        ));
    }

    #[test]
    fn joint_context_rejects_non_maximal_family() {
        // diag(1,1,0) alone leaves a two-dimensional joint eigenspace.
        let family = [ComplexMatrix::diag(&[1.0, 1.0, 0.0])];
        assert!(matches!(
            joint_context(&family),
            Err(Error::NonMaximalFamily)
        ));
    }

    #[test]
    fn completing_context_splits_degeneracies() {
        let ctx = completing_context(&[ComplexMatrix::diag(&[1.0, 1.0, 0.0])]).unwrap();
        assert_eq!(ctx.frame().len(), 3);
        // Every frame member still commutes with the degenerate observable.
        let a = ComplexMatrix::diag(&[1.0, 1.0, 0.0]);
        for p in ctx.frame() {
            assert!(commutator(&a, p).unwrap().frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn contains_examples() {
        let ctx = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let p0 = ComplexMatrix::diag(&[0.0, 1.0]);
        assert!(contains(&ctx, &p0).unwrap());
        assert!(!contains(&ctx, &ComplexMatrix::pauli_x()).unwrap());
        assert!(contains(&ctx, &ComplexMatrix::identity(2)).unwrap());
    }

    #[test]
    fn contains_checks_dimensions() {
        let ctx = context_of(&ComplexMatrix::pauli_z()).unwrap();
        assert!(contains(&ctx, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn self_intersection_returns_the_frame() {
        let ctx = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let blocks = intersection(&ctx, &ctx).unwrap();
        assert_eq!(blocks.len(), 2);
        for (b, p) in blocks.iter().zip(ctx.frame()) {
            assert!(b.approx_eq(p, 1e-12));
        }
    }

    #[test]
    fn generic_intersection_is_trivial() {
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let cx = context_of(&ComplexMatrix::pauli_x()).unwrap();
        let blocks = intersection(&cz, &cx).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(blocks[0].approx_eq(&ComplexMatrix::identity(2), 1e-12));
    }

    #[test]
    fn shared_basis_vector_survives_intersection() {
        // Both frames contain P_{e0}; the other two directions are mixed.
        let c1 = context_of(&ComplexMatrix::diag(&[5.0, 1.0, 2.0])).unwrap();
        let h = 1.0 / 2.0_f64.sqrt();
        let v1 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
        ];
        let v2 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
        ];
        let c2 = Context::new(vec![
            ComplexMatrix::diag(&[1.0, 0.0, 0.0]),
            ComplexMatrix::projector_onto(&v1).unwrap(),
            ComplexMatrix::projector_onto(&v2).unwrap(),
        ])
        .unwrap();
        let blocks = intersection(&c1, &c2).unwrap();
        assert_eq!(blocks.len(), 2);
        let pe0 = ComplexMatrix::diag(&[1.0, 0.0, 0.0]);
        let rest = ComplexMatrix::diag(&[0.0, 1.0, 1.0]);
        assert!(blocks.iter().any(|b| b.approx_eq(&pe0, 1e-9)));
        assert!(blocks.iter().any(|b| b.approx_eq(&rest, 1e-9)));
    }

    #[test]
    fn intersection_is_symmetric_and_commutes_with_both_frames() {
        let c1 = context_of(&ComplexMatrix::diag(&[5.0, 1.0, 2.0])).unwrap();
        let h = 1.0 / 2.0_f64.sqrt();
        let v1 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
        ];
        let v2 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
        ];
        let c2 = Context::new(vec![
            ComplexMatrix::diag(&[1.0, 0.0, 0.0]),
            ComplexMatrix::projector_onto(&v1).unwrap(),
            ComplexMatrix::projector_onto(&v2).unwrap(),
        ])
        .unwrap();

        let ab = intersection(&c1, &c2).unwrap();
        let ba = intersection(&c2, &c1).unwrap();
        assert_eq!(ab.len(), ba.len());
        for b in &ab {
            assert!(ba.iter().any(|q| q.approx_eq(b, 1e-9)));
            for frame in [c1.frame(), c2.frame()] {
                for p in frame {
                    assert!(commutator(b, p).unwrap().frobenius_norm() <= tol::TAU_PROJ);
                }
            }
        }
    }

    #[test]
    fn canonical_key_ignores_generator_choice() {
        let a = ComplexMatrix::pauli_axis([0.48, 0.6, 0.64]);
        // A and A³ + 2A generate the same subalgebra.
        let cubed = &(&a * &a) * &a;
        let poly = &cubed + &a.scale_re(2.0);
        let ka = context_of(&a).unwrap();
        let kb = context_of(&poly).unwrap();
        assert_eq!(ka.canonical_key(), kb.canonical_key());
    }

    #[test]
    fn polynomials_stay_inside_the_context() {
        let a = ComplexMatrix::pauli_axis([0.6, 0.0, 0.8]);
        let ctx = context_of(&a).unwrap();
        let sq = &a * &a;
        let poly = &(&sq * &a).scale_re(3.0) + &a.scale_re(-1.5);
        assert!(contains(&ctx, &sq).unwrap());
        assert!(contains(&ctx, &poly).unwrap());
    }

    #[test]
    fn context_serialization_roundtrip() {
        let ctx = context_of(&ComplexMatrix::pauli_axis([0.0, 0.6, 0.8])).unwrap();
        let text = serde_json::to_string(&ctx).unwrap();
        let back: Context = serde_json::from_str(&text).unwrap();
        assert_eq!(ctx.canonical_key(), back.canonical_key());
    }
}
