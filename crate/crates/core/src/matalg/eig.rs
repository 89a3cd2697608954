//! Hermitian eigensolver: cyclic Jacobi rotations adapted to complex
//! Hermitian matrices, plus degeneracy clustering into spectral projectors.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tol;

/// Maximum number of full Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 100;

/// Convergence: off-diagonal Frobenius mass relative to the input norm.
const OFF_DIAG_REL: f64 = 1e-12;

/// Distinct eigenvalues (ascending) with their orthogonal spectral
/// projectors. Eigenvalues closer than the clustering tolerance used at
/// construction have been merged, so ties are impossible.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Smallest gap between distinct eigenvalues; `None` for a single
    /// eigenvalue.
    pub fn min_gap(&self) -> Option<f64> {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |x| x.min(g))))
    }

    /// `Σ λᵢ Pᵢ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.scale_re(*lambda);
        }
        acc
    }

    /// Applies a real function to the spectrum: `Σ f(λᵢ) Pᵢ`.
    pub fn map_real(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.scale_re(f(*lambda));
        }
        acc
    }

    /// Applies a complex function to the spectrum: `Σ f(λᵢ) Pᵢ`.
    pub fn map_complex(&self, mut f: impl FnMut(f64) -> Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.scale(f(*lambda));
        }
        acc
    }

    /// Distance from `x` to the spectrum.
    pub fn spectrum_distance(&self, x: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (l - x).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// True when every projector is one-dimensional (trace 1).
    pub fn is_nondegenerate(&self) -> bool {
        self.projectors
            .iter()
            .all(|p| (p.trace().re - 1.0).abs() <= tol::TAU_PROJ)
    }

    /// Checks the defining identities against the decomposed matrix:
    /// idempotence and self-adjointness of each projector, mutual
    /// orthogonality, completeness, and reconstruction.
    ///
    /// `tol_cluster` is the clustering tolerance the decomposition was
    /// built with; merging eigenvalues into a cluster mean legitimately
    /// moves the reconstruction by up to the cluster diameter, so that
    /// slack is added to the reconstruction bound.
    pub fn verify(&self, original: &ComplexMatrix, tol_cluster: f64) -> Result<()> {
        let n = self.dim();
        let scale = original.frobenius_norm().max(1.0);
        let cluster_slack = (n as f64).sqrt() * (n.saturating_sub(1)) as f64 * tol_cluster;
        let mut sum = ComplexMatrix::zeros(n);
        for (i, p) in self.projectors.iter().enumerate() {
            let idem = (&(p * p) - p).frobenius_norm();
            let herm = p.hermiticity_residual();
            if idem > tol::TAU_PROJ || herm > tol::TAU_PROJ {
                return Err(Error::InvalidFrame {
                    reason: format!("projector {i}: idempotence {idem:.2e}, hermiticity {herm:.2e}"),
                });
            }
            for (j, q) in self.projectors.iter().enumerate().skip(i + 1) {
                let orth = (p * q).frobenius_norm();
                if orth > tol::TAU_PROJ {
                    return Err(Error::InvalidFrame {
                        reason: format!("projectors {i},{j} overlap {orth:.2e}"),
                    });
                }
            }
            sum = &sum + p;
        }
        let complete = (&sum - &ComplexMatrix::identity(n)).frobenius_norm();
        if complete > tol::TAU_PROJ {
            return Err(Error::InvalidFrame {
                reason: format!("completeness residual {complete:.2e}"),
            });
        }
        let recon = (&self.reconstruct() - original).frobenius_norm();
        if recon > tol::TAU_EIG * scale + cluster_slack {
            return Err(Error::InvalidFrame {
                reason: format!("reconstruction residual {recon:.2e}"),
            });
        }
        Ok(())
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues within `tol_cluster` of each other are merged into one
/// (the cluster mean) with the summed projector; pass
/// `tol::default_cluster_tol(a.frobenius_norm())` unless a specific
/// grouping scale is needed. The result is verified against the spectral
/// identities before being returned.
pub fn eig_hermitian(a: &ComplexMatrix, tol_cluster: f64) -> Result<SpectralDecomposition> {
    a.require_hermitian(tol::TAU_HERM)?;
    let n = a.dim();
    let (values, vectors) = jacobi_hermitian(a)?;

    // Sort eigenvectors by eigenvalue, then group into clusters.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tol_cluster {
            end += 1;
        }
        let members = &order[start..end];
        let mean = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
        let mut proj = ComplexMatrix::zeros(n);
        for &col in members {
            let v: Vec<Complex64> = (0..n).map(|r| vectors.at(r, col)).collect();
            for i in 0..n {
                for j in 0..n {
                    proj.set(i, j, proj.at(i, j) + v[i] * v[j].conj());
                }
            }
        }
        eigenvalues.push(mean);
        projectors.push(proj);
        start = end;
    }

    let sd = SpectralDecomposition {
        eigenvalues,
        projectors,
    };
    sd.verify(a, tol_cluster)?;
    Ok(sd)
}

/// Same but with the default clustering tolerance.
pub fn eig_hermitian_default(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    eig_hermitian(a, tol::default_cluster_tol(a.frobenius_norm()))
}

/// Cyclic Jacobi for a complex Hermitian matrix. Returns the eigenvalues
/// (unsorted) and the unitary whose columns are the eigenvectors.
///
/// One rotation annihilates the (p, q) entry: the phase of `a_pq` is
/// absorbed into the q-th column and a real 2×2 rotation is applied.
fn jacobi_hermitian(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    let mut m = a.clone();
    // Symmetrize to kill roundoff-level hermiticity violations up front.
    for i in 0..n {
        for j in 0..n {
            let avg = (m.at(i, j) + m.at(j, i).conj()) * Complex64::new(0.5, 0.0);
            m.set(i, j, avg);
        }
    }
    let mut vecs = ComplexMatrix::identity(n);
    let threshold = OFF_DIAG_REL * a.frobenius_norm();

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_mass(&m) <= threshold {
            let values: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
            return Ok((values, vecs));
        }
        // Entries at the round-off floor of the current matrix carry no
        // information; everything above it is rotated away.
        let skip_below = f64::EPSILON * m.frobenius_norm();
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m.at(p, q);
                let abs_beta = beta.norm();
                if abs_beta <= skip_below {
                    continue;
                }
                let phase = beta / abs_beta; // w, |w| = 1
                let app = m.at(p, p).re;
                let aqq = m.at(q, q).re;

                // Real Jacobi angle for [[app, |β|], [|β|, aqq]].
                let tau = (aqq - app) / (2.0 * abs_beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J = I except J[p][p]=c, J[p][q]=s, J[q][p]=-w̄s, J[q][q]=w̄c.
                let cw = phase.conj();
                let jp_q = Complex64::new(s, 0.0);
                let jq_p = -cw * s;
                let jq_q = cw * c;
                let cc = Complex64::new(c, 0.0);

                // A ← A·J (columns p, q).
                for r in 0..n {
                    let arp = m.at(r, p);
                    let arq = m.at(r, q);
                    m.set(r, p, arp * cc + arq * jq_p);
                    m.set(r, q, arp * jp_q + arq * jq_q);
                }
                // A ← J†·A (rows p, q). J†[p][q] = conj(J[q][p]), etc.
                let tp_q = jq_p.conj();
                let tq_p = jp_q.conj();
                let tq_q = jq_q.conj();
                for col in 0..n {
                    let apc = m.at(p, col);
                    let aqc = m.at(q, col);
                    m.set(p, col, apc * cc + aqc * tp_q);
                    m.set(q, col, apc * tq_p + aqc * tq_q);
                }
                // The target entries are now zero by construction.
                m.set(p, q, Complex64::new(0.0, 0.0));
                m.set(q, p, Complex64::new(0.0, 0.0));

                // V ← V·J.
                for r in 0..n {
                    let vrp = vecs.at(r, p);
                    let vrq = vecs.at(r, q);
                    vecs.set(r, p, vrp * cc + vrq * jq_p);
                    vecs.set(r, q, vrp * jp_q + vrq * jq_q);
                }
            }
        }
    }

    if off_diagonal_mass(&m) <= threshold {
        let values: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
        return Ok((values, vecs));
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

fn off_diagonal_mass(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m.at(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}
