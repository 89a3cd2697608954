//! Heisenberg time evolution, infinite-time averages, compression by
//! one-dimensional projectors, and the ergodicity check tying the two
//! together: in any ground physical state, the value of the time-averaged
//! observable equals the compression functional of the original.

use serde::Serialize;

use crate::contexts::{completing_context, Context};
use crate::error::{Error, Result};
use crate::matalg::{eig_hermitian_default, ComplexMatrix, SpectralDecomposition};
use crate::tol;
use crate::valuation::{evaluate, DeviceType, PhysicalState};

/// A Hamiltonian with its spectral decomposition and a designated
/// nondegenerate eigenvalue (the "ground" index, which need not be the
/// minimum of the spectrum).
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    h: ComplexMatrix,
    spectral: SpectralDecomposition,
    ground_index: usize,
}

impl HamiltonianModel {
    pub fn new(h: ComplexMatrix, ground_index: usize) -> Result<Self> {
        let spectral = eig_hermitian_default(&h)?;
        if ground_index >= spectral.len() {
            return Err(Error::InvalidParameter(format!(
                "ground_index {ground_index} out of range for {} distinct eigenvalues",
                spectral.len()
            )));
        }
        let trace = spectral.projectors()[ground_index].trace().re;
        if (trace - 1.0).abs() > tol::TAU_PROJ {
            return Err(Error::NotRankOneProjector {
                trace,
                residual: 0.0,
            });
        }
        Ok(HamiltonianModel {
            h,
            spectral,
            ground_index,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn ground_index(&self) -> usize {
        self.ground_index
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectral.eigenvalues()[self.ground_index]
    }

    /// The one-dimensional projector at the designated eigenvalue.
    pub fn ground_projector(&self) -> &ComplexMatrix {
        &self.spectral.projectors()[self.ground_index]
    }

    /// `exp(iHt)` from the stored spectrum.
    fn propagator(&self, t: f64) -> ComplexMatrix {
        self.spectral
            .map_complex(|e| num_complex::Complex64::from_polar(1.0, e * t))
    }
}

/// Heisenberg evolution `A(t) = exp(iHt) A exp(−iHt)`, the solution of
/// `dA/dt = i[H, A]` with `A(0) = A`. Unitary conjugation preserves the
/// spectrum and Hermiticity of `A`.
pub fn heisenberg_evolve(model: &HamiltonianModel, a: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let u = model.propagator(t);
    &(&u * a) * &u.adjoint()
}

/// Value of the evolved observable in a physical state: `φ_t(A) = φ(A(t))`.
///
/// The device context is transported by the same conjugation, so a device
/// compatible with `A` at time zero stays compatible with `A(t)`.
pub fn evolve_valuation(
    phi: &PhysicalState,
    model: &HamiltonianModel,
    a: &ComplexMatrix,
    device: &DeviceType,
    t: f64,
) -> Result<f64> {
    let evolved = heisenberg_evolve(model, a, t);
    let u = model.propagator(t);
    let u_dag = u.adjoint();
    let transported_frame: Vec<ComplexMatrix> = device
        .context()
        .frame()
        .iter()
        .map(|p| &(&u * p) * &u_dag)
        .collect();
    let transported = DeviceType::new(device.label(), Context::new(transported_frame)?);
    evaluate(phi, &evolved, &transported)
}

/// The infinite-time average `Ā = Σ_n P_n A P_n` over the distinct
/// eigenprojectors of the Hamiltonian (the pinching of `A`). Commutes with
/// the Hamiltonian and is idempotent as an operation.
pub fn time_average(model: &HamiltonianModel, a: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(a.dim());
    for p in model.spectral.projectors() {
        acc = &acc + &(&(p * a) * p);
    }
    acc
}

/// Trapezoidal approximation of `(1/2L) ∫_{−L}^{L} A(t) dt`.
///
/// The distance to the exact pinching decays like `1/(L·gap)` plus the
/// quadrature error; the step size must satisfy `h ≤ 0.1/‖H‖`.
pub fn time_average_quadrature(
    model: &HamiltonianModel,
    a: &ComplexMatrix,
    half_width: f64,
    steps: usize,
) -> Result<ComplexMatrix> {
    if half_width <= 0.0 || !half_width.is_finite() || steps == 0 {
        return Err(Error::InvalidParameter(
            "quadrature needs positive half-width and step count".into(),
        ));
    }
    let h_norm = model.spectral.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let step = 2.0 * half_width / steps as f64;
    if h_norm > 0.0 && step > 0.1 / h_norm {
        return Err(Error::StepTooLarge {
            step,
            bound: 0.1 / h_norm,
        });
    }
    let mut acc = ComplexMatrix::zeros(a.dim());
    for j in 0..=steps {
        let t = -half_width + step * j as f64;
        let weight = if j == 0 || j == steps { 0.5 } else { 1.0 };
        acc = &acc + &heisenberg_evolve(model, a, t).scale_re(weight);
    }
    Ok(acc.scale_re(step / (2.0 * half_width)))
}

/// The compression scalar: the unique `s` with `pAp = s·p` for a
/// one-dimensional projector `p`, computed as `trace(pA)`. Linear in `A`,
/// nonnegative on squares, and equal to 1 on the identity.
pub fn compress(p: &ComplexMatrix, a: &ComplexMatrix) -> Result<f64> {
    p.require_same_dim(a)?;
    let trace = p.trace().re;
    let residual = (&(p * p) - p)
        .frobenius_norm()
        .max(p.hermiticity_residual());
    if (trace - 1.0).abs() > tol::TAU_PROJ || residual > tol::TAU_PROJ {
        return Err(Error::NotRankOneProjector { trace, residual });
    }
    a.require_hermitian(tol::TAU_HERM)?;
    Ok(p.trace_product(a).re)
}

/// Outcome of the ergodicity check.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityReport {
    /// Value of the time-averaged observable in the ground physical state.
    pub time_average_value: f64,
    /// The compression scalar of the original observable.
    pub compression_value: f64,
    /// Value of the off-ground remainder `Ā − p₀Āp₀`; vanishes in ground
    /// states.
    pub remainder_value: f64,
    pub pass: bool,
}

/// Verifies, for one ground physical state, that the value of `Ā` equals
/// the compression scalar of `A`.
///
/// `Ā` commutes with the ground projector, so both fit in one completing
/// context; the state must assign that context the ground outcome
/// (`φ(p₀) = 1`), which is checked first.
pub fn ergodicity_check(
    model: &HamiltonianModel,
    a: &ComplexMatrix,
    phi0: &PhysicalState,
) -> Result<ErgodicityReport> {
    let p0 = model.ground_projector().clone();
    let averaged = time_average(model, a);
    let context = completing_context(&[averaged.clone(), p0.clone()])?;
    let device = DeviceType::new("ground-check", context);

    let ground_value = evaluate(phi0, &p0, &device)?;
    if (ground_value - 1.0).abs() > tol::TAU_EIG {
        return Err(Error::NotGroundState {
            value: ground_value,
        });
    }

    let time_average_value = evaluate(phi0, &averaged, &device)?;
    let compression_value = compress(&p0, a)?;
    let remainder = &averaged - &(&(&p0 * &averaged) * &p0);
    let remainder_value = evaluate(phi0, &remainder, &device)?;
    let pass = (time_average_value - compression_value).abs() <= 1e-10;

    Ok(ErgodicityReport {
        time_average_value,
        compression_value,
        remainder_value,
        pass,
    })
}
