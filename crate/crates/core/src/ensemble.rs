//! Quantum states as ensembles of physical states.
//!
//! A state functional (density matrix) induces, per context, a Born
//! distribution over outcomes. Sampling that distribution with
//! counter-based streams yields physical states whose sample means
//! converge to the trace expectation value, independently of the device
//! type used — the two facts the Monte Carlo machinery here exists to
//! demonstrate.

use serde::Serialize;

use crate::contexts::{contains, Context};
use crate::error::{Error, Result};
use crate::matalg::{eig_hermitian_default, ComplexMatrix};
use crate::rng::{context_uniform, device_seed, sample_seed};
use crate::tol;
use crate::valuation::{DeviceType, PhysicalState};

/// A positive normalized linear functional on the matrix algebra, stored
/// as its density matrix. Rank-1 densities are flagged pure at
/// construction; pure states are exactly the one-dimensional projectors.
#[derive(Debug, Clone, Serialize)]
pub struct StateFunctional {
    dim: usize,
    density: ComplexMatrix,
    pure: bool,
}

impl StateFunctional {
    /// Validates positivity (eigenvalues ≥ −1e−10), unit trace, and
    /// Hermiticity, and detects purity (`ρ² = ρ`).
    pub fn from_density(density: ComplexMatrix) -> Result<Self> {
        density
            .require_hermitian(tol::TAU_HERM)
            .map_err(|_| Error::InvalidState {
                reason: "density is not Hermitian".into(),
            })?;
        let trace = density.trace().re;
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState {
                reason: format!("trace {trace:.12} is not 1"),
            });
        }
        let sd = eig_hermitian_default(&density).map_err(|e| Error::InvalidState {
            reason: format!("density spectrum: {e}"),
        })?;
        if sd.min_eigenvalue() < -1e-10 {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {:.3e}", sd.min_eigenvalue()),
            });
        }
        let idem = (&(&density * &density) - &density).frobenius_norm();
        let pure = idem <= tol::TAU_PROJ;
        Ok(StateFunctional {
            dim: density.dim(),
            density,
            pure,
        })
    }

    /// Pure state from a (not necessarily normalized) ket.
    pub fn pure_from_vector(v: &[num_complex::Complex64]) -> Result<Self> {
        Self::from_density(ComplexMatrix::projector_onto(v)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        StateFunctional {
            dim,
            density: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
            pure: dim == 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }
}

/// Outcome probabilities of a density over a context's frame, clipped at
/// zero and renormalized.
pub(crate) fn born_probs_of_density(
    density: &ComplexMatrix,
    context: &Context,
) -> Result<Vec<f64>> {
    density.require_same_dim(&context.frame()[0])?;
    let mut probs: Vec<f64> = context
        .frame()
        .iter()
        .map(|p| density.trace_product(p).re.max(0.0))
        .collect();
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState {
            reason: "outcome probabilities sum to zero".into(),
        });
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}

/// Born probabilities `p_k = trace(ρ P_k)` over the context's canonical
/// frame order; the vector sums to one.
pub fn born_probs(state: &StateFunctional, context: &Context) -> Result<Vec<f64>> {
    if state.dim() != context.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: context.dim(),
        });
    }
    born_probs_of_density(&state.density, context)
}

/// One member of the quantum ensemble: a lazily realized physical state
/// whose outcome on any context is drawn from the Born distribution using
/// the stream keyed by `(seed, canonical context key)`.
///
/// On a context that resolves a pure state's projector, the outcome is the
/// aligned one with probability 1, so the state is stable on the
/// subalgebra of its quantum state.
pub fn sample_physical_state(state: &StateFunctional, seed: u64) -> PhysicalState {
    PhysicalState::born_sampled(state.density.clone(), state.pure, seed)
}

/// The quantum expectation `trace(ρ A)`; linear in `A` even across
/// non-commuting observables.
pub fn expected_value(state: &StateFunctional, a: &ComplexMatrix) -> Result<f64> {
    a.require_hermitian(tol::TAU_HERM)?;
    if state.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: a.dim(),
        });
    }
    Ok(state.density.trace_product(a).re)
}

/// Running statistics of a sampled ensemble mean (one-pass Welford
/// update, fixed accumulation order).
#[derive(Debug, Clone, Serialize)]
pub struct SampledEnsembleStats {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the running mean.
    pub m2: f64,
    pub seed: u64,
    pub device: String,
}

impl SampledEnsembleStats {
    fn new(seed: u64, device: &str) -> Self {
        SampledEnsembleStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            seed,
            device: device.to_string(),
        }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean, `sqrt(variance / n)`.
    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Ensemble mean of an observable through a device: draws `n` independent
/// physical states (seed-derived streams), evaluates the observable, and
/// accumulates mean and standard error. Converges in probability to
/// [`expected_value`] as `n` grows.
///
/// Equivalent, sample for sample, to materializing each physical state via
/// [`sample_physical_state`] and evaluating it through the device; the
/// outcome distribution and value list are precomputed here once per call.
pub fn monte_carlo_average(
    state: &StateFunctional,
    a: &ComplexMatrix,
    device: &DeviceType,
    n: u64,
    seed: u64,
) -> Result<SampledEnsembleStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    a.require_hermitian(tol::TAU_HERM)?;
    if !contains(device.context(), a)? {
        return Err(Error::IncompatibleDevice {
            label: device.label().to_string(),
        });
    }

    let context = device.context();
    let probs = born_probs(state, context)?;
    let values = context.coefficients(a);
    let key = context.canonical_key();

    let aligned = if state.pure {
        probs
            .iter()
            .enumerate()
            .find(|(_, p)| **p >= 1.0 - 1e-9)
            .map(|(k, _)| k)
    } else {
        None
    };

    let mut stats = SampledEnsembleStats::new(seed, device.label());
    for i in 0..n {
        let k = match aligned {
            Some(k) => k,
            None => {
                let u = context_uniform(sample_seed(seed, i), key);
                let mut acc = 0.0;
                let mut chosen = probs.len() - 1;
                for (j, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = j;
                        break;
                    }
                }
                chosen
            }
        };
        stats.push(values[k]);
    }
    Ok(stats)
}

/// Per-device results and pairwise comparisons for the device-independence
/// check of ensemble means.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentativityReport {
    pub oracle: f64,
    pub per_device: Vec<DeviceMeanReport>,
    pub pairwise: Vec<PairComparison>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviceMeanReport {
    pub device: String,
    pub mean: f64,
    pub standard_error: f64,
    pub oracle_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairComparison {
    pub device_a: String,
    pub device_b: String,
    pub delta: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Runs [`monte_carlo_average`] once per device with independent streams
/// and flags PASS when every pair of means agrees within five combined
/// standard errors. Each mean is also reported against the trace oracle.
///
/// Intended for devices over distinct contexts; identical contexts produce
/// identical deterministic branches and pass trivially. At small `n` the
/// five-sigma comparison can flag statistically expected excursions.
pub fn representativity_test(
    state: &StateFunctional,
    a: &ComplexMatrix,
    devices: &[DeviceType],
    n: u64,
    seed: u64,
) -> Result<RepresentativityReport> {
    if devices.len() < 2 {
        return Err(Error::InvalidParameter(
            "representativity needs at least two devices".into(),
        ));
    }
    let oracle = expected_value(state, a)?;
    let mut runs = Vec::with_capacity(devices.len());
    for device in devices {
        let stats = monte_carlo_average(state, a, device, n, device_seed(seed, device.label()))?;
        runs.push(stats);
    }

    let per_device: Vec<DeviceMeanReport> = runs
        .iter()
        .map(|s| DeviceMeanReport {
            device: s.device.clone(),
            mean: s.mean,
            standard_error: s.standard_error(),
            oracle_deviation: (s.mean - oracle).abs(),
        })
        .collect();

    let mut pairwise = Vec::new();
    let mut pass = true;
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            let delta = (runs[i].mean - runs[j].mean).abs();
            let combined =
                (runs[i].standard_error().powi(2) + runs[j].standard_error().powi(2)).sqrt();
            let threshold = 5.0 * combined;
            let ok = delta <= threshold;
            pass &= ok;
            pairwise.push(PairComparison {
                device_a: runs[i].device.clone(),
                device_b: runs[j].device.clone(),
                delta,
                threshold,
                pass: ok,
            });
        }
    }

    Ok(RepresentativityReport {
        oracle,
        per_device,
        pairwise,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::context_of;
    use crate::valuation::evaluate;
    use num_complex::Complex64;

    fn ground_projector() -> ComplexMatrix {
        ComplexMatrix::diag(&[0.0, 1.0])
    }

    #[test]
    fn state_validation() {
        assert!(StateFunctional::from_density(ground_projector()).is_ok());
        // trace ≠ 1
        assert!(StateFunctional::from_density(ComplexMatrix::identity(2)).is_err());
        // negative eigenvalue
        assert!(StateFunctional::from_density(ComplexMatrix::diag(&[1.5, -0.5])).is_err());
        // non-Hermitian
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
        ])
        .unwrap();
        assert!(StateFunctional::from_density(m).is_err());
    }

    #[test]
    fn purity_detection() {
        assert!(StateFunctional::from_density(ground_projector())
            .unwrap()
            .is_pure());
        assert!(!StateFunctional::maximally_mixed(2).is_pure());
    }

    #[test]
    fn born_probs_examples() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let probs = born_probs(&p0, &cz).unwrap();
        // All the weight sits on the frame member equal to the density.
        for (p, proj) in probs.iter().zip(cz.frame()) {
            let expected = if proj.approx_eq(&ground_projector(), 1e-9) {
                1.0
            } else {
                0.0
            };
            assert!((p - expected).abs() < 1e-12);
        }

        let cx = context_of(&ComplexMatrix::pauli_x()).unwrap();
        for p in born_probs(&p0, &cx).unwrap() {
            assert!((p - 0.5).abs() < 1e-12);
        }

        let mixed = StateFunctional::maximally_mixed(3);
        let ctx = context_of(&ComplexMatrix::diag(&[1.0, 2.0, 3.0])).unwrap();
        for p in born_probs(&mixed, &ctx).unwrap() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn born_probs_sum_to_one() {
        let state = StateFunctional::pure_from_vector(&[
            Complex64::new(3.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(1.0, -2.0),
        ])
        .unwrap();
        let ctx = context_of(&ComplexMatrix::diag(&[1.0, 2.0, 3.0])).unwrap();
        let probs = born_probs(&state, &ctx).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_stable_on_the_state_projector() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let device = DeviceType::new("z", cz.clone());
        for seed in 0..20 {
            let phi = sample_physical_state(&p0, seed);
            let v = evaluate(&phi, &ground_projector(), &device).unwrap();
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn sampling_is_seed_reproducible() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cx = context_of(&ComplexMatrix::pauli_x()).unwrap();
        let device = DeviceType::new("x", cx);
        let a = ComplexMatrix::pauli_x();
        for seed in [0, 7, 123456] {
            let v1 = evaluate(&sample_physical_state(&p0, seed), &a, &device).unwrap();
            let v2 = evaluate(&sample_physical_state(&p0, seed), &a, &device).unwrap();
            assert_eq!(v1.to_bits(), v2.to_bits());
        }
    }

    #[test]
    fn expectation_examples() {
        // Ground projector as the state: the expectation of [[a,b],[c,d]]
        // is the bottom-right entry.
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let a = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.25)],
            vec![Complex64::new(0.5, -0.25), Complex64::new(-3.0, 0.0)],
        ])
        .unwrap();
        assert!((expected_value(&p0, &a).unwrap() + 3.0).abs() < 1e-14);
        assert!((expected_value(&p0, &ComplexMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-14);
        // A² for A = σx is the identity: positive expectation.
        let sq = &ComplexMatrix::pauli_x() * &ComplexMatrix::pauli_x();
        assert!((expected_value(&p0, &sq).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn deterministic_branch_gives_exact_mean() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let device = DeviceType::new("z", cz);
        let stats =
            monte_carlo_average(&p0, &ComplexMatrix::pauli_z(), &device, 1000, 3).unwrap();
        assert_eq!(stats.mean, -1.0);
        assert_eq!(stats.standard_error(), 0.0);
    }

    #[test]
    fn monte_carlo_matches_materialized_states() {
        let state = StateFunctional::pure_from_vector(&[
            Complex64::new(0.8, 0.0),
            Complex64::new(0.0, 0.6),
        ])
        .unwrap();
        let cx = context_of(&ComplexMatrix::pauli_x()).unwrap();
        let device = DeviceType::new("x", cx);
        let a = ComplexMatrix::pauli_x();
        let seed = 77;
        let n = 50;
        let stats = monte_carlo_average(&state, &a, &device, n, seed).unwrap();

        let mut manual = 0.0;
        for i in 0..n {
            let phi = sample_physical_state(&state, crate::rng::sample_seed(seed, i));
            manual += evaluate(&phi, &a, &device).unwrap();
        }
        manual /= n as f64;
        assert!((stats.mean - manual).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_mean_stays_inside_the_spectrum() {
        let state = StateFunctional::pure_from_vector(&[
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.25, 1.0),
        ])
        .unwrap();
        let n_dir = [0.6, 0.0, 0.8];
        let a = &ComplexMatrix::identity(2).scale_re(0.3)
            + &ComplexMatrix::pauli_axis(n_dir).scale_re(1.7);
        let ctx = context_of(&ComplexMatrix::pauli_axis(n_dir)).unwrap();
        let device = DeviceType::new("d", ctx);
        for seed in 0..10 {
            let stats = monte_carlo_average(&state, &a, &device, 200, seed).unwrap();
            assert!(stats.mean >= 0.3 - 1.7 - 1e-12);
            assert!(stats.mean <= 0.3 + 1.7 + 1e-12);
        }
    }

    #[test]
    fn expectation_is_linear_across_noncommuting_observables() {
        let state = StateFunctional::pure_from_vector(&[
            Complex64::new(0.6, 0.3),
            Complex64::new(0.2, -0.7),
        ])
        .unwrap();
        let a = ComplexMatrix::pauli_x();
        let b = ComplexMatrix::pauli_z();
        let lhs = expected_value(&state, &(&a + &b)).unwrap();
        let rhs = expected_value(&state, &a).unwrap() + expected_value(&state, &b).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn representativity_on_identical_contexts_is_trivially_pass() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let devices = [
            DeviceType::new("first", cz.clone()),
            DeviceType::new("second", cz),
        ];
        let report =
            representativity_test(&p0, &ComplexMatrix::pauli_z(), &devices, 100, 5).unwrap();
        assert!(report.pass);
        for d in &report.per_device {
            assert_eq!(d.mean, -1.0);
        }
    }

    #[test]
    fn representativity_rejects_incompatible_device() {
        let p0 = StateFunctional::from_density(ground_projector()).unwrap();
        let cz = context_of(&ComplexMatrix::pauli_z()).unwrap();
        let cx = context_of(&ComplexMatrix::pauli_x()).unwrap();
        let devices = [DeviceType::new("z", cz), DeviceType::new("x", cx)];
        assert!(matches!(
            representativity_test(&p0, &ComplexMatrix::pauli_z(), &devices, 10, 1),
            Err(Error::IncompatibleDevice { .. })
        ));
    }
}
