//! Dynamics property suites: the evolution equation residual, pinching
//! algebra, compression functional laws, and the ergodicity identity over
//! random Hamiltonians.

mod common;

use common::{random_hermitian, random_matrix, random_nondegenerate_hermitian};
use num_complex::Complex64;
use opalg::dynamics::{
    compress, ergodicity_check, heisenberg_evolve, time_average, HamiltonianModel,
};
use opalg::ensemble::{sample_physical_state, StateFunctional};
use opalg::rng::Stream;
use opalg::{commutator, eig_hermitian_default, ComplexMatrix};

fn random_model(stream: &mut Stream, dim: usize) -> HamiltonianModel {
    let h = random_nondegenerate_hermitian(stream, dim);
    let index = (stream.next_u64() % dim as u64) as usize;
    HamiltonianModel::new(h, index).unwrap()
}

#[test]
fn evolution_equation_residual_is_second_order() {
    // Unit-norm H and A keep the second-derivative constant small enough
    // for the absolute 10·h² bound; the ratio test then pins the order.
    let mut stream = Stream::from_parts(&[b"fd-check"]);
    for trial in 0..20 {
        let dim = 2 + (trial % 3);
        let h_raw = random_nondegenerate_hermitian(&mut stream, dim);
        let h_unit = h_raw.scale_re(1.0 / opalg::cstar_norm(&h_raw));
        let index = (stream.next_u64() % dim as u64) as usize;
        let model = HamiltonianModel::new(h_unit, index).unwrap();
        let a_raw = random_hermitian(&mut stream, dim);
        let a = a_raw.scale_re(1.0 / opalg::cstar_norm(&a_raw));
        let t = stream.next_in(-2.0, 2.0);

        let residual = |h: f64| {
            let fd = (&heisenberg_evolve(&model, &a, t + h)
                - &heisenberg_evolve(&model, &a, t - h))
                .scale_re(1.0 / (2.0 * h));
            let rhs = commutator(model.hamiltonian(), &heisenberg_evolve(&model, &a, t))
                .unwrap()
                .scale(Complex64::new(0.0, 1.0));
            (&fd - &rhs).frobenius_norm()
        };

        for h in [1e-3, 1e-4] {
            assert!(residual(h) <= 10.0 * h * h, "trial {trial}, h={h}");
        }
        let ratio = residual(1e-3) / residual(5e-4);
        assert!((3.5..=4.5).contains(&ratio), "trial {trial}: ratio {ratio}");
    }
}

#[test]
fn evolution_preserves_the_spectrum() {
    let mut stream = Stream::from_parts(&[b"spectrum-preserved"]);
    for trial in 0..15 {
        let dim = 2 + (trial % 3);
        let model = random_model(&mut stream, dim);
        let a = random_hermitian(&mut stream, dim);
        let t = stream.next_in(-3.0, 3.0);
        let before = eig_hermitian_default(&a).unwrap();
        let after = eig_hermitian_default(&heisenberg_evolve(&model, &a, t)).unwrap();
        assert_eq!(before.len(), after.len());
        for (x, y) in before.eigenvalues().iter().zip(after.eigenvalues()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn pinching_is_idempotent_and_commutes_with_the_hamiltonian() {
    let mut stream = Stream::from_parts(&[b"pinching-algebra"]);
    for trial in 0..15 {
        let dim = 2 + (trial % 3);
        let model = random_model(&mut stream, dim);
        let a = random_hermitian(&mut stream, dim);
        let avg = time_average(&model, &a);
        assert!((&time_average(&model, &avg) - &avg).frobenius_norm() <= 1e-12);
        assert!(
            commutator(&avg, model.hamiltonian())
                .unwrap()
                .frobenius_norm()
                <= 1e-10
        );
    }
}

#[test]
fn compression_is_linear_positive_and_normalized() {
    let mut stream = Stream::from_parts(&[b"compression-laws"]);
    for trial in 0..30 {
        let dim = 2 + (trial % 4);
        let model = random_model(&mut stream, dim);
        let p = model.ground_projector();

        let a = random_hermitian(&mut stream, dim);
        let b = random_hermitian(&mut stream, dim);
        let (alpha, beta) = (stream.next_in(-2.0, 2.0), stream.next_in(-2.0, 2.0));
        let combo = &a.scale_re(alpha) + &b.scale_re(beta);
        let lin = (compress(p, &combo).unwrap()
            - alpha * compress(p, &a).unwrap()
            - beta * compress(p, &b).unwrap())
        .abs();
        assert!(lin <= 1e-12, "trial {trial}: linearity {lin}");

        let r = random_matrix(&mut stream, dim);
        let gram = &r.adjoint() * &r;
        assert!(compress(p, &gram).unwrap() >= -1e-12);

        let unit = (compress(p, &ComplexMatrix::identity(dim)).unwrap() - 1.0).abs();
        assert!(unit <= 1e-12);

        // The defining identity pAp = s·p.
        let s = compress(p, &a).unwrap();
        let pap = &(p * &a) * p;
        assert!((&pap - &p.scale_re(s)).frobenius_norm() <= 1e-12);
    }
}

#[test]
fn ergodicity_identity_over_random_hamiltonians() {
    let mut stream = Stream::from_parts(&[b"ergodicity-random"]);
    for trial in 0..100 {
        let dim = 2 + (trial % 4); // dims 2..=5
        let model = random_model(&mut stream, dim);
        let a = random_hermitian(&mut stream, dim);
        let ground =
            StateFunctional::from_density(model.ground_projector().clone()).unwrap();
        let phi0 = sample_physical_state(&ground, trial as u64);
        let report = ergodicity_check(&model, &a, &phi0).unwrap();
        assert!(
            (report.time_average_value - report.compression_value).abs() <= 1e-10,
            "trial {trial}: {report:?}"
        );
        assert!(report.remainder_value.abs() <= 1e-10, "trial {trial}");
        assert!(report.pass);
    }
}

#[test]
fn ergodicity_is_independent_of_the_ground_state_choice() {
    let mut stream = Stream::from_parts(&[b"ergodicity-independence"]);
    for trial in 0..10 {
        let dim = 2 + (trial % 3);
        let model = random_model(&mut stream, dim);
        let a = random_hermitian(&mut stream, dim);
        let ground =
            StateFunctional::from_density(model.ground_projector().clone()).unwrap();
        let r1 = ergodicity_check(&model, &a, &sample_physical_state(&ground, 1)).unwrap();
        let r2 = ergodicity_check(&model, &a, &sample_physical_state(&ground, 2)).unwrap();
        assert_eq!(
            r1.time_average_value.to_bits(),
            r2.time_average_value.to_bits()
        );
    }
}
