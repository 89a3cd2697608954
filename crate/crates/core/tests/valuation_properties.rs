//! Valuation property suites: spectrum membership, per-context
//! homomorphism, reproducibility, and colorability of two-level context
//! sets.

mod common;

use common::random_nondegenerate_hermitian;
use opalg::contexts::{context_of, Context};
use opalg::ensemble::{sample_physical_state, StateFunctional};
use opalg::rng::Stream;
use opalg::valuation::{
    check_valuation_properties, evaluate, ks_search, DeviceType, KsOutcome,
};
use opalg::{eig_hermitian_default, ComplexMatrix};
use proptest::prelude::*;

#[test]
fn thousand_random_valuations_stay_on_the_spectrum() {
    let mut stream = Stream::from_parts(&[b"spectrum-membership"]);
    for trial in 0..1000 {
        let dim = 2 + (trial % 4); // dims 2..=5
        let generator = random_nondegenerate_hermitian(&mut stream, dim);
        let context = context_of(&generator).unwrap();
        let device = DeviceType::new("d", context.clone());
        let phi = sample_physical_state(&StateFunctional::maximally_mixed(dim), trial as u64);

        // Random observable inside the context.
        let coeffs: Vec<f64> = (0..dim).map(|_| stream.next_in(-2.0, 2.0)).collect();
        let mut a = ComplexMatrix::zeros(dim);
        for (c, p) in coeffs.iter().zip(context.frame()) {
            a = &a + &p.scale_re(*c);
        }

        let value = evaluate(&phi, &a, &device).unwrap();
        let sd = eig_hermitian_default(&a).unwrap();
        assert!(
            sd.spectrum_distance(value) <= 1e-8,
            "trial {trial}: value {value} off the spectrum"
        );

        // Per-context homomorphism and additivity.
        let coeffs2: Vec<f64> = (0..dim).map(|_| stream.next_in(-2.0, 2.0)).collect();
        let mut b = ComplexMatrix::zeros(dim);
        for (c, p) in coeffs2.iter().zip(context.frame()) {
            b = &b + &p.scale_re(*c);
        }
        let vb = evaluate(&phi, &b, &device).unwrap();
        let vab = evaluate(&phi, &(&a * &b), &device).unwrap();
        assert!((vab - value * vb).abs() <= 1e-8);
        let vsum = evaluate(&phi, &(&a + &b), &device).unwrap();
        assert!((vsum - value - vb).abs() <= 1e-8);
    }
}

#[test]
fn property_report_passes_across_dimensions_and_states() {
    let mut stream = Stream::from_parts(&[b"property-report"]);
    for dim in 2..=5 {
        let generator = random_nondegenerate_hermitian(&mut stream, dim);
        let context = context_of(&generator).unwrap();
        for seed in 0..3 {
            let phi = sample_physical_state(&StateFunctional::maximally_mixed(dim), seed);
            let report = check_valuation_properties(&phi, &context, 40).unwrap();
            assert!(report.pass, "dim {dim} seed {seed}: {report:?}");
        }
    }
}

#[test]
fn every_spectral_point_is_realized_by_some_outcome() {
    let mut stream = Stream::from_parts(&[b"spectral-coverage"]);
    for dim in 2..=5 {
        let generator = random_nondegenerate_hermitian(&mut stream, dim);
        let context = context_of(&generator).unwrap();
        let device = DeviceType::new("d", context.clone());
        let a = generator;
        let sd = eig_hermitian_default(&a).unwrap();
        // One greedy state per outcome index reaches every eigenvalue.
        let mut reached: Vec<f64> = (0..dim)
            .map(|k| {
                let phi = opalg::valuation::construct_greedy(
                    std::slice::from_ref(&context),
                    &mut |_, _, _| k,
                )
                .unwrap();
                evaluate(&phi, &a, &device).unwrap()
            })
            .collect();
        reached.sort_by(f64::total_cmp);
        for (lambda, r) in sd.eigenvalues().iter().zip(&reached) {
            assert!((lambda - r).abs() <= 1e-8);
        }
    }
}

#[test]
fn separation_witness_gap_meets_the_dimensional_bound() {
    // The witnessed outcome separates the two observables by at least
    // the spectral-norm distance divided by the dimension.
    let mut stream = Stream::from_parts(&[b"separation-bound"]);
    for trial in 0..50 {
        let dim = 2 + (trial % 4);
        let a1 = common::random_hermitian(&mut stream, dim);
        let a2 = common::random_hermitian(&mut stream, dim);
        let distance = opalg::cstar_norm(&(&a1 - &a2));
        match opalg::valuation::separation_witness(&a1, &a2).unwrap() {
            Some((ctx, k)) => {
                let gap = (ctx.coefficients(&a1)[k] - ctx.coefficients(&a2)[k]).abs();
                assert!(
                    gap + 1e-9 >= distance / dim as f64,
                    "trial {trial}: gap {gap} below {}",
                    distance / dim as f64
                );
            }
            None => assert!(distance <= 1e-7, "trial {trial}: missed separation"),
        }
    }
}

#[test]
fn ks_search_agrees_with_witness_validity() {
    // Any witness ks_search returns must satisfy the sharing constraints
    // it was searched under.
    let dirs: [[f64; 3]; 6] = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.6, 0.0, 0.8],
        [0.0, 0.6, 0.8],
        [0.36, 0.48, 0.8],
    ];
    let contexts: Vec<Context> = dirs
        .iter()
        .map(|&n| context_of(&ComplexMatrix::pauli_axis(n)).unwrap())
        .collect();
    match ks_search(&contexts) {
        KsOutcome::Witness(w) => {
            assert_eq!(w.len(), contexts.len());
            for (c1, ctx1) in contexts.iter().enumerate() {
                for (c2, ctx2) in contexts.iter().enumerate().skip(c1 + 1) {
                    for (p1, p) in ctx1.frame().iter().enumerate() {
                        for (p2, q) in ctx2.frame().iter().enumerate() {
                            if (p - q).frobenius_norm() <= 1e-9 {
                                assert_eq!(w[c1] == p1, w[c2] == p2);
                            }
                        }
                    }
                }
            }
        }
        KsOutcome::Obstruction => panic!("two-level sets are always colorable"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Random antipodally closed two-level direction sets (up to 12
    /// contexts) always admit a witness.
    #[test]
    fn ks_never_obstructs_in_dimension_two(seed in any::<u64>(), pairs in 1usize..=6) {
        let mut stream = Stream::from_parts(&[b"ks-dim2", &seed.to_le_bytes()]);
        let mut contexts = Vec::new();
        for _ in 0..pairs {
            let theta = stream.next_in(0.0, std::f64::consts::PI);
            let phi_angle = stream.next_in(0.0, 2.0 * std::f64::consts::PI);
            let n = [
                theta.sin() * phi_angle.cos(),
                theta.sin() * phi_angle.sin(),
                theta.cos(),
            ];
            let minus = [-n[0], -n[1], -n[2]];
            contexts.push(context_of(&ComplexMatrix::pauli_axis(n)).unwrap());
            contexts.push(context_of(&ComplexMatrix::pauli_axis(minus)).unwrap());
        }
        prop_assert!(matches!(ks_search(&contexts), KsOutcome::Witness(_)));
    }

    /// Getter-observable identity: evaluating the same observable twice
    /// through the same device is bit-identical.
    #[test]
    fn evaluation_is_reproducible(seed in any::<u64>()) {
        let mut stream = Stream::from_parts(&[b"eval-repro", &seed.to_le_bytes()]);
        let generator = random_nondegenerate_hermitian(&mut stream, 3);
        let context = context_of(&generator).unwrap();
        let device = DeviceType::new("d", context);
        let phi = sample_physical_state(&StateFunctional::maximally_mixed(3), seed);
        let v1 = evaluate(&phi, &generator, &device).unwrap();
        let v2 = evaluate(&phi, &generator, &device).unwrap();
        prop_assert_eq!(v1.to_bits(), v2.to_bits());
    }
}
