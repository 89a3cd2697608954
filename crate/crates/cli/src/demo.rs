//! The two-level worked example: a 2×2 Hamiltonian with a nondegenerate
//! level, a generic Hermitian observable, and the closed-form identities
//! tying the compression functional, the time average, the Bloch
//! decomposition, and ground valuations together.

use num_complex::Complex64;
use opalg::contexts::context_of;
use opalg::dynamics::{compress, ergodicity_check, time_average, HamiltonianModel};
use opalg::ensemble::{sample_physical_state, StateFunctional};
use opalg::valuation::{construct_greedy, evaluate, DeviceType};
use opalg::ComplexMatrix;

const TOL: f64 = 1e-10;

/// `n · τ` in the convention the component formulas below assume:
/// `τ₂ = [[0, i], [−i, 0]]` (the transpose of the more common choice), so
/// that the (0,1) entry of `r·τ(n)` is exactly `b`.
fn tau_axis(n: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_rows(vec![
        vec![Complex64::new(n[2], 0.0), Complex64::new(n[0], n[1])],
        vec![Complex64::new(n[0], -n[1]), Complex64::new(-n[2], 0.0)],
    ])
    .unwrap()
}

struct Checks {
    all_pass: bool,
}

impl Checks {
    fn assert(&mut self, label: &str, detail: String, ok: bool) {
        println!("  {label}: {detail}  {}", if ok { "PASS" } else { "FAIL" });
        self.all_pass &= ok;
    }
}

/// Runs the demo with a = 2, b = 0.5+0.25i, d = −3, E0 = 1 (the inputs are
/// arbitrary; the identities are what is being demonstrated). Returns
/// whether every assertion held within 1e−10.
pub fn run() -> bool {
    let (a_val, d_val, e0) = (2.0, -3.0, 1.0);
    let b_val = Complex64::new(0.5, 0.25);

    println!("two-level demo: a = {a_val}, b = {b_val}, d = {d_val}, E0 = {e0}");

    let observable = ComplexMatrix::from_rows(vec![
        vec![Complex64::new(a_val, 0.0), b_val],
        vec![b_val.conj(), Complex64::new(d_val, 0.0)],
    ])
    .unwrap();
    let h = ComplexMatrix::diag(&[e0, -e0]);
    // Eigenvalues are sorted ascending, so −E0 sits at index 0.
    let model = HamiltonianModel::new(h, 0).unwrap();
    let p0 = model.ground_projector().clone();

    let mut checks = Checks { all_pass: true };

    // Compression functional at the ground projector picks out d.
    let psi0 = compress(&p0, &observable).unwrap();
    checks.assert(
        "compression Psi0(A)",
        format!("{psi0:.10} (expect d = {d_val})"),
        (psi0 - d_val).abs() <= TOL,
    );

    // Time average kills the off-diagonal block.
    let averaged = time_average(&model, &observable);
    let expected_avg = ComplexMatrix::diag(&[a_val, d_val]);
    let avg_residual = (&averaged - &expected_avg).frobenius_norm();
    checks.assert(
        "time average Abar",
        format!(
            "diag({:.10}, {:.10}) (expect diag(a, d))",
            averaged.at(0, 0).re,
            averaged.at(1, 1).re
        ),
        avg_residual <= TOL,
    );

    // Bloch decomposition A = r0·I + r·(n·σ), recomputed from scratch.
    let r0 = (a_val + d_val) / 2.0;
    let r = ((a_val - d_val) * (a_val - d_val) / 4.0 + (b_val * b_val.conj()).re).sqrt();
    let n = [
        (b_val + b_val.conj()).re / (2.0 * r),
        ((b_val - b_val.conj()) / Complex64::new(0.0, 2.0 * r)).re,
        (a_val - d_val) / (2.0 * r),
    ];
    let reconstructed = &ComplexMatrix::identity(2).scale_re(r0) + &tau_axis(n).scale_re(r);
    let unit_defect = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2] - 1.0).abs();
    checks.assert(
        "bloch split",
        format!(
            "r0 = {r0:.10}, r = {r:.10}, n = ({:.10}, {:.10}, {:.10})",
            n[0], n[1], n[2]
        ),
        (&reconstructed - &observable).frobenius_norm() <= TOL && unit_defect <= TOL,
    );

    // Valuations on the context of n·τ take the values r0 ± r.
    let axis_ctx = context_of(&tau_axis(n)).unwrap();
    let device = DeviceType::new("axis", axis_ctx.clone());
    let mut values: Vec<f64> = (0..2)
        .map(|k| {
            let phi =
                construct_greedy(std::slice::from_ref(&axis_ctx), &mut |_, _, _| k).unwrap();
            evaluate(&phi, &observable, &device).unwrap()
        })
        .collect();
    values.sort_by(f64::total_cmp);
    checks.assert(
        "valuation phi(A) = r0 + r*f",
        format!("f = -1 -> {:.10}, f = +1 -> {:.10}", values[0], values[1]),
        (values[0] - (r0 - r)).abs() <= TOL && (values[1] - (r0 + r)).abs() <= TOL,
    );

    // A ground valuation gives Abar the value d, matching Psi0(A).
    let ground = StateFunctional::from_density(p0).unwrap();
    let phi0 = sample_physical_state(&ground, 0);
    let ergo = ergodicity_check(&model, &observable, &phi0).unwrap();
    checks.assert(
        "ground value phi0(Abar)",
        format!(
            "{:.10} (expect Psi0(A) = {:.10})",
            ergo.time_average_value, ergo.compression_value
        ),
        ergo.pass
            && (ergo.time_average_value - d_val).abs() <= TOL
            && ergo.remainder_value.abs() <= TOL,
    );

    if checks.all_pass {
        println!("all demo checks passed");
    } else {
        println!("demo checks FAILED");
    }
    checks.all_pass
}
