//! Dispatch from parsed CLI actions to the library operations, and
//! assembly of the per-action report bodies.

use serde_json::json;

use opalg::dynamics::{ergodicity_check, time_average, time_average_quadrature};
use opalg::ensemble::{
    expected_value, monte_carlo_average, representativity_test, sample_physical_state,
    StateFunctional,
};
use opalg::gns::{gns_construct, gns_verify};
use opalg::valuation::{ks_search, DeviceType, KsOutcome};
use opalg::{cstar_norm, ComplexMatrix};

use crate::problem::{Params, Problem};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Average,
    Representativity,
    Timeavg,
    Ergodicity,
    Gns,
    Ks,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Average => "average",
            ActionKind::Representativity => "representativity",
            ActionKind::Timeavg => "timeavg",
            ActionKind::Ergodicity => "ergodicity",
            ActionKind::Gns => "gns",
            ActionKind::Ks => "ks",
        }
    }
}

/// Effective run parameters: command line over file over defaults.
struct Effective {
    n: u64,
    seed: u64,
    half_width: Option<f64>,
    steps: Option<usize>,
    observable: Option<String>,
    device: Option<String>,
    tol_override: Option<f64>,
}

fn resolve(action: ActionKind, cli: &Params, file: &Params) -> Effective {
    let default_n = match action {
        ActionKind::Gns => 200, // verification trials
        _ => 10_000,
    };
    Effective {
        n: cli.n.or(file.n).unwrap_or(default_n),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        half_width: cli.half_width.or(file.half_width),
        steps: cli.steps.or(file.steps),
        observable: cli.observable.clone().or_else(|| file.observable.clone()),
        device: cli.device.clone().or_else(|| file.device.clone()),
        tol_override: cli.tol_override.or(file.tol_override),
    }
}

fn params_json(
    problem: &Problem,
    action: ActionKind,
    eff: &Effective,
    problem_path: &str,
) -> serde_json::Value {
    json!({
        "problem": problem_path,
        "dim": problem.dim,
        "action": action.name(),
        "n": eff.n,
        "seed": eff.seed,
        "L": eff.half_width,
        "steps": eff.steps,
        "observable": eff.observable,
        "device": eff.device,
        "tol_override": eff.tol_override,
    })
}

fn named_observable<'p>(
    problem: &'p Problem,
    eff: &'p Effective,
) -> Result<(&'p str, &'p ComplexMatrix), String> {
    let name = eff
        .observable
        .as_deref()
        .ok_or("no observable selected: set params.observable in the problem file")?;
    Ok((name, problem.observable(name)?))
}

fn selected_device(problem: &Problem, eff: &Effective) -> Result<DeviceType, String> {
    let named = match &eff.device {
        Some(label) => problem.device(label)?,
        None => problem
            .devices
            .first()
            .ok_or("the problem file declares no devices")?,
    };
    Ok(DeviceType::new(named.label.clone(), named.context.clone()))
}

pub fn execute(
    problem: &Problem,
    problem_path: &str,
    action: ActionKind,
    cli_params: &Params,
) -> Result<Report, String> {
    let eff = resolve(action, cli_params, &problem.params);
    let params = params_json(problem, action, &eff, problem_path);

    let (result, pass) = match action {
        ActionKind::Average => run_average(problem, &eff)?,
        ActionKind::Representativity => run_representativity(problem, &eff)?,
        ActionKind::Timeavg => run_timeavg(problem, &eff)?,
        ActionKind::Ergodicity => run_ergodicity(problem, &eff)?,
        ActionKind::Gns => run_gns(problem, &eff)?,
        ActionKind::Ks => run_ks(problem)?,
    };

    Ok(Report {
        command: format!("run {}", action.name()),
        params,
        result,
        pass,
    })
}

fn run_average(problem: &Problem, eff: &Effective) -> Result<(serde_json::Value, bool), String> {
    let state = problem.require_state()?;
    let (name, a) = named_observable(problem, eff)?;
    let device = selected_device(problem, eff)?;
    let stats =
        monte_carlo_average(state, a, &device, eff.n, eff.seed).map_err(|e| e.to_string())?;
    let oracle = expected_value(state, a).map_err(|e| e.to_string())?;
    let atol = eff.tol_override.unwrap_or(1e-9);
    let pass = (stats.mean - oracle).abs() <= (5.0 * stats.standard_error()).max(atol);
    let result = json!({
        "state": state,
        "observable": name,
        "observable_key": a.canonical_key(),
        "device": device.label(),
        "n": stats.count,
        "seed": stats.seed,
        "mean": stats.mean,
        "stderr": stats.standard_error(),
        "oracle": oracle,
        "pass": pass,
    });
    Ok((result, pass))
}

fn run_representativity(
    problem: &Problem,
    eff: &Effective,
) -> Result<(serde_json::Value, bool), String> {
    let state = problem.require_state()?;
    let (name, a) = named_observable(problem, eff)?;
    let devices: Vec<DeviceType> = problem
        .devices
        .iter()
        .map(|d| DeviceType::new(d.label.clone(), d.context.clone()))
        .collect();
    let report =
        representativity_test(state, a, &devices, eff.n, eff.seed).map_err(|e| e.to_string())?;
    let pass = report.pass;
    let result = json!({
        "observable": name,
        "n": eff.n,
        "seed": eff.seed,
        "report": report,
    });
    Ok((result, pass))
}

fn run_timeavg(problem: &Problem, eff: &Effective) -> Result<(serde_json::Value, bool), String> {
    let model = problem.require_hamiltonian()?;
    let (name, a) = named_observable(problem, eff)?;

    let gap = model.spectral().min_gap().unwrap_or(1.0);
    let half_width = eff.half_width.unwrap_or(200.0 / gap);
    let h_norm = cstar_norm(model.hamiltonian()).max(1e-12);
    let default_steps = (2.0 * half_width / (0.05 / h_norm)).ceil() as usize;
    let steps = eff.steps.unwrap_or(default_steps.max(2));

    let quadrature =
        time_average_quadrature(model, a, half_width, steps).map_err(|e| e.to_string())?;
    let pinched = time_average(model, a);
    let residual = cstar_norm(&(&quadrature - &pinched));
    let tolerance = eff.tol_override.unwrap_or(0.05);
    let pass = residual <= tolerance;
    let result = json!({
        "observable": name,
        "L": half_width,
        "steps": steps,
        "residual": residual,
        "tol": tolerance,
        "time_average": pinched,
        "quadrature": quadrature,
    });
    Ok((result, pass))
}

fn run_ergodicity(problem: &Problem, eff: &Effective) -> Result<(serde_json::Value, bool), String> {
    let model = problem.require_hamiltonian()?;
    let (name, a) = named_observable(problem, eff)?;
    let ground = StateFunctional::from_density(model.ground_projector().clone())
        .map_err(|e| e.to_string())?;
    let phi0 = sample_physical_state(&ground, eff.seed);
    let report = ergodicity_check(model, a, &phi0).map_err(|e| e.to_string())?;
    let tolerance = eff.tol_override.unwrap_or(1e-10);
    let pass = (report.time_average_value - report.compression_value).abs() <= tolerance
        && report.remainder_value.abs() <= tolerance;
    let result = json!({
        "observable": name,
        "seed": eff.seed,
        "ground_energy": model.ground_energy(),
        "tol": tolerance,
        "report": report,
    });
    Ok((result, pass))
}

fn run_gns(problem: &Problem, eff: &Effective) -> Result<(serde_json::Value, bool), String> {
    let state = problem.require_state()?;
    let rep = gns_construct(state).map_err(|e| e.to_string())?;
    let trials = eff.n as usize;
    let report = gns_verify(&rep, trials);
    let pass = match eff.tol_override {
        None => report.pass,
        Some(t) => {
            report.max_inner_product_residual <= t
                && report.max_homomorphism_residual <= t
                && report.max_adjoint_residual <= t
                && report.unit_residual <= t
                && report.max_cyclic_residual <= t
                && report.max_contraction_excess <= t
        }
    };
    let observables: Vec<(String, ComplexMatrix)> = problem
        .observables
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let dump = rep.dump(&observables).map_err(|e| e.to_string())?;
    let result = json!({
        "representation": dump,
        "verification": report,
    });
    Ok((result, pass))
}

fn run_ks(problem: &Problem) -> Result<(serde_json::Value, bool), String> {
    if problem.devices.is_empty() {
        return Err("ks needs at least one device context".into());
    }
    let contexts: Vec<_> = problem.devices.iter().map(|d| d.context.clone()).collect();
    let labels: Vec<&str> = problem.devices.iter().map(|d| d.label.as_str()).collect();
    let outcome = ks_search(&contexts);
    let (witness, obstruction) = match &outcome {
        KsOutcome::Witness(w) => (Some(w.clone()), false),
        KsOutcome::Obstruction => (None, true),
    };
    let pass = !obstruction;
    let result = json!({
        "contexts": labels,
        "witness": witness,
        "obstruction": obstruction,
    });
    Ok((result, pass))
}
