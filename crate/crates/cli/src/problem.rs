//! Problem-file ingestion: schema, parsing with field diagnostics, and
//! load-time validation of every matrix in the file.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use opalg::contexts::{context_of, Context};
use opalg::dynamics::HamiltonianModel;
use opalg::ensemble::StateFunctional;
use opalg::matalg::parse_complex_vector;
use opalg::{tol, ComplexMatrix};
use serde::Deserialize;

/// A fully parsed and validated problem file.
pub struct Problem {
    pub dim: usize,
    pub observables: BTreeMap<String, ComplexMatrix>,
    pub hamiltonian: Option<HamiltonianModel>,
    pub state: Option<StateFunctional>,
    pub devices: Vec<NamedContext>,
    pub params: Params,
}

pub struct NamedContext {
    pub label: String,
    pub context: Context,
}

/// Run parameters from the file; command-line flags override these, and
/// built-in defaults fill whatever remains.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: Option<u64>,
    pub seed: Option<u64>,
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    pub steps: Option<usize>,
    pub observable: Option<String>,
    pub device: Option<String>,
    pub tol_override: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dim: usize,
    #[serde(default)]
    observables: BTreeMap<String, ComplexMatrix>,
    hamiltonian: Option<RawHamiltonian>,
    state: Option<RawState>,
    #[serde(default)]
    devices: Vec<RawDevice>,
    #[serde(default)]
    params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    #[serde(rename = "H")]
    h: ComplexMatrix,
    ground_index: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    density: Option<ComplexMatrix>,
    pure: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    label: String,
    /// Hermitian generator matrix; the device context is its eigenframe.
    context: ComplexMatrix,
}

/// Loads and validates a problem file. Every error message names the
/// offending file and, for JSON syntax errors, the line and column.
pub fn load(path: &Path) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let raw: RawProblem = serde_json::from_str(&text)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    validate(raw).map_err(|e| format!("{}: {e}", path.display()))
}

fn validate(raw: RawProblem) -> Result<Problem, String> {
    let dim = raw.dim;
    if dim == 0 {
        return Err("dim must be positive".into());
    }

    let mut observables = BTreeMap::new();
    for (name, m) in raw.observables {
        if m.dim() != dim {
            return Err(format!("observable `{name}`: dimension {} != {dim}", m.dim()));
        }
        m.require_hermitian(tol::TAU_HERM)
            .map_err(|e| format!("observable `{name}`: {e}"))?;
        observables.insert(name, m);
    }

    let hamiltonian = raw
        .hamiltonian
        .map(|h| {
            if h.h.dim() != dim {
                return Err(format!("hamiltonian: dimension {} != {dim}", h.h.dim()));
            }
            HamiltonianModel::new(h.h, h.ground_index).map_err(|e| format!("hamiltonian: {e}"))
        })
        .transpose()?;

    let state = raw
        .state
        .map(|s| -> Result<StateFunctional, String> {
            let state = match (s.density, s.pure) {
                (Some(d), None) => StateFunctional::from_density(d),
                (None, Some(v)) => {
                    let ket: Vec<Complex64> =
                        parse_complex_vector(&v).map_err(|e| format!("state.pure: {e}"))?;
                    if ket.len() != dim {
                        return Err(format!("state.pure: length {} != {dim}", ket.len()));
                    }
                    StateFunctional::pure_from_vector(&ket)
                }
                _ => return Err("state needs exactly one of `density` or `pure`".into()),
            }
            .map_err(|e| format!("state: {e}"))?;
            if state.dim() != dim {
                return Err(format!("state: dimension {} != {dim}", state.dim()));
            }
            Ok(state)
        })
        .transpose()?;

    let mut devices = Vec::new();
    for d in raw.devices {
        if d.context.dim() != dim {
            return Err(format!("device `{}`: dimension {} != {dim}", d.label, d.context.dim()));
        }
        let context =
            context_of(&d.context).map_err(|e| format!("device `{}`: {e}", d.label))?;
        devices.push(NamedContext {
            label: d.label,
            context,
        });
    }

    Ok(Problem {
        dim,
        observables,
        hamiltonian,
        state,
        devices,
        params: raw.params,
    })
}

impl Problem {
    pub fn observable(&self, name: &str) -> Result<&ComplexMatrix, String> {
        self.observables
            .get(name)
            .ok_or_else(|| format!("no observable named `{name}` in the problem file"))
    }

    pub fn device(&self, label: &str) -> Result<&NamedContext, String> {
        self.devices
            .iter()
            .find(|d| d.label == label)
            .ok_or_else(|| format!("no device labeled `{label}` in the problem file"))
    }

    pub fn require_state(&self) -> Result<&StateFunctional, String> {
        self.state
            .as_ref()
            .ok_or_else(|| "this command needs a `state` section".to_string())
    }

    pub fn require_hamiltonian(&self) -> Result<&HamiltonianModel, String> {
        self.hamiltonian
            .as_ref()
            .ok_or_else(|| "this command needs a `hamiltonian` section".to_string())
    }
}
