//! Physical-state valuations: functionals on observables whose restriction
//! to each context is a real homomorphism. A valuation fixes one outcome
//! per context; across contexts it may be multivalued, with the competing
//! values indexed by device type. Includes the greedy construction with
//! the max-prefix consistency rule, permutation closure of device-indexed
//! values, a Kochen–Specker obstruction search, and the separation
//! witness.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use serde_json::json;

use crate::contexts::{completing_context, contains, intersection, Context};
use crate::ensemble::born_probs_of_density;
use crate::error::{Error, Result};
use crate::matalg::{cstar_norm, eig_hermitian_default, ComplexMatrix};
use crate::rng::{context_uniform, Stream};
use crate::tol;

/// A measuring device: a label plus the context (maximal commutative
/// subalgebra) the device is compatible with.
#[derive(Debug, Clone)]
pub struct DeviceType {
    label: String,
    context: Context,
}

impl DeviceType {
    pub fn new(label: impl Into<String>, context: Context) -> Self {
        DeviceType {
            label: label.into(),
            context,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn context(&self) -> &Context {
        &self.context
    }
}

/// How a valuation responds to a context it has no assignment for.
#[derive(Debug, Clone)]
enum Extension {
    /// Unassigned contexts are an error.
    Disabled,
    /// Draw the outcome from the Born distribution of a stored density,
    /// using the stream keyed by (seed, canonical context key). When the
    /// density is pure and some frame member carries essentially all the
    /// probability, that outcome is taken with probability one.
    Born {
        density: ComplexMatrix,
        pure: bool,
        seed: u64,
    },
}

/// A physical-state valuation.
///
/// `assignments` maps canonical context keys to the chosen outcome index;
/// `device_values` holds the device-indexed value lists that arise where
/// the valuation is multivalued. States extend lazily (and cache the
/// result) when built by sampling, so they behave as total functionals;
/// confine a state to one thread during evaluation, or clone it per
/// thread.
#[derive(Debug, Clone)]
pub struct PhysicalState {
    dim: usize,
    assignments: RefCell<HashMap<String, usize>>,
    device_values: BTreeMap<(String, String), f64>,
    extension: Extension,
    provenance: String,
}

impl PhysicalState {
    pub(crate) fn born_sampled(density: ComplexMatrix, pure: bool, seed: u64) -> Self {
        let dim = density.dim();
        PhysicalState {
            dim,
            assignments: RefCell::new(HashMap::new()),
            device_values: BTreeMap::new(),
            extension: Extension::Born {
                density,
                pure,
                seed,
            },
            provenance: format!("born-sampled(seed={seed})"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// The outcome index already fixed for a context, if any.
    pub fn assignment_for(&self, context: &Context) -> Option<usize> {
        self.assignments
            .borrow()
            .get(context.canonical_key())
            .copied()
    }

    /// Device-indexed values recorded for an observable, if any.
    pub fn device_value(&self, observable: &ComplexMatrix, device_label: &str) -> Option<f64> {
        self.device_values
            .get(&(observable.canonical_key(), device_label.to_string()))
            .copied()
    }

    /// Fixes (or lazily extends to) the outcome on a context.
    fn ensure_assignment(&self, context: &Context) -> Result<usize> {
        if let Some(k) = self.assignment_for(context) {
            return Ok(k);
        }
        let k = match &self.extension {
            Extension::Disabled => return Err(Error::MissingAssignment),
            Extension::Born {
                density,
                pure,
                seed,
            } => {
                let probs = born_probs_of_density(density, context)?;
                let aligned = probs
                    .iter()
                    .enumerate()
                    .find(|(_, p)| **p >= 1.0 - 1e-9)
                    .map(|(k, _)| k);
                match (pure, aligned) {
                    // Stability on the subalgebra of the quantum state:
                    // a context resolving the pure projector always yields
                    // the aligned outcome.
                    (true, Some(k)) => k,
                    _ => {
                        let u = context_uniform(*seed, context.canonical_key());
                        let mut acc = 0.0;
                        let mut chosen = probs.len() - 1;
                        for (k, p) in probs.iter().enumerate() {
                            acc += p;
                            if u < acc {
                                chosen = k;
                                break;
                            }
                        }
                        chosen
                    }
                }
            }
        };
        self.assignments
            .borrow_mut()
            .insert(context.canonical_key().to_string(), k);
        Ok(k)
    }

    /// Reproducibility dump: canonical keys, outcome indices, and the
    /// device-indexed value table.
    pub fn dump(&self) -> serde_json::Value {
        let assignments: BTreeMap<String, usize> = self.assignments.borrow().clone().into_iter().collect();
        json!({
            "dim": self.dim,
            "provenance": self.provenance,
            "assignments": assignments
                .iter()
                .map(|(key, index)| json!({"context_key": key, "index": index}))
                .collect::<Vec<_>>(),
            "device_values": self.device_values
                .iter()
                .map(|((obs, dev), value)| json!({
                    "observable_key": obs,
                    "device": dev,
                    "value": value,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

/// The value an observable takes in a physical state, as registered by a
/// device of the given type.
///
/// The result is the spectral coefficient of `A` at the outcome the state
/// assigns to the device's context, hence always a point of the spectrum
/// of `A`. Device-indexed overrides (multivalued entries) take precedence,
/// so permuted states respond differently to different device types.
pub fn evaluate(phi: &PhysicalState, a: &ComplexMatrix, device: &DeviceType) -> Result<f64> {
    a.require_hermitian(tol::TAU_HERM)?;
    if phi.dim != device.context().dim() {
        return Err(Error::DimensionMismatch {
            left: phi.dim,
            right: device.context().dim(),
        });
    }
    if !contains(device.context(), a)? {
        return Err(Error::IncompatibleDevice {
            label: device.label.clone(),
        });
    }
    if let Some(v) = phi
        .device_values
        .get(&(a.canonical_key(), device.label.clone()))
    {
        return Ok(*v);
    }
    let k = phi.ensure_assignment(device.context())?;
    Ok(device.context().frame()[k].trace_product(a).re)
}

/// Selector that always picks the first allowed outcome.
pub fn first_allowed_selector() -> impl FnMut(usize, &Context, &[usize]) -> usize {
    |_, _, allowed| allowed[0]
}

/// Selector drawing uniformly from the allowed outcomes, keyed by a seed,
/// the position of the context in the construction order, and the context
/// itself.
pub fn seeded_selector(seed: u64) -> impl FnMut(usize, &Context, &[usize]) -> usize {
    move |pos, ctx, allowed| {
        let mut stream = Stream::from_parts(&[
            &seed.to_le_bytes(),
            b"selector",
            &(pos as u64).to_le_bytes(),
            ctx.canonical_key().as_bytes(),
        ]);
        allowed[(stream.next_u64() % allowed.len() as u64) as usize]
    }
}

/// Greedy construction of a valuation over an ordered list of contexts.
///
/// Contexts are processed in order. For each new context the outcomes of
/// the previously fixed contexts induce 0/1 values on the projectors of
/// the pairwise intersections; the longest prefix of prior contexts whose
/// induced values jointly leave at least one admissible outcome is
/// honored, and the selector picks among the remaining outcomes. Prior
/// contexts beyond that prefix whose induced values disagree with the
/// chosen outcome leave device-indexed entries in the value table: that
/// is where the valuation becomes multivalued, and the ambiguity is
/// minimal in the sense that it never appears before consistency has
/// actually failed.
///
/// The implicit device label of the i-th context is `ctx{i}`.
pub fn construct_greedy(
    ordered_contexts: &[Context],
    selector: &mut dyn FnMut(usize, &Context, &[usize]) -> usize,
) -> Result<PhysicalState> {
    if ordered_contexts.is_empty() {
        return Err(Error::EmptyContexts);
    }
    let dim = ordered_contexts[0].dim();
    for c in ordered_contexts {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: c.dim(),
            });
        }
    }

    let mut assignments: HashMap<String, usize> = HashMap::new();
    let mut device_values: BTreeMap<(String, String), f64> = BTreeMap::new();
    // (position, context, chosen outcome), in construction order.
    let mut fixed: Vec<(usize, &Context, usize)> = Vec::new();

    for (pos, ctx) in ordered_contexts.iter().enumerate() {
        if assignments.contains_key(ctx.canonical_key()) {
            continue; // a repeat imposes nothing new
        }

        let mut candidates: Vec<usize> = (0..dim).collect();
        let mut break_at: Option<usize> = None; // index into `fixed`

        for (fi, (_, prior_ctx, prior_idx)) in fixed.iter().enumerate() {
            let blocks = intersection(prior_ctx, ctx)?;
            if blocks.len() == 1 {
                continue; // trivial intersection constrains nothing
            }
            let surviving: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&j| {
                    blocks.iter().all(|b| {
                        let prior_val = prior_ctx.frame()[*prior_idx].trace_product(b).re > 0.5;
                        let new_val = ctx.frame()[j].trace_product(b).re > 0.5;
                        prior_val == new_val
                    })
                })
                .collect();
            if surviving.is_empty() {
                break_at = Some(fi);
                break;
            }
            candidates = surviving;
        }

        let chosen = selector(pos, ctx, &candidates);
        if !candidates.contains(&chosen) {
            return Err(Error::SelectorOutOfRange {
                index: chosen,
                allowed: candidates,
            });
        }
        assignments.insert(ctx.canonical_key().to_string(), chosen);

        // Priors beyond the consistent prefix that actually disagree with
        // the chosen outcome get device-indexed values on the disputed
        // intersection projectors.
        if let Some(start) = break_at {
            for (prior_pos, prior_ctx, prior_idx) in fixed[start..].iter() {
                let blocks = intersection(prior_ctx, ctx)?;
                for b in &blocks {
                    let prior_val = prior_ctx.frame()[*prior_idx].trace_product(b).re > 0.5;
                    let new_val = ctx.frame()[chosen].trace_product(b).re > 0.5;
                    if prior_val != new_val {
                        let key = b.canonical_key();
                        device_values.insert(
                            (key.clone(), format!("ctx{prior_pos}")),
                            if prior_val { 1.0 } else { 0.0 },
                        );
                        device_values.insert(
                            (key, format!("ctx{pos}")),
                            if new_val { 1.0 } else { 0.0 },
                        );
                    }
                }
            }
        }

        fixed.push((pos, ctx, chosen));
    }

    Ok(PhysicalState {
        dim,
        assignments: RefCell::new(assignments),
        device_values,
        extension: Extension::Disabled,
        provenance: "greedy".into(),
    })
}

/// All states obtained by permuting an observable's device-indexed value
/// list across the given devices, each agreeing with `phi` elsewhere.
///
/// The orbit size is the number of distinct permutations of the value
/// multiset; it always contains `phi` itself (the identity permutation).
pub fn permutation_closure(
    phi: &PhysicalState,
    observable: &ComplexMatrix,
    devices: &[DeviceType],
) -> Result<Vec<PhysicalState>> {
    if devices.len() > 8 {
        return Err(Error::InvalidParameter(format!(
            "permutation closure over {} devices would enumerate up to {}! states",
            devices.len(),
            devices.len()
        )));
    }
    let obs_key = observable.canonical_key();
    let values: Vec<f64> = devices
        .iter()
        .map(|d| {
            phi.device_values
                .get(&(obs_key.clone(), d.label.clone()))
                .copied()
                .ok_or_else(|| Error::MissingDeviceValue {
                    label: d.label.clone(),
                })
        })
        .collect::<Result<_>>()?;

    let orbit_values = distinct_permutations(&values);
    Ok(orbit_values
        .into_iter()
        .map(|perm| {
            let mut state = phi.clone();
            for (device, value) in devices.iter().zip(perm) {
                state
                    .device_values
                    .insert((obs_key.clone(), device.label.clone()), value);
            }
            state
        })
        .collect())
}

/// Distinct permutations of a multiset, in lexicographic order.
fn distinct_permutations(values: &[f64]) -> Vec<Vec<f64>> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(sorted.len());
    let mut used = vec![false; sorted.len()];
    fn recurse(
        sorted: &[f64],
        used: &mut [bool],
        current: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) {
        if current.len() == sorted.len() {
            out.push(current.clone());
            return;
        }
        for i in 0..sorted.len() {
            if used[i] {
                continue;
            }
            // Skip duplicates: only the first unused copy may start here.
            if i > 0 && sorted[i] == sorted[i - 1] && !used[i - 1] {
                continue;
            }
            used[i] = true;
            current.push(sorted[i]);
            recurse(sorted, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
    recurse(&sorted, &mut used, &mut current, &mut out);
    out
}

/// Result of the noncontextual-assignment search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KsOutcome {
    /// One outcome index per context, consistent on all shared projectors.
    Witness(Vec<usize>),
    /// The search space is exhausted: no noncontextual assignment exists.
    Obstruction,
}

/// Backtracking search for a global noncontextual assignment: one frame
/// projector per context valued 1, all others 0, consistent on projectors
/// shared between contexts (Frobenius distance within the projector
/// tolerance). `Obstruction` is a result, not an error.
pub fn ks_search(bases: &[Context]) -> KsOutcome {
    let n = bases.len();
    // shared[c2] lists (p2, c1, p1) with c1 < c2 and frame projectors equal.
    let mut shared: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for c2 in 0..n {
        for c1 in 0..c2 {
            if bases[c1].dim() != bases[c2].dim() {
                continue;
            }
            for (p2, q) in bases[c2].frame().iter().enumerate() {
                for (p1, p) in bases[c1].frame().iter().enumerate() {
                    if (p - q).frobenius_norm() <= tol::TAU_PROJ {
                        shared[c2].push((p2, c1, p1));
                    }
                }
            }
        }
    }

    let mut assignment: Vec<usize> = Vec::with_capacity(n);
    if backtrack(bases, &shared, &mut assignment) {
        KsOutcome::Witness(assignment)
    } else {
        KsOutcome::Obstruction
    }
}

fn backtrack(
    bases: &[Context],
    shared: &[Vec<(usize, usize, usize)>],
    assignment: &mut Vec<usize>,
) -> bool {
    let c = assignment.len();
    if c == bases.len() {
        return true;
    }
    'outcomes: for k in 0..bases[c].dim() {
        for &(p2, c1, p1) in &shared[c] {
            let here = p2 == k;
            let there = assignment[c1] == p1;
            if here != there {
                continue 'outcomes;
            }
        }
        assignment.push(k);
        if backtrack(bases, shared, assignment) {
            return true;
        }
        assignment.pop();
    }
    false
}

/// A context and outcome on which two distinct observables take values at
/// least `‖A₁−A₂‖/dim` apart, or `None` when the observables coincide
/// within the separation threshold.
pub fn separation_witness(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
) -> Result<Option<(Context, usize)>> {
    a1.require_same_dim(a2)?;
    a1.require_hermitian(tol::TAU_HERM)?;
    a2.require_hermitian(tol::TAU_HERM)?;
    let diff = a1 - a2;
    let norm = cstar_norm(&diff);
    let tau_sep = tol::TAU_SEP_FACTOR * cstar_norm(a1).max(cstar_norm(a2)).max(1.0);
    if norm <= tau_sep {
        return Ok(None);
    }
    // An eigenframe of the difference, completed on degeneracies; the
    // outcome at the extremal eigenvalue separates by the spectral radius.
    let ctx = completing_context(std::slice::from_ref(&diff))?;
    let gaps: Vec<f64> = ctx
        .coefficients(a1)
        .iter()
        .zip(ctx.coefficients(a2))
        .map(|(x, y)| (x - y).abs())
        .collect();
    let (k, _) = gaps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    Ok(Some((ctx, k)))
}

/// Residuals from checking the defining valuation properties on one
/// context: zero and unit values, positivity on squares, spectrum
/// membership, per-context multiplicativity and additivity, and the
/// realization of every spectral point by some outcome.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValuationPropertyReport {
    pub samples: usize,
    pub zero_residual: f64,
    pub unit_residual: f64,
    pub min_square_value: f64,
    pub max_spectrum_distance: f64,
    pub max_multiplicativity_residual: f64,
    pub max_additivity_residual: f64,
    pub max_coverage_defect: f64,
    pub pass: bool,
}

/// Checks the valuation properties over `samples` random observables in
/// the given context. Randomness is drawn from a stream keyed by the
/// context, so reports are reproducible.
pub fn check_valuation_properties(
    phi: &PhysicalState,
    context: &Context,
    samples: usize,
) -> Result<ValuationPropertyReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let device = DeviceType::new("property-check", context.clone());
    let dim = context.dim();
    let mut stream = Stream::from_parts(&[b"valuation-properties", context.canonical_key().as_bytes()]);

    let zero_residual = evaluate(phi, &ComplexMatrix::zeros(dim), &device)?.abs();
    let unit_residual = (evaluate(phi, &ComplexMatrix::identity(dim), &device)? - 1.0).abs();

    let mut min_square_value = f64::INFINITY;
    let mut max_spectrum_distance: f64 = 0.0;
    let mut max_mult: f64 = 0.0;
    let mut max_add: f64 = 0.0;
    let mut max_coverage: f64 = 0.0;

    let in_context = |coeffs: &[f64]| {
        let mut acc = ComplexMatrix::zeros(dim);
        for (c, p) in coeffs.iter().zip(context.frame()) {
            acc = &acc + &p.scale_re(*c);
        }
        acc
    };

    for _ in 0..samples {
        let coeffs: Vec<f64> = (0..dim).map(|_| stream.next_in(-2.0, 2.0)).collect();
        let a = in_context(&coeffs);
        let value = evaluate(phi, &a, &device)?;

        let spectrum = eig_hermitian_default(&a)?;
        max_spectrum_distance = max_spectrum_distance.max(spectrum.spectrum_distance(value));

        let square_value = evaluate(phi, &(&a * &a), &device)?;
        min_square_value = min_square_value.min(square_value);

        // Every point of the spectrum is realized by some outcome index.
        let outcome_values = context.coefficients(&a);
        for lambda in spectrum.eigenvalues() {
            let best = outcome_values
                .iter()
                .map(|c| (c - lambda).abs())
                .fold(f64::INFINITY, f64::min);
            max_coverage = max_coverage.max(best);
        }

        let coeffs2: Vec<f64> = (0..dim).map(|_| stream.next_in(-2.0, 2.0)).collect();
        let b = in_context(&coeffs2);
        let vb = evaluate(phi, &b, &device)?;
        let vab = evaluate(phi, &(&a * &b), &device)?;
        max_mult = max_mult.max((vab - value * vb).abs());

        let alpha = stream.next_in(-2.0, 2.0);
        let beta = stream.next_in(-2.0, 2.0);
        let combo = &a.scale_re(alpha) + &b.scale_re(beta);
        let vcombo = evaluate(phi, &combo, &device)?;
        max_add = max_add.max((vcombo - alpha * value - beta * vb).abs());
    }

    let pass = zero_residual <= tol::TAU_EIG
        && unit_residual <= tol::TAU_EIG
        && min_square_value >= -1e-12
        && max_spectrum_distance <= 1e-8
        && max_mult <= 1e-8
        && max_add <= 1e-8
        && max_coverage <= 1e-8;

    Ok(ValuationPropertyReport {
        samples,
        zero_residual,
        unit_residual,
        min_square_value,
        max_spectrum_distance,
        max_multiplicativity_residual: max_mult,
        max_additivity_residual: max_add,
        max_coverage_defect: max_coverage,
        pass,
    })
}
