//! Negativity and detection of entanglement sudden death / birth.

use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_exponential, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, hermitian_part, partial_trace, partial_transpose, DensityMatrix, Tolerances,
};
use crate::model::build_liouvillian;

/// Default zero threshold for "entangled".
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Output scale of the negativity.
///
/// `Canonical` is `(‖ρ^{T_A}‖₁ − 1)/2` (0.5 for a Bell state). `Doubled`
/// multiplies by two and exists only to compare against plots drawn on that
/// scale; thresholds and event detection always use `Canonical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativityScale {
    #[default]
    Canonical,
    Doubled,
}

impl NegativityScale {
    pub fn apply(self, negativity: f64) -> f64 {
        match self {
            NegativityScale::Canonical => negativity,
            NegativityScale::Doubled => 2.0 * negativity,
        }
    }
}

/// Negativity of the bipartition `subsystem | rest`.
///
/// Computed as `(‖ρ^{T_A}‖₁ − Tr ρ)/2`, i.e. the magnitude of the negative
/// part of the partially transposed spectrum, clamped at zero.
pub fn negativity(rho: &DensityMatrix, subsystem: &[usize]) -> Result<f64> {
    if subsystem.is_empty() || subsystem.len() >= rho.n_qubits() {
        return Err(Error::Parameter(format!(
            "subsystem {subsystem:?} is not a proper bipartition of {} qubits",
            rho.n_qubits()
        )));
    }
    let pt = partial_transpose(rho, subsystem)?;
    let eig = hermitian_eigenvalues(&pt, &Tolerances::default())?;
    let negative: f64 = eig.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok(negative.max(0.0))
}

/// Negativity of a two-qubit state with qubit 0 transposed.
pub fn two_qubit_negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::Parameter(format!(
            "two-qubit negativity needs a 2-qubit state, got {} qubits; pass an explicit bipartition",
            rho.n_qubits()
        )));
    }
    negativity(rho, &[0])
}

/// Negativity between qubits `a` and `b` after tracing out the rest.
pub fn pair_negativity(rho: &DensityMatrix, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::Parameter("pair negativity needs two distinct qubits".into()));
    }
    let reduced = partial_trace(rho, &[a, b])?;
    negativity(&reduced, &[0])
}

/// Negativity used by the pipelines: the two-qubit value for pairs, the
/// qubit (0, 1) marginal for larger chains.
pub fn reference_negativity(rho: &DensityMatrix) -> Result<f64> {
    match rho.n_qubits() {
        0 | 1 => Err(Error::Parameter("negativity needs at least two qubits".into())),
        2 => two_qubit_negativity(rho),
        _ => pair_negativity(rho, 0, 1),
    }
}

/// Smallest eigenvalue of the partial transpose.
pub fn min_pt_eigenvalue(rho: &DensityMatrix, subsystem: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rho, subsystem)?;
    Ok(hermitian_eigenvalues(&pt, &Tolerances::default())?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Death,
    Birth,
}

/// A crossing of the negativity through `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglementEvent {
    pub kind: EventKind,
    pub time: f64,
    /// Final refinement bracket `[lo, hi]` containing the crossing.
    pub bracket: (f64, f64),
    /// Negativity at the grid sample before the crossing.
    pub negativity_before: f64,
    /// Negativity at the grid sample after the crossing.
    pub negativity_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventOptions {
    pub epsilon: f64,
    /// Width of the refined bracket around each crossing.
    pub time_resolution: f64,
    /// Transposed side of the bipartition.
    pub subsystem: Vec<usize>,
}

impl Default for EventOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            time_resolution: 1e-5,
            subsystem: vec![0],
        }
    }
}

/// Negativity of every sample of a trajectory.
pub fn negativity_series(traj: &Trajectory, subsystem: &[usize]) -> Result<Vec<f64>> {
    traj.samples()
        .iter()
        .map(|s| negativity(&s.state, subsystem))
        .collect()
}

/// Locates sign changes of `negativity − ε` between grid samples and refines
/// each by bisection on states propagated exactly from the left sample.
pub fn detect_events(traj: &Trajectory, opts: &EventOptions) -> Result<Vec<EntanglementEvent>> {
    if !(opts.epsilon > 0.0) || !(opts.time_resolution > 0.0) {
        return Err(Error::Parameter(
            "epsilon and time resolution must be positive".into(),
        ));
    }
    if traj.len() < 2 {
        return Err(Error::Parameter("event detection needs at least two samples".into()));
    }
    let values = negativity_series(traj, &opts.subsystem)?;
    let above: Vec<bool> = values.iter().map(|&v| v >= opts.epsilon).collect();
    if above.windows(2).all(|w| w[0] == w[1]) {
        return Ok(Vec::new());
    }

    let l = build_liouvillian(traj.params())?;
    let samples = traj.samples();
    let mut events = Vec::new();
    for k in 0..samples.len() - 1 {
        if above[k] == above[k + 1] {
            continue;
        }
        let start = &samples[k];
        let (mut lo, mut hi) = (0.0, samples[k + 1].time - start.time);
        while hi - lo > opts.time_resolution {
            let mid = 0.5 * (lo + hi);
            let state = propagate_exponential(&l, &start.state, mid)?;
            let state = DensityMatrix::from_matrix_unchecked(hermitian_part(state.matrix()))?;
            if (negativity(&state, &opts.subsystem)? >= opts.epsilon) == above[k] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        events.push(EntanglementEvent {
            kind: if above[k] { EventKind::Death } else { EventKind::Birth },
            time: start.time + 0.5 * (lo + hi),
            bracket: (start.time + lo, start.time + hi),
            negativity_before: values[k],
            negativity_after: values[k + 1],
        });
    }
    Ok(events)
}
