//! Time propagation of the density matrix.
//!
//! Three independent routes are provided so that each can check the others:
//!
//! * [`evolve`]: adaptive Dormand–Prince integration of the operator-form generator;
//! * [`evolve_elementwise_n2`]: the same integrator on the hand-expanded
//!   two-qubit equations in [`elementwise`];
//! * [`propagate_exponential`] / [`evolve_exponential`]: the matrix
//!   exponential of the dense Liouvillian.

pub mod elementwise;
pub mod rk;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unvectorize, vectorize, CMatrix, DensityMatrix, Tolerances};
use crate::model::{build_liouvillian, Generator, Liouvillian, SystemParams};

pub use rk::{IntegratorOptions, StepDiagnostics};

/// Starting state of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// `cos θ |↓…↓⟩ + sin θ |↑…↑⟩` with `θ ∈ [0, π/2]`.
    Theta(f64),
    /// Any explicit (possibly mixed) state.
    Density(DensityMatrix),
}

impl InitialState {
    pub fn theta(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::Parameter(format!(
                "theta must lie in [0, π/2], got {theta}"
            )));
        }
        Ok(Self::Theta(theta))
    }

    pub fn ground() -> Self {
        Self::Theta(0.0)
    }

    pub fn excited() -> Self {
        Self::Theta(FRAC_PI_2)
    }

    pub fn to_density(&self, n_qubits: usize) -> Result<DensityMatrix> {
        match self {
            InitialState::Theta(theta) => {
                if !(0.0..=FRAC_PI_2 + 1e-12).contains(theta) {
                    return Err(Error::Parameter(format!(
                        "theta must lie in [0, π/2], got {theta}"
                    )));
                }
                let dim = 1usize << n_qubits;
                let mut psi = vec![Complex64::new(0.0, 0.0); dim];
                psi[0] = Complex64::from(theta.sin());
                psi[dim - 1] += Complex64::from(theta.cos());
                DensityMatrix::from_pure(&psi)
            }
            InitialState::Density(rho) => {
                if rho.n_qubits() != n_qubits {
                    return Err(Error::Parameter(format!(
                        "initial state has {} qubits, expected {n_qubits}",
                        rho.n_qubits()
                    )));
                }
                Ok(rho.clone())
            }
        }
    }
}

/// Settings shared by the ODE routes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub integrator: IntegratorOptions,
    pub tolerances: Tolerances,
}

/// Which propagation route produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    AdaptiveOde,
    Elementwise,
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: DensityMatrix,
}

/// Uniformly sampled solution of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: SystemParams,
    route: Route,
    samples: Vec<Sample>,
    diagnostics: StepDiagnostics,
}

impl Trajectory {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn diagnostics(&self) -> StepDiagnostics {
        self.diagnostics
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories have at least two samples")
    }

    /// Largest entrywise difference to another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Trajectory) -> Result<f64> {
        if self.times() != other.times() {
            return Err(Error::Parameter("trajectories are sampled on different grids".into()));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| crate::linalg::max_abs_difference(a.state.matrix(), b.state.matrix()))
            .fold(0.0, f64::max))
    }
}

/// Uniform grid `t_k = t_end · k / (count − 1)`.
pub fn uniform_grid(t_end: f64, sample_count: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Parameter(format!("t_end must be positive, got {t_end}")));
    }
    if sample_count < 2 {
        return Err(Error::Parameter(format!(
            "need at least two samples, got {sample_count}"
        )));
    }
    let last = (sample_count - 1) as f64;
    Ok((0..sample_count).map(|k| t_end * k as f64 / last).collect())
}

/// Horizon for runs meant to reach the steady state: `max(40/Γ_min, 200)`.
pub fn default_steady_horizon(p: &SystemParams) -> f64 {
    let gamma_min = p
        .gamma()
        .iter()
        .copied()
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    if gamma_min.is_finite() {
        (40.0 / gamma_min).max(200.0)
    } else {
        200.0
    }
}

fn collect_samples(
    times: &[f64],
    states: Vec<CMatrix>,
    tol: &Tolerances,
) -> Result<Vec<Sample>> {
    times
        .iter()
        .zip(states)
        .map(|(&time, m)| {
            let state = DensityMatrix::new(m, tol).map_err(|e| {
                Error::Numerical(format!("state left the physical set at t = {time}: {e}"))
            })?;
            Ok(Sample { time, state })
        })
        .collect()
}

/// Adaptive RK5(4) solution sampled on a uniform grid over `[0, t_end]`.
///
/// Every sample is checked against the density-matrix invariants in
/// `opts.tolerances`.
pub fn evolve(
    p: &SystemParams,
    initial: &InitialState,
    t_end: f64,
    sample_count: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let generator = Generator::new(p)?;
    let rho0 = initial.to_density(p.n_qubits())?;
    let times = uniform_grid(t_end, sample_count)?;
    let (states, diagnostics) =
        rk::integrate_on_grid(|y| generator.apply(y), rho0.into_matrix(), &times, &opts.integrator)?;
    Ok(Trajectory {
        params: p.clone(),
        route: Route::AdaptiveOde,
        samples: collect_samples(&times, states, &opts.tolerances)?,
        diagnostics,
    })
}

/// Same as [`evolve`] but integrates the hand-expanded two-qubit equations.
pub fn evolve_elementwise_n2(
    p: &SystemParams,
    initial: &InitialState,
    t_end: f64,
    sample_count: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let coeffs = elementwise::PairCoefficients::new(p)?;
    let rho0 = initial.to_density(2)?;
    let times = uniform_grid(t_end, sample_count)?;
    let (states, diagnostics) = rk::integrate_on_grid(
        |y| Ok(elementwise::elementwise_rhs(&coeffs, y)),
        rho0.into_matrix(),
        &times,
        &opts.integrator,
    )?;
    Ok(Trajectory {
        params: p.clone(),
        route: Route::Elementwise,
        samples: collect_samples(&times, states, &opts.tolerances)?,
        diagnostics,
    })
}

/// `vec(ρ(t)) = exp(L t) vec(ρ0)`.
///
/// The result is not re-validated; callers compare it against other routes.
pub fn propagate_exponential(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("propagation time must be ≥ 0, got {t}")));
    }
    if rho0.n_qubits() != l.n_qubits() {
        return Err(Error::Parameter(format!(
            "state has {} qubits, Liouvillian acts on {}",
            rho0.n_qubits(),
            l.n_qubits()
        )));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let propagator = (l.matrix() * Complex64::from(t)).exp();
    let v = propagator * vectorize(rho0.matrix());
    DensityMatrix::from_matrix_unchecked(unvectorize(&v, l.hilbert_dim()))
}

/// Uniformly sampled trajectory from repeated application of `exp(L Δt)`.
pub fn evolve_exponential(
    p: &SystemParams,
    initial: &InitialState,
    t_end: f64,
    sample_count: usize,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let l = build_liouvillian(p)?;
    let rho0 = initial.to_density(p.n_qubits())?;
    let times = uniform_grid(t_end, sample_count)?;
    let dt = times[1] - times[0];
    let step = (l.matrix() * Complex64::from(dt)).exp();
    let d = l.hilbert_dim();
    let mut v = vectorize(rho0.matrix());
    let mut states = Vec::with_capacity(times.len());
    states.push(rho0.into_matrix());
    for _ in 1..times.len() {
        v = &step * v;
        states.push(unvectorize(&v, d));
    }
    Ok(Trajectory {
        params: p.clone(),
        route: Route::Exponential,
        samples: collect_samples(&times, states, tol)?,
        diagnostics: StepDiagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_difference;

    #[test]
    fn theta_family() {
        let g = InitialState::ground().to_density(2).unwrap();
        assert_eq!(g.populations(), vec![0.0, 0.0, 0.0, 1.0]);
        let e = InitialState::excited().to_density(2).unwrap();
        assert!((e.populations()[0] - 1.0).abs() < 1e-15);
        assert!(InitialState::theta(-0.1).is_err());
        assert!(InitialState::theta(2.0).is_err());
        let wrong = InitialState::Density(DensityMatrix::maximally_mixed(1));
        assert!(wrong.to_density(2).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(uniform_grid(0.0, 10).is_err());
        assert!(uniform_grid(1.0, 1).is_err());
        let g = uniform_grid(2.0, 5).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn steady_horizon() {
        let p = SystemParams::pair(1.5, 0.1, 0.0, 0.0).unwrap();
        assert_eq!(default_steady_horizon(&p), 400.0);
        let p = SystemParams::pair(1.5, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(default_steady_horizon(&p), 200.0);
        let p = SystemParams::pair(1.5, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(default_steady_horizon(&p), 200.0);
    }

    #[test]
    fn exponential_at_zero_is_identity() {
        let p = SystemParams::pair(1.5, 0.8, 0.2, 0.1).unwrap();
        let l = build_liouvillian(&p).unwrap();
        let rho = InitialState::theta(0.3).unwrap().to_density(2).unwrap();
        assert_eq!(propagate_exponential(&l, &rho, 0.0).unwrap(), rho);
        assert!(propagate_exponential(&l, &rho, -1.0).is_err());
    }

    #[test]
    fn single_qubit_decay_law() {
        let p = SystemParams::uniform(1, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let up = InitialState::Density(DensityMatrix::basis_state(1, 0).unwrap());
        let traj = evolve(&p, &up, 2.0, 5, &EvolveOptions::default()).unwrap();
        let l = build_liouvillian(&p).unwrap();
        for s in traj.samples() {
            let exact = (-2.0 * s.time).exp();
            assert!((s.state.populations()[0] - exact).abs() < 1e-7);
            let e = propagate_exponential(&l, &up.to_density(1).unwrap(), s.time).unwrap();
            assert!((e.populations()[0] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn commuting_state_is_stationary() {
        let p = SystemParams::pair(2.3, 0.0, 0.0, 0.0).unwrap().with(crate::model::Parameter::Omega, 0.0).unwrap();
        let rho0 = DensityMatrix::from_matrix_unchecked(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            vec![0.1, 0.2, 0.3, 0.4].into_iter().map(Complex64::from).collect(),
        )))
        .unwrap();
        let traj = evolve(&p, &InitialState::Density(rho0.clone()), 10.0, 11, &EvolveOptions::default()).unwrap();
        for s in traj.samples() {
            assert!(max_abs_difference(s.state.matrix(), rho0.matrix()) < 1e-14);
        }
    }
}
