//! Effective Hamiltonian and Lindblad generator of a driven Ising chain.
//!
//! All rates and frequencies are in units of a reference Rabi frequency Ω,
//! so the default drive is `Ω_i = 1`. The chain has open boundaries and
//! each qubit couples to its own thermal bath with occupation `n̄`.

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{basis, unvectorize, vectorize, CMatrix, DensityMatrix, I};

/// Largest register the dense superoperator supports (1024×1024).
pub const MAX_DENSE_QUBITS: usize = 5;

/// Physical parameters of the N-qubit array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    n_qubits: usize,
    omega: Vec<f64>,
    delta: Vec<f64>,
    coupling_j: f64,
    gamma: Vec<f64>,
    nbar: f64,
}

/// Scalar parameters that sweeps and maps can vary.
///
/// Per-qubit quantities are broadcast to every qubit when set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "nbar")]
    Nbar,
    #[serde(rename = "J")]
    CouplingJ,
    #[serde(rename = "omega")]
    Omega,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Gamma => "gamma",
            Parameter::Delta => "delta",
            Parameter::Nbar => "nbar",
            Parameter::CouplingJ => "J",
            Parameter::Omega => "omega",
        }
    }

    /// Column label with unit, e.g. `gamma[Omega]`.
    pub fn label(self) -> String {
        match self {
            Parameter::Nbar => "nbar[1]".to_string(),
            p => format!("{}[Omega]", p.name()),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gamma" => Ok(Parameter::Gamma),
            "delta" => Ok(Parameter::Delta),
            "nbar" => Ok(Parameter::Nbar),
            "J" | "j" | "coupling_j" => Ok(Parameter::CouplingJ),
            "omega" => Ok(Parameter::Omega),
            other => Err(Error::Parameter(format!("unknown parameter name `{other}`"))),
        }
    }
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl SystemParams {
    /// Per-qubit constructor; vectors must all have length `n_qubits`.
    pub fn new(
        n_qubits: usize,
        omega: Vec<f64>,
        delta: Vec<f64>,
        coupling_j: f64,
        gamma: Vec<f64>,
        nbar: f64,
    ) -> Result<Self> {
        let p = Self {
            n_qubits,
            omega,
            delta,
            coupling_j,
            gamma,
            nbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same Ω, δ and Γ on every qubit.
    pub fn uniform(
        n_qubits: usize,
        omega: f64,
        delta: f64,
        coupling_j: f64,
        gamma: f64,
        nbar: f64,
    ) -> Result<Self> {
        Self::new(
            n_qubits,
            vec![omega; n_qubits],
            vec![delta; n_qubits],
            coupling_j,
            vec![gamma; n_qubits],
            nbar,
        )
    }

    /// Two qubits with `Ω = 1`, the setting used by the sweep and map pipelines.
    pub fn pair(coupling_j: f64, gamma: f64, delta: f64, nbar: f64) -> Result<Self> {
        Self::uniform(2, 1.0, delta, coupling_j, gamma, nbar)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::Parameter("n_qubits must be at least 1".into()));
        }
        for (name, v) in [("omega", &self.omega), ("delta", &self.delta), ("gamma", &self.gamma)] {
            if v.len() != n {
                return Err(Error::Parameter(format!(
                    "{name} has {} entries, expected {n}",
                    v.len()
                )));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!("{name} contains non-finite value {x}")));
            }
        }
        if let Some(g) = self.gamma.iter().find(|&&g| g < 0.0) {
            return Err(Error::Parameter(format!("gamma must be non-negative, got {g}")));
        }
        if !self.coupling_j.is_finite() {
            return Err(Error::Parameter(format!("J must be finite, got {}", self.coupling_j)));
        }
        if !self.nbar.is_finite() || self.nbar < 0.0 {
            return Err(Error::Parameter(format!(
                "nbar must be finite and non-negative, got {}",
                self.nbar
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn coupling_j(&self) -> f64 {
        self.coupling_j
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Scalar value of a parameter, if it is uniform across qubits.
    pub fn get(&self, param: Parameter) -> Option<f64> {
        let uniform = |v: &[f64]| v.iter().all(|&x| x == v[0]).then(|| v[0]);
        match param {
            Parameter::Gamma => uniform(&self.gamma),
            Parameter::Delta => uniform(&self.delta),
            Parameter::Omega => uniform(&self.omega),
            Parameter::Nbar => Some(self.nbar),
            Parameter::CouplingJ => Some(self.coupling_j),
        }
    }

    /// Copy with `param` set (broadcast for per-qubit quantities).
    pub fn with(&self, param: Parameter, value: f64) -> Result<Self> {
        let mut p = self.clone();
        let n = p.n_qubits;
        match param {
            Parameter::Gamma => p.gamma = vec![value; n],
            Parameter::Delta => p.delta = vec![value; n],
            Parameter::Omega => p.omega = vec![value; n],
            Parameter::Nbar => p.nbar = value,
            Parameter::CouplingJ => p.coupling_j = value,
        }
        p.validate()?;
        Ok(p)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        self.with(Parameter::Gamma, gamma)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        self.with(Parameter::Delta, delta)
    }

    pub fn with_nbar(&self, nbar: f64) -> Result<Self> {
        self.with(Parameter::Nbar, nbar)
    }

    pub fn with_coupling(&self, coupling_j: f64) -> Result<Self> {
        self.with(Parameter::CouplingJ, coupling_j)
    }
}

/// Hermitian part of the effective Hamiltonian: detuning, Ising coupling and drive.
pub fn build_coherent_hamiltonian(p: &SystemParams) -> CMatrix {
    let n = p.n_qubits;
    let d = p.dim();
    let sz: Vec<CMatrix> = (0..n).map(|i| basis::embed(&basis::sigma_z(), i, n)).collect();
    let mut h = CMatrix::zeros(d, d);
    for (i, z) in sz.iter().enumerate() {
        h += z * Complex64::from(p.delta[i] / 2.0);
        h += basis::embed(&basis::sigma_x(), i, n) * Complex64::from(p.omega[i]);
    }
    for pair in sz.windows(2) {
        h -= (&pair[0] * &pair[1]) * Complex64::from(p.coupling_j);
    }
    h
}

/// Non-Hermitian effective Hamiltonian
/// `Σ δ_i/2 σ_z − J Σ σ_zσ_z + Σ Ω_i σ_x − iΣ Γ_i[(n̄+1)σ₊σ₋ + n̄ σ₋σ₊]`.
pub fn build_effective_hamiltonian(p: &SystemParams) -> CMatrix {
    let n = p.n_qubits;
    let mut h = build_coherent_hamiltonian(p);
    let up = &basis::sigma_plus() * &basis::sigma_minus();
    let down = &basis::sigma_minus() * &basis::sigma_plus();
    for i in 0..n {
        let damping = basis::embed(&up, i, n) * Complex64::from(p.gamma[i] * (p.nbar + 1.0))
            + basis::embed(&down, i, n) * Complex64::from(p.gamma[i] * p.nbar);
        h -= damping * I;
    }
    h
}

/// One dissipative channel `rate · C ρ C†`.
#[derive(Debug, Clone)]
pub struct Jump {
    pub rate: f64,
    pub operator: CMatrix,
}

/// Jump terms of the master equation: decay `2Γ(n̄+1) σ₋` and thermal
/// excitation `2Γn̄ σ₊` on every qubit. Zero-rate channels are dropped.
pub fn jump_operators(p: &SystemParams) -> Vec<Jump> {
    let n = p.n_qubits;
    let mut jumps = Vec::with_capacity(2 * n);
    for i in 0..n {
        let decay = 2.0 * p.gamma[i] * (p.nbar + 1.0);
        let pump = 2.0 * p.gamma[i] * p.nbar;
        if decay != 0.0 {
            jumps.push(Jump {
                rate: decay,
                operator: basis::embed(&basis::sigma_minus(), i, n),
            });
        }
        if pump != 0.0 {
            jumps.push(Jump {
                rate: pump,
                operator: basis::embed(&basis::sigma_plus(), i, n),
            });
        }
    }
    jumps
}

/// Precomputed operator form of the master-equation right-hand side.
#[derive(Debug, Clone)]
pub struct Generator {
    n_qubits: usize,
    h_eff: CMatrix,
    jumps: Vec<Jump>,
}

impl Generator {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            n_qubits: p.n_qubits,
            h_eff: build_effective_hamiltonian(p),
            jumps: jump_operators(p),
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `dρ/dt = −iH_eff ρ + iρH_eff† + Σ rate·CρC†` for an arbitrary square matrix.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(Error::Parameter(format!(
                "state shape {:?} does not match generator dimension {d}",
                rho.shape()
            )));
        }
        let mut out = (&self.h_eff * rho) * (-I) + (rho * self.h_eff.adjoint()) * I;
        for jump in &self.jumps {
            out += (&jump.operator * rho * jump.operator.adjoint()) * Complex64::from(jump.rate);
        }
        Ok(out)
    }
}

/// Right-hand side of the master equation evaluated on `rho`.
pub fn apply_generator(p: &SystemParams, rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.n_qubits() != p.n_qubits {
        return Err(Error::Parameter(format!(
            "state has {} qubits, parameters describe {}",
            rho.n_qubits(),
            p.n_qubits
        )));
    }
    Generator::new(p)?.apply(rho.matrix())
}

/// Dense superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    n_qubits: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension `d`; the matrix is `d² × d²`.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `unvec(L · vec(ρ))`
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.hilbert_dim();
        if rho.shape() != (d, d) {
            return Err(Error::Parameter(format!(
                "state shape {:?} does not match Liouvillian dimension {d}",
                rho.shape()
            )));
        }
        Ok(unvectorize(&(&self.matrix * vectorize(rho)), d))
    }

    /// Complex eigenvalues via a Schur decomposition.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        let schur = Schur::try_new(self.matrix.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().copied().collect())
    }

    /// Largest `|Σ_i L[(i,i), k]|` over columns `k`: deviation of `vec(I)†` from a left null vector.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.hilbert_dim();
        (0..d * d)
            .map(|k| {
                (0..d)
                    .map(|i| self.matrix[(i + d * i, k)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Vectorized generator: `A ρ B ↦ (Bᵀ ⊗ A) vec(ρ)`.
pub fn build_liouvillian(p: &SystemParams) -> Result<Liouvillian> {
    p.validate()?;
    if p.n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Capacity(format!(
            "dense Liouvillian supports at most {MAX_DENSE_QUBITS} qubits, got {}",
            p.n_qubits
        )));
    }
    let d = p.dim();
    let id = CMatrix::identity(d, d);
    let h = build_effective_hamiltonian(p);
    // −iHρ → I ⊗ (−iH);  iρH† → (H†)ᵀ ⊗ iI = conj(H) ⊗ iI
    let mut l = id.kronecker(&(&h * (-I))) + h.map(|z| z.conj()).kronecker(&id) * I;
    for jump in jump_operators(p) {
        let c = &jump.operator;
        l += c.map(|z| z.conj()).kronecker(c) * Complex64::from(jump.rate);
    }
    Ok(Liouvillian {
        n_qubits: p.n_qubits,
        matrix: l,
    })
}

const HBAR: f64 = 1.054_571_817e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Bose-Einstein occupation `1 / (exp(ħω / k_B T) − 1)`.
pub fn thermal_occupation(temperature_kelvin: f64, angular_frequency: f64) -> Result<f64> {
    if !(temperature_kelvin > 0.0) || !(angular_frequency > 0.0) {
        return Err(Error::Parameter(format!(
            "temperature and frequency must be positive, got T = {temperature_kelvin}, ω = {angular_frequency}"
        )));
    }
    let x = HBAR * angular_frequency / (BOLTZMANN * temperature_kelvin);
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_difference, ONE, ZERO};
    use approx::assert_abs_diff_eq;

    fn diag(v: &[Complex64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    #[test]
    fn parameter_validation() {
        assert!(SystemParams::uniform(0, 1.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(SystemParams::uniform(2, 1.0, 0.0, 1.0, -0.1, 0.0).is_err());
        assert!(SystemParams::uniform(2, 1.0, 0.0, 1.0, 0.1, -1.0).is_err());
        assert!(SystemParams::uniform(2, f64::NAN, 0.0, 1.0, 0.1, 0.0).is_err());
        assert!(SystemParams::uniform(2, 1.0, 0.0, f64::INFINITY, 0.1, 0.0).is_err());
        assert!(SystemParams::new(2, vec![1.0], vec![0.0; 2], 1.0, vec![0.1; 2], 0.0).is_err());
        let p = SystemParams::pair(1.5, 0.8, 0.0, 0.0).unwrap();
        assert!(p.with_gamma(-1.0).is_err());
        assert_eq!(p.with_gamma(0.3).unwrap().gamma(), &[0.3, 0.3]);
    }

    #[test]
    fn single_qubit_decay_hamiltonian() {
        let p = SystemParams::uniform(1, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let h = build_effective_hamiltonian(&p);
        assert_eq!(h, diag(&[-I, ZERO]));
    }

    #[test]
    fn ising_term_is_diagonal() {
        let p = SystemParams::uniform(2, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let h = build_effective_hamiltonian(&p);
        assert_eq!(h, diag(&[-ONE, ONE, ONE, -ONE]));
    }

    #[test]
    fn open_boundary_chain() {
        // three qubits: only (0,1) and (1,2) bonds
        let p = SystemParams::uniform(3, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let h = build_effective_hamiltonian(&p);
        // |↑↑↓⟩: −(+1·+1) − (+1·−1) = 0
        assert_abs_diff_eq!(h[(1, 1)].re, 0.0);
        // |↑↑↑⟩: −2
        assert_abs_diff_eq!(h[(0, 0)].re, -2.0);
        // |↑↓↑⟩: −(−1) − (−1) = 2
        assert_abs_diff_eq!(h[(2, 2)].re, 2.0);
    }

    #[test]
    fn hermitian_part_is_closed_hamiltonian() {
        let p = SystemParams::new(2, vec![0.7, 1.1], vec![0.3, -0.2], 1.5, vec![0.4, 0.9], 0.2).unwrap();
        let h = build_effective_hamiltonian(&p);
        let herm = crate::linalg::hermitian_part(&h);
        let closed = build_coherent_hamiltonian(&p);
        assert!(max_abs_difference(&herm, &closed) < 1e-15);
    }

    #[test]
    fn single_qubit_decay_generator() {
        let p = SystemParams::uniform(1, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let up = DensityMatrix::basis_state(1, 0).unwrap();
        let d = apply_generator(&p, &up).unwrap();
        assert!(max_abs_difference(&d, &diag(&[Complex64::from(-2.0), Complex64::from(2.0)])) < 1e-15);
    }

    #[test]
    fn generator_dimension_mismatch() {
        let p = SystemParams::pair(1.5, 0.8, 0.0, 0.0).unwrap();
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        assert!(matches!(apply_generator(&p, &rho), Err(Error::Parameter(_))));
    }

    #[test]
    fn liouvillian_capacity() {
        let p = SystemParams::uniform(6, 1.0, 0.0, 1.0, 0.1, 0.0).unwrap();
        assert!(matches!(build_liouvillian(&p), Err(Error::Capacity(_))));
    }

    #[test]
    fn two_qubit_liouvillian_preserves_trace() {
        let p = SystemParams::pair(1.5, 0.8, 0.3, 0.2).unwrap();
        let l = build_liouvillian(&p).unwrap();
        assert_eq!(l.matrix().shape(), (16, 16));
        assert!(l.trace_preservation_error() < 1e-12);
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let p = SystemParams::uniform(1, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let mut eigs: Vec<f64> = build_liouvillian(&p)
            .unwrap()
            .spectrum()
            .unwrap()
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-12);
                z.re
            })
            .collect();
        eigs.sort_by(f64::total_cmp);
        for (a, b) in eigs.iter().zip([-2.0, -1.0, -1.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in [Parameter::Gamma, Parameter::Delta, Parameter::Nbar, Parameter::CouplingJ, Parameter::Omega] {
            assert_eq!(Parameter::parse(p.name()).unwrap(), p);
        }
        assert!(Parameter::parse("temperature").is_err());
        assert_eq!(Parameter::Gamma.label(), "gamma[Omega]");
    }

    #[test]
    fn thermal_occupation_values() {
        // ħω = k_B T
        let omega = BOLTZMANN * 300.0 / HBAR;
        assert_abs_diff_eq!(thermal_occupation(300.0, omega).unwrap(), 1.0 / (std::f64::consts::E - 1.0), epsilon = 1e-12);
        assert!(thermal_occupation(1e-3, 4e13).unwrap() < 1e-100);
        let n77 = thermal_occupation(77.0, 4e13).unwrap();
        assert_abs_diff_eq!(n77, 0.019, epsilon = 5e-4);
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(10.0, -1.0).is_err());
    }
}
