//! Dense complex linear algebra and quantum-state primitives.
//!
//! Basis convention: qubit 0 is the leftmost tensor factor (most significant
//! bit of a basis index), and on every qubit `|↑⟩` is the first basis vector.
//! For two qubits the ordering is `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical acceptance thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Max `|ρ_ij − conj(ρ_ji)|` for a valid density matrix.
    pub hermiticity: f64,
    /// Max `|Tr ρ − 1|`.
    pub trace: f64,
    /// Smallest eigenvalue allowed is `-positivity`.
    pub positivity: f64,
    /// Hermiticity required before an eigen-decomposition is attempted.
    pub eig_hermiticity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-8,
            positivity: 1e-7,
            eig_hermiticity: 1e-9,
        }
    }
}

/// Single-qubit operators in the `{|↑⟩, |↓⟩}` basis.
pub mod basis {
    use super::*;

    fn mat2(a: [[Complex64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| a[i][j])
    }

    pub fn identity(dim: usize) -> CMatrix {
        CMatrix::identity(dim, dim)
    }

    pub fn sigma_x() -> CMatrix {
        mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> CMatrix {
        mat2([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> CMatrix {
        mat2([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// `σ₊ = |↑⟩⟨↓|`
    pub fn sigma_plus() -> CMatrix {
        mat2([[ZERO, ONE], [ZERO, ZERO]])
    }

    /// `σ₋ = |↓⟩⟨↑|`
    pub fn sigma_minus() -> CMatrix {
        mat2([[ZERO, ZERO], [ONE, ZERO]])
    }

    pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    /// Places a single-qubit operator on `site` of an `n_qubits` register.
    pub fn embed(op: &CMatrix, site: usize, n_qubits: usize) -> CMatrix {
        assert!(site < n_qubits, "site {site} out of range for {n_qubits} qubits");
        let left = identity(1 << site);
        let right = identity(1 << (n_qubits - site - 1));
        left.kronecker(op).kronecker(&right)
    }

    /// Index of the basis state with the given spins (`true` = up).
    pub fn basis_index(spins_up: &[bool]) -> usize {
        spins_up
            .iter()
            .fold(0, |acc, &up| (acc << 1) | usize::from(!up))
    }
}

/// Column-stacking vectorization: `vec(ρ)[i + d·j] = ρ[i, j]`.
pub fn vectorize(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim);
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

pub fn max_hermiticity_error(m: &CMatrix) -> f64 {
    let (r, c) = m.shape();
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in 0..c {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn max_abs_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "matrix dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Measured deviation of a matrix from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn satisfies(&self, tol: &Tolerances) -> bool {
        self.hermiticity_error <= tol.hermiticity
            && self.trace_error <= tol.trace
            && self.min_eigenvalue >= -tol.positivity
    }
}

/// Density matrix of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity before accepting `matrix`.
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        let report = state.check();
        if !report.satisfies(tol) {
            return Err(Error::Numerical(format!(
                "not a valid density matrix: hermiticity error {:e}, trace error {:e}, min eigenvalue {:e}",
                report.hermiticity_error, report.trace_error, report.min_eigenvalue
            )));
        }
        Ok(state)
    }

    /// Only checks that the shape is a square power of two.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Parameter(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n_qubits = qubit_count(matrix.nrows())?;
        Ok(Self { n_qubits, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let psi = CVector::from_column_slice(amplitudes);
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Parameter(format!(
                "state vector is not normalized (norm {norm})"
            )));
        }
        Self::from_matrix_unchecked(&psi * psi.adjoint())
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Parameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self::from_matrix_unchecked(m)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { n_qubits, matrix: m }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Diagonal entries (real parts).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn check(&self) -> InvariantReport {
        let eig = symmetric_eigenvalues(&self.matrix);
        InvariantReport {
            hermiticity_error: max_hermiticity_error(&self.matrix),
            trace_error: (self.trace() - ONE).norm(),
            min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        }
    }
}

fn check_subsystem(n_qubits: usize, subsystem: &[usize]) -> Result<()> {
    for (k, &q) in subsystem.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::Parameter(format!(
                "subsystem index {q} out of range for {n_qubits} qubits"
            )));
        }
        if subsystem[..k].contains(&q) {
            return Err(Error::Parameter(format!("subsystem index {q} repeated")));
        }
    }
    Ok(())
}

fn qubit_mask(n_qubits: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .fold(0, |mask, &q| mask | (1 << (n_qubits - 1 - q)))
}

/// Transposes the indices of the qubits in `subsystem`, leaving the rest alone.
pub fn partial_transpose_matrix(
    m: &CMatrix,
    n_qubits: usize,
    subsystem: &[usize],
) -> Result<CMatrix> {
    let dim = 1usize << n_qubits;
    if m.shape() != (dim, dim) {
        return Err(Error::Parameter(format!(
            "matrix shape {:?} does not match {n_qubits} qubits",
            m.shape()
        )));
    }
    check_subsystem(n_qubits, subsystem)?;
    let mask = qubit_mask(n_qubits, subsystem);
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let src_i = (i & !mask) | (j & mask);
        let src_j = (j & !mask) | (i & mask);
        m[(src_i, src_j)]
    }))
}

pub fn partial_transpose(rho: &DensityMatrix, subsystem: &[usize]) -> Result<CMatrix> {
    partial_transpose_matrix(&rho.matrix, rho.n_qubits, subsystem)
}

/// Reduced state on `keep` (kept qubits retain ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    if keep.is_empty() {
        return Err(Error::Parameter("partial trace needs at least one kept qubit".into()));
    }
    check_subsystem(n, keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();

    // Scatter the bits of a compact index onto the given qubit positions.
    let scatter = |compact: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
            let bit = (compact >> (k - 1 - pos)) & 1;
            acc | (bit << (n - 1 - q))
        })
    };

    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        let ia = scatter(a, &kept);
        for b in 0..dk {
            let ib = scatter(b, &kept);
            let mut acc = ZERO;
            for t in 0..dt {
                let it = scatter(t, &traced);
                acc += rho.matrix[(ia | it, ib | it)];
            }
            out[(a, b)] = acc;
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

fn symmetric_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut eig: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Real spectrum of a Hermitian matrix, ascending.
///
/// The decomposition runs on `(m + m†)/2`; inputs further than
/// `tol.eig_hermiticity` from Hermitian are rejected.
pub fn hermitian_eigenvalues(m: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Parameter("eigenvalues of a non-square matrix".into()));
    }
    let err = max_hermiticity_error(m);
    if err > tol.eig_hermiticity {
        return Err(Error::Numerical(format!(
            "matrix is not Hermitian (max deviation {err:e})"
        )));
    }
    Ok(symmetric_eigenvalues(m))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eigenvalues(m, tol)?.iter().map(|l| l.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[c(s), ZERO, ZERO, c(s)]).unwrap()
    }

    #[test]
    fn ladder_operator_algebra() {
        let sp = basis::sigma_plus();
        let sm = basis::sigma_minus();
        let up = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ZERO]));
        let down = CMatrix::from_diagonal(&CVector::from_vec(vec![ZERO, ONE]));
        assert_eq!(&sp * &sm, up);
        assert_eq!(&sm * &sp, down);
        assert_eq!(&sp * &sm - &sm * &sp, basis::sigma_z());
        assert_eq!(&sp + &sm, basis::sigma_x());
        assert_eq!((&sp - &sm) * (-I), basis::sigma_y());
    }

    #[test]
    fn basis_ordering() {
        assert_eq!(basis::basis_index(&[true, true]), 0);
        assert_eq!(basis::basis_index(&[true, false]), 1);
        assert_eq!(basis::basis_index(&[false, true]), 2);
        assert_eq!(basis::basis_index(&[false, false]), 3);
        // σ_z on qubit 0 is +1 on the first two states
        let z0 = basis::embed(&basis::sigma_z(), 0, 2);
        let diag: Vec<f64> = z0.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let m = CMatrix::from_fn(3, 3, |i, j| c((10 * i + j) as f64));
        let v = vectorize(&m);
        assert_eq!(v[1], c(10.0));
        assert_eq!(v[3], c(1.0));
        assert_eq!(unvectorize(&v, 3), m);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = partial_transpose(&bell(), &[0]).unwrap();
        let eig = hermitian_eigenvalues(&pt, &Tolerances::default()).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in eig.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(trace_norm(&pt, &Tolerances::default()).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_is_pt_invariant() {
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let pt = partial_transpose(&rho, &[0]).unwrap();
        assert_eq!(&pt, rho.matrix());
        let pt1 = partial_transpose(&rho, &[1]).unwrap();
        assert_eq!(&pt1, rho.matrix());
    }

    #[test]
    fn partial_transpose_rejects_bad_subsystem() {
        assert!(matches!(partial_transpose(&bell(), &[2]), Err(Error::Parameter(_))));
        assert!(matches!(partial_transpose(&bell(), &[0, 0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[0]).unwrap();
        assert_abs_diff_eq!(max_abs_difference(r.matrix(), DensityMatrix::maximally_mixed(1).matrix()), 0.0, epsilon = 1e-15);
        let r1 = partial_trace(&bell(), &[1]).unwrap();
        assert_eq!(r.matrix(), r1.matrix());
    }

    #[test]
    fn partial_trace_of_product_factorizes() {
        let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(0.7),
            (1, 1) => c(0.3),
            (0, 1) => Complex64::new(0.1, 0.2),
            _ => Complex64::new(0.1, -0.2),
        });
        let b = CMatrix::from_fn(2, 2, |i, j| if i == j { c(0.5) } else { Complex64::new(0.0, 0.25) * if i == 0 { 1.0 } else { -1.0 } });
        let rho = DensityMatrix::from_matrix_unchecked(a.kronecker(&b)).unwrap();
        let ra = partial_trace(&rho, &[0]).unwrap();
        assert_abs_diff_eq!(max_abs_difference(ra.matrix(), &a), 0.0, epsilon = 1e-15);
        let rb = partial_trace(&rho, &[1]).unwrap();
        assert_abs_diff_eq!(max_abs_difference(rb.matrix(), &b), 0.0, epsilon = 1e-15);
        // keeping everything is the identity map
        let all = partial_trace(&rho, &[1, 0]).unwrap();
        assert_eq!(all.matrix(), rho.matrix());
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        assert!(matches!(partial_trace(&bell(), &[]), Err(Error::Parameter(_))));
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let tol = Tolerances::default();
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0), c(1.0), c(2.0)]));
        assert_eq!(hermitian_eigenvalues(&d, &tol).unwrap(), vec![1.0, 2.0, 3.0]);
        let x = hermitian_eigenvalues(&basis::sigma_x(), &tol).unwrap();
        assert_abs_diff_eq!(x[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let m = basis::sigma_plus();
        assert!(matches!(
            hermitian_eigenvalues(&m, &Tolerances::default()),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let tol = Tolerances::default();
        assert!(DensityMatrix::new(bell().into_matrix(), &tol).is_ok());
        let not_normalized = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(not_normalized, &tol).is_err());
        let negative = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.1), c(-0.1)]));
        assert!(DensityMatrix::new(negative, &tol).is_err());
        assert!(DensityMatrix::from_matrix_unchecked(CMatrix::identity(3, 3)).is_err());
        assert!(DensityMatrix::from_pure(&[ONE, ONE]).is_err());
    }
}
