//! Steady states as the null space of the dense Liouvillian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, unvectorize, vectorize, DensityMatrix, Tolerances};
use crate::model::{build_liouvillian, Liouvillian, SystemParams};

/// A unique stationary state of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateResult {
    pub rho_ss: DensityMatrix,
    /// `‖L vec(ρ_ss)‖` after Hermitization and normalization.
    pub residual: f64,
    /// Second-smallest singular value of the Liouvillian.
    pub uniqueness_gap: f64,
}

/// Null spaces with a second singular value at or below this are treated as degenerate.
pub const UNIQUENESS_GAP_MIN: f64 = 1e-8;

pub fn steady_state(p: &SystemParams) -> Result<SteadyStateResult> {
    steady_state_of(&build_liouvillian(p)?, &Tolerances::default())
}

/// Right singular vector of the smallest singular value, Hermitized and trace-normalized.
pub fn steady_state_of(l: &Liouvillian, tol: &Tolerances) -> Result<SteadyStateResult> {
    let d = l.hilbert_dim();
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = order[0];
    let uniqueness_gap = svd.singular_values[order[1]];
    if uniqueness_gap <= UNIQUENESS_GAP_MIN {
        return Err(Error::Multiplicity { gap: uniqueness_gap });
    }

    // row `smallest` of V† is the conjugate of the singular vector
    let v = v_t.row(smallest).adjoint();
    let m = hermitian_part(&unvectorize(&v, d));
    let trace = m.trace();
    if trace.norm() < 1e-12 {
        return Err(Error::Numerical(
            "null vector has vanishing trace; cannot normalize".into(),
        ));
    }
    let m = m / Complex64::from(trace.re);
    let residual = (l.matrix() * vectorize(&m)).norm();
    let rho_ss = DensityMatrix::new(m, tol)?;
    Ok(SteadyStateResult {
        rho_ss,
        residual,
        uniqueness_gap,
    })
}

/// Zero-temperature resonant entanglement threshold `Γ_c = Ω²/(2J)`.
pub fn analytic_threshold(omega: f64, coupling_j: f64) -> Result<f64> {
    if !(coupling_j > 0.0) {
        return Err(Error::Parameter(format!("J must be positive, got {coupling_j}")));
    }
    if !omega.is_finite() {
        return Err(Error::Parameter(format!("omega must be finite, got {omega}")));
    }
    Ok(omega * omega / (2.0 * coupling_j))
}
