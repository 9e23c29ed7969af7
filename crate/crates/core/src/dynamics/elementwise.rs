//! Two-qubit master equation written out entry by entry.
//!
//! The sixteen scalar equations below were obtained by expanding the
//! master equation symbolically in the basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`
//! (indices 0..4). No matrix products are involved, which makes this an
//! independent check on the operator and superoperator routes.
//!
//! Each right-hand side is `diss − i·comm`, where `comm` is the entry of
//! `[H, ρ]` for the Hermitian part `H` and `diss` collects the decay
//! (`2Γ_i(n̄+1)`) and thermal excitation (`2Γ_i n̄`) contributions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::SystemParams;

/// Scalar coefficients of the two-qubit equations.
#[derive(Debug, Clone, Copy)]
pub struct PairCoefficients {
    w1: f64,
    w2: f64,
    e1: f64,
    e2: f64,
    j: f64,
    /// σ₋ jump rates `2Γ_i(n̄+1)`
    dn1: f64,
    dn2: f64,
    /// σ₊ jump rates `2Γ_i n̄`
    up1: f64,
    up2: f64,
}

impl PairCoefficients {
    pub fn new(p: &SystemParams) -> Result<Self> {
        if p.n_qubits() != 2 {
            return Err(Error::Parameter(format!(
                "elementwise equations are for two qubits, got {}",
                p.n_qubits()
            )));
        }
        let (g, n) = (p.gamma(), p.nbar());
        Ok(Self {
            w1: p.omega()[0],
            w2: p.omega()[1],
            e1: p.delta()[0],
            e2: p.delta()[1],
            j: p.coupling_j(),
            dn1: 2.0 * g[0] * (n + 1.0),
            dn2: 2.0 * g[1] * (n + 1.0),
            up1: 2.0 * g[0] * n,
            up2: 2.0 * g[1] * n,
        })
    }
}

/// `dρ/dt` for a 4×4 state, entry by entry.
pub fn elementwise_rhs(c: &PairCoefficients, rho: &CMatrix) -> CMatrix {
    let r = |i: usize, k: usize| rho[(i, k)];
    let PairCoefficients { w1, w2, e1, e2, j, dn1, dn2, up1, up2 } = *c;

    // coherence damping rates
    let half1 = 0.5 * (dn1 + up1);
    let half2 = 0.5 * (dn2 + up2);
    let g01 = dn1 + half2;
    let g02 = dn2 + half1;
    let g03 = half1 + half2;
    let g13 = half1 + up2;
    let g23 = up1 + half2;

    let mi = Complex64::new(0.0, -1.0);
    let mut d = CMatrix::zeros(4, 4);

    // populations
    d[(0, 0)] = -(dn1 + dn2) * r(0, 0) + up2 * r(1, 1) + up1 * r(2, 2)
        + mi * (-w2 * r(0, 1) - w1 * r(0, 2) + w2 * r(1, 0) + w1 * r(2, 0));
    d[(1, 1)] = dn2 * r(0, 0) - (dn1 + up2) * r(1, 1) + up1 * r(3, 3)
        + mi * (w2 * r(0, 1) - w2 * r(1, 0) - w1 * r(1, 3) + w1 * r(3, 1));
    d[(2, 2)] = dn1 * r(0, 0) - (up1 + dn2) * r(2, 2) + up2 * r(3, 3)
        + mi * (w1 * r(0, 2) - w1 * r(2, 0) - w2 * r(2, 3) + w2 * r(3, 2));
    d[(3, 3)] = dn1 * r(1, 1) + dn2 * r(2, 2) - (up1 + up2) * r(3, 3)
        + mi * (w1 * r(1, 3) + w2 * r(2, 3) - w1 * r(3, 1) - w2 * r(3, 2));

    // first row
    d[(0, 1)] = -g01 * r(0, 1) + up1 * r(2, 3)
        + mi * (-w2 * r(0, 0) + (e2 - 2.0 * j) * r(0, 1) - w1 * r(0, 3) + w2 * r(1, 1) + w1 * r(2, 1));
    d[(0, 2)] = -g02 * r(0, 2) + up2 * r(1, 3)
        + mi * (-w1 * r(0, 0) + (e1 - 2.0 * j) * r(0, 2) - w2 * r(0, 3) + w2 * r(1, 2) + w1 * r(2, 2));
    d[(0, 3)] = -g03 * r(0, 3)
        + mi * (-w1 * r(0, 1) - w2 * r(0, 2) + (e1 + e2) * r(0, 3) + w2 * r(1, 3) + w1 * r(2, 3));

    // second row
    d[(1, 0)] = -g01 * r(1, 0) + up1 * r(3, 2)
        + mi * (w2 * r(0, 0) + (2.0 * j - e2) * r(1, 0) - w2 * r(1, 1) - w1 * r(1, 2) + w1 * r(3, 0));
    d[(1, 2)] = -g03 * r(1, 2)
        + mi * (w2 * r(0, 2) - w1 * r(1, 0) + (e1 - e2) * r(1, 2) - w2 * r(1, 3) + w1 * r(3, 2));
    d[(1, 3)] = dn2 * r(0, 2) - g13 * r(1, 3)
        + mi * (w2 * r(0, 3) - w1 * r(1, 1) - w2 * r(1, 2) + (e1 + 2.0 * j) * r(1, 3) + w1 * r(3, 3));

    // third row
    d[(2, 0)] = -g02 * r(2, 0) + up2 * r(3, 1)
        + mi * (w1 * r(0, 0) + (2.0 * j - e1) * r(2, 0) - w2 * r(2, 1) - w1 * r(2, 2) + w2 * r(3, 0));
    d[(2, 1)] = -g03 * r(2, 1)
        + mi * (w1 * r(0, 1) - w2 * r(2, 0) + (e2 - e1) * r(2, 1) - w1 * r(2, 3) + w2 * r(3, 1));
    d[(2, 3)] = dn1 * r(0, 1) - g23 * r(2, 3)
        + mi * (w1 * r(0, 3) - w1 * r(2, 1) - w2 * r(2, 2) + (e2 + 2.0 * j) * r(2, 3) + w2 * r(3, 3));

    // fourth row
    d[(3, 0)] = -g03 * r(3, 0)
        + mi * (w1 * r(1, 0) + w2 * r(2, 0) - (e1 + e2) * r(3, 0) - w2 * r(3, 1) - w1 * r(3, 2));
    d[(3, 1)] = dn2 * r(2, 0) - g13 * r(3, 1)
        + mi * (w1 * r(1, 1) + w2 * r(2, 1) - w2 * r(3, 0) - (e1 + 2.0 * j) * r(3, 1) - w1 * r(3, 3));
    d[(3, 2)] = dn1 * r(1, 0) - g23 * r(3, 2)
        + mi * (w1 * r(1, 2) + w2 * r(2, 2) - w1 * r(3, 0) - (e2 + 2.0 * j) * r(3, 2) - w2 * r(3, 3));

    d
}
