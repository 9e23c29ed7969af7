//! Dormand–Prince 5(4) embedded Runge–Kutta integrator for autonomous
//! matrix-valued ODEs, landing exactly on a prescribed output grid.
//! The system is autonomous, so the stage nodes `c_i` never appear.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the derivative scale when `None`.
    pub initial_step: Option<f64>,
    /// Steps below `min_step · max(1, |t|)` abort with a stiffness error.
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: None,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::Parameter(format!(
                "rtol and atol must be positive, got {} and {}",
                self.rtol, self.atol
            )));
        }
        if !(self.max_step > 0.0) || !(self.min_step > 0.0) {
            return Err(Error::Parameter("step bounds must be positive".into()));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) {
                return Err(Error::Parameter(format!("initial step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Counters collected over one integration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDiagnostics {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest scaled local error estimate among accepted steps (≤ 1).
    pub max_error_estimate: f64,
}

/// `y + Σ h·a_i·k_i`
fn combine(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for &(a, k) in terms {
        if a != 0.0 {
            let s = Complex64::from(h * a);
            out.zip_apply(k, |o, x| *o += s * x);
        }
    }
    out
}

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, opts: &IntegratorOptions) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / scale).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrates `dy/dt = f(y)` from `times[0]` and returns `y` at every entry of `times`.
///
/// `times` must be strictly increasing.
pub fn integrate_on_grid<F>(
    mut f: F,
    y0: CMatrix,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<(Vec<CMatrix>, StepDiagnostics)>
where
    F: FnMut(&CMatrix) -> Result<CMatrix>,
{
    opts.validate()?;
    if times.is_empty() {
        return Ok((Vec::new(), StepDiagnostics::default()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("output times must be strictly increasing".into()));
    }

    let mut diag = StepDiagnostics::default();
    let mut out = Vec::with_capacity(times.len());
    let mut t = times[0];
    let mut y = y0;
    let mut k1 = f(&y)?;
    out.push(y.clone());

    let span = times[times.len() - 1] - times[0];
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            let d0 = y.norm();
            let d1 = k1.norm();
            if d0 > 1e-5 && d1 > 1e-5 {
                0.01 * d0 / d1
            } else {
                1e-6
            }
        }
    }
    .min(opts.max_step)
    .min(span.max(f64::MIN_POSITIVE));

    for &target in &times[1..] {
        while t < target {
            if diag.accepted + diag.rejected >= opts.max_steps {
                return Err(Error::Numerical(format!(
                    "step budget of {} exhausted at t = {t}",
                    opts.max_steps
                )));
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < opts.min_step * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness { time: t, step });
            }

            let k2 = f(&combine(&y, step, &[(A21, &k1)]))?;
            let k3 = f(&combine(&y, step, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(&combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(&combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
            let k6 = f(&combine(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ))?;
            let y_new = combine(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(&y_new)?;
            let err = combine(
                &CMatrix::zeros(y.nrows(), y.ncols()),
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let err_norm = error_norm(&err, &y, &y_new, opts);
            if !err_norm.is_finite() {
                return Err(Error::Numerical(format!("non-finite error estimate at t = {t}")));
            }

            let factor = if err_norm == 0.0 {
                10.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 10.0)
            };
            if err_norm <= 1.0 {
                diag.accepted += 1;
                diag.max_error_estimate = diag.max_error_estimate.max(err_norm);
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
                // keep the unclipped proposal so short landing steps do not shrink h
                h = if last { h.max(step * factor) } else { step * factor };
            } else {
                diag.rejected += 1;
                h = step * factor.min(1.0);
                if h < opts.min_step * t.abs().max(1.0) {
                    return Err(Error::Stiffness { time: t, step: h });
                }
            }
            h = h.min(opts.max_step);
        }
        out.push(y.clone());
    }
    Ok((out, diag))
}
