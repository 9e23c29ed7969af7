//! Scalar bracketing searches used by the experiment pipelines.

use crate::error::{Error, Result};

/// Bisection for the point where `f` first reaches `level`.
///
/// Requires `f(lo) < level ≤ f(hi)`; returns the midpoint of the final
/// bracket once it is narrower than `tol`.
pub fn bisect_crossing<F>(mut f: F, lo: f64, hi: f64, level: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"
        )));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo < level && f_hi >= level) {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: format!("values {f_lo:e} and {f_hi:e} do not straddle {level:e}"),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if f(mid)? < level {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x))` for the best point evaluated once the bracket is
/// narrower than `tol`.
pub fn golden_section_max<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "need a < b and tol > 0, got [{a}, {b}], tol {tol}"
        )));
    }
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Interior strict local maxima of a sampled profile that reach `floor`.
///
/// Missing samples break the neighbourhood and are never maxima.
pub fn interior_maxima(values: &[Option<f64>], floor: f64) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| match (values[i - 1], values[i], values[i + 1]) {
            (Some(l), Some(m), Some(r)) => m >= floor && m > l && m >= r,
            _ => false,
        })
        .collect()
}

/// `count` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (count - 1) as f64;
            (0..count)
                .map(|k| lo + (hi - lo) * k as f64 / last)
                .collect()
        }
    }
}
