//! Parameter sweeps over steady-state negativity.
//!
//! Grid points are independent work items evaluated on the rayon pool and
//! merged by index, so results do not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{reference_negativity, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::linalg::Tolerances;
use crate::model::{build_liouvillian, Parameter, SystemParams};
use crate::optimize::{bisect_crossing, golden_section_max, interior_maxima, linspace};
use crate::steady::steady_state_of;

/// Points with `n̄` at or below this enter the `E_max`-vs-`Γ_m` line fit.
pub const FIT_NBAR_MAX: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    /// Negativity above which a steady state counts as entangled.
    pub epsilon: f64,
    /// Samples in the coarse scan that precedes golden-section refinement.
    pub coarse_points: usize,
    pub tolerances: Tolerances,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            coarse_points: 64,
            tolerances: Tolerances::default(),
        }
    }
}

/// Steady-state negativity, see [`reference_negativity`].
pub fn steady_negativity(p: &SystemParams, tol: &Tolerances) -> Result<f64> {
    let ss = steady_state_of(&build_liouvillian(p)?, tol)?;
    reference_negativity(&ss.rho_ss)
}

fn steady_negativity_at(
    base: &SystemParams,
    param: Parameter,
    value: f64,
    tol: &Tolerances,
) -> Result<f64> {
    steady_negativity(&base.with(param, value)?, tol)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parameter("grid is empty".into()));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("grid contains non-finite value {x}")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Outcome at one grid point; failed points carry the error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub value: f64,
    pub negativity: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    /// separable → entangled with increasing parameter
    Rising,
    Falling,
}

/// Threshold crossing located between two neighbouring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crossing {
    pub direction: CrossingDirection,
    pub lower: f64,
    pub upper: f64,
}

/// Interior maximum of the sampled profile with its neighbouring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMaximum {
    pub location: f64,
    pub negativity: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Markers {
    pub crossings: Vec<Crossing>,
    pub maxima: Vec<GridMaximum>,
}

/// Steady-state negativity along one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: Parameter,
    pub epsilon: f64,
    pub points: Vec<SweepPoint>,
    pub markers: Markers,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.negativity).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    /// First separable → entangled crossing, i.e. the sampled `Γ_c` bracket in a Γ sweep.
    pub fn first_rising_crossing(&self) -> Option<Crossing> {
        self.markers
            .crossings
            .iter()
            .copied()
            .find(|c| c.direction == CrossingDirection::Rising)
    }
}

fn locate_markers(points: &[SweepPoint], epsilon: f64) -> Markers {
    let values: Vec<Option<f64>> = points.iter().map(|p| p.negativity).collect();
    let mut crossings = Vec::new();
    for k in 0..points.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (values[k], values[k + 1]) {
            let (above_a, above_b) = (a >= epsilon, b >= epsilon);
            if above_a != above_b {
                crossings.push(Crossing {
                    direction: if above_b {
                        CrossingDirection::Rising
                    } else {
                        CrossingDirection::Falling
                    },
                    lower: points[k].value,
                    upper: points[k + 1].value,
                });
            }
        }
    }
    let maxima = interior_maxima(&values, epsilon)
        .into_iter()
        .map(|i| GridMaximum {
            location: points[i].value,
            negativity: values[i].unwrap_or_default(),
            lower: points[i - 1].value,
            upper: points[i + 1].value,
        })
        .collect();
    Markers { crossings, maxima }
}

/// Evaluates the steady-state negativity at every grid value of `param`.
///
/// Per-point failures (e.g. a degenerate steady state) are recorded in the
/// point and do not stop the sweep.
pub fn sweep(
    base: &SystemParams,
    param: Parameter,
    grid: &[f64],
    settings: &ExperimentSettings,
) -> Result<SweepResult> {
    validate_grid(grid)?;
    base.validate()?;
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&value| match steady_negativity_at(base, param, value, &settings.tolerances) {
            Ok(n) => SweepPoint {
                value,
                negativity: Some(n),
                error: None,
            },
            Err(e) => SweepPoint {
                value,
                negativity: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let markers = locate_markers(&points, settings.epsilon);
    Ok(SweepResult {
        parameter: param,
        epsilon: settings.epsilon,
        points,
        markers,
    })
}

pub fn sweep_gamma(base: &SystemParams, grid: &[f64], settings: &ExperimentSettings) -> Result<SweepResult> {
    if let Some(g) = grid.iter().find(|&&g| !(g > 0.0)) {
        return Err(Error::Parameter(format!("gamma grid must be positive, got {g}")));
    }
    sweep(base, Parameter::Gamma, grid, settings)
}

pub fn sweep_delta(base: &SystemParams, grid: &[f64], settings: &ExperimentSettings) -> Result<SweepResult> {
    sweep(base, Parameter::Delta, grid, settings)
}

/// Value of `param` at which the steady state becomes entangled, by bisection.
///
/// The negativity must be below `epsilon` at `bracket.0` and above at `bracket.1`.
pub fn find_threshold(
    base: &SystemParams,
    param: Parameter,
    bracket: (f64, f64),
    tol: f64,
    settings: &ExperimentSettings,
) -> Result<f64> {
    let (a, b) = bisect_crossing(
        |x| steady_negativity_at(base, param, x, &settings.tolerances),
        bracket.0,
        bracket.1,
        settings.epsilon,
        tol,
    )?;
    Ok(0.5 * (a + b))
}

/// Noise threshold `Γ_c` located numerically.
pub fn find_gamma_c(
    base: &SystemParams,
    bracket: (f64, f64),
    tol: f64,
    settings: &ExperimentSettings,
) -> Result<f64> {
    find_threshold(base, Parameter::Gamma, bracket, tol, settings)
}

/// Location and height of a maximum of the steady-state negativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Optimum {
    pub location: f64,
    pub negativity: f64,
}

/// Coarse scan followed by golden-section refinement around the single
/// interior maximum. Zero or several maxima give an ambiguity error.
pub fn find_optimum(
    base: &SystemParams,
    param: Parameter,
    bracket: (f64, f64),
    tol: f64,
    settings: &ExperimentSettings,
) -> Result<Optimum> {
    let (lo, hi) = bracket;
    if !(lo < hi) || settings.coarse_points < 3 {
        return Err(Error::Parameter(format!(
            "optimum search needs lo < hi and at least 3 coarse points, got [{lo}, {hi}] with {}",
            settings.coarse_points
        )));
    }
    let grid = linspace(lo, hi, settings.coarse_points);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&x| steady_negativity_at(base, param, x, &settings.tolerances))
        .collect::<Result<_>>()?;
    let values: Vec<Option<f64>> = values.into_iter().map(Some).collect();
    let maxima = interior_maxima(&values, settings.epsilon);
    if maxima.len() != 1 {
        return Err(Error::Ambiguity {
            maxima: maxima.iter().map(|&i| grid[i]).collect(),
        });
    }
    let i = maxima[0];
    let (location, negativity) = golden_section_max(
        |x| steady_negativity_at(base, param, x, &settings.tolerances),
        grid[i - 1],
        grid[i + 1],
        tol,
    )?;
    Ok(Optimum {
        location,
        negativity,
    })
}

/// Optimal noise strength `Γ_m` and the maximal negativity there.
pub fn find_gamma_m(
    base: &SystemParams,
    bracket: (f64, f64),
    tol: f64,
    settings: &ExperimentSettings,
) -> Result<Optimum> {
    find_optimum(base, Parameter::Gamma, bracket, tol, settings)
}

/// One axis of a border map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
}

/// Entangled/separable classification of the steady state on a 2-D grid.
///
/// Cell `[i][j]` corresponds to `axis1.grid[i]`, `axis2.grid[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorderMap {
    pub axis1: Axis,
    pub axis2: Axis,
    pub epsilon: f64,
    pub negativity: Vec<Vec<Option<f64>>>,
    pub entangled: Vec<Vec<Option<bool>>>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellError {
    pub row: usize,
    pub column: usize,
    pub message: String,
}

impl BorderMap {
    /// Classification along `axis2` at a fixed `axis1` index.
    pub fn row(&self, i: usize) -> &[Option<bool>] {
        &self.entangled[i]
    }
}

pub fn border_map(
    base: &SystemParams,
    axis1: Axis,
    axis2: Axis,
    settings: &ExperimentSettings,
) -> Result<BorderMap> {
    for axis in [&axis1, &axis2] {
        if matches!(axis.parameter, Parameter::Omega) {
            return Err(Error::Parameter(
                "border map axes must be one of gamma, J, delta, nbar".into(),
            ));
        }
        validate_grid(&axis.grid)?;
    }
    if axis1.parameter == axis2.parameter {
        return Err(Error::Parameter("border map axes must differ".into()));
    }
    base.validate()?;
    let (n1, n2) = (axis1.grid.len(), axis2.grid.len());
    let cells: Vec<Result<f64>> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            let p = base
                .with(axis1.parameter, axis1.grid[i])?
                .with(axis2.parameter, axis2.grid[j])?;
            steady_negativity(&p, &settings.tolerances)
        })
        .collect();

    let mut negativity = vec![vec![None; n2]; n1];
    let mut entangled = vec![vec![None; n2]; n1];
    let mut errors = Vec::new();
    for (k, cell) in cells.into_iter().enumerate() {
        let (i, j) = (k / n2, k % n2);
        match cell {
            Ok(v) => {
                negativity[i][j] = Some(v);
                entangled[i][j] = Some(v > settings.epsilon);
            }
            Err(e) => errors.push(CellError {
                row: i,
                column: j,
                message: e.to_string(),
            }),
        }
    }
    Ok(BorderMap {
        axis1,
        axis2,
        epsilon: settings.epsilon,
        negativity,
        entangled,
        errors,
    })
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// RMS residual divided by the mean `|y|`.
    pub relative_rms_residual: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Parameter(format!(
            "line fit needs at least two (x, y) pairs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("line fit with identical x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms_residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean_abs = ys.iter().map(|y| y.abs()).sum::<f64>() / n;
    Ok(LinearFit {
        slope,
        intercept,
        rms_residual,
        relative_rms_residual: if mean_abs > 0.0 { rms_residual / mean_abs } else { f64::INFINITY },
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumRow {
    pub nbar: f64,
    pub gamma_m: f64,
    pub e_max: f64,
}

/// Optimum per bath occupation and the line fit of `E_max` against `Γ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumTable {
    pub rows: Vec<OptimumRow>,
    /// Fit over rows with `n̄ ≤ FIT_NBAR_MAX`; absent with fewer than three such rows.
    pub fit: Option<LinearFit>,
}

pub fn gamma_m_vs_nbar(
    base: &SystemParams,
    nbar_list: &[f64],
    bracket: (f64, f64),
    tol: f64,
    settings: &ExperimentSettings,
) -> Result<OptimumTable> {
    validate_grid(nbar_list)?;
    let rows = nbar_list
        .iter()
        .map(|&nbar| {
            let opt = find_gamma_m(&base.with_nbar(nbar)?, bracket, tol, settings)?;
            Ok(OptimumRow {
                nbar,
                gamma_m: opt.location,
                e_max: opt.negativity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimumTable {
        fit: fit_low_temperature(&rows)?,
        rows,
    })
}

/// Line fit of `E_max` vs `Γ_m` over rows with `n̄ ≤ FIT_NBAR_MAX`.
pub fn fit_low_temperature(rows: &[OptimumRow]) -> Result<Option<LinearFit>> {
    let cold: Vec<&OptimumRow> = rows.iter().filter(|r| r.nbar <= FIT_NBAR_MAX).collect();
    if cold.len() < 3 {
        return Ok(None);
    }
    let xs: Vec<f64> = cold.iter().map(|r| r.gamma_m).collect();
    let ys: Vec<f64> = cold.iter().map(|r| r.e_max).collect();
    linear_fit(&xs, &ys).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParams {
        SystemParams::pair(1.5, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        let s = ExperimentSettings::default();
        assert!(sweep_gamma(&base(), &[], &s).is_err());
        assert!(sweep_gamma(&base(), &[0.5, 0.4], &s).is_err());
        assert!(sweep_gamma(&base(), &[0.0, 0.4], &s).is_err());
        assert!(sweep_delta(&base(), &[0.1, f64::NAN], &s).is_err());
    }

    #[test]
    fn failed_points_are_flagged() {
        // Ω = 0, Γ = 0 has a degenerate null space
        let p = base().with(Parameter::Omega, 0.0).unwrap().with_gamma(0.0).unwrap();
        let r = sweep(&p, Parameter::Delta, &[0.0, 0.5], &ExperimentSettings::default()).unwrap();
        assert_eq!(r.failures(), 2);
        assert!(r.points[0].error.as_deref().unwrap().contains("not unique"));
    }

    #[test]
    fn markers_on_synthetic_profile() {
        let pts: Vec<SweepPoint> = [0.0, 0.0, 0.1, 0.3, 0.2, 0.0]
            .iter()
            .enumerate()
            .map(|(k, &v)| SweepPoint { value: k as f64, negativity: Some(v), error: None })
            .collect();
        let m = locate_markers(&pts, 1e-6);
        assert_eq!(m.crossings.len(), 2);
        assert_eq!(m.crossings[0].direction, CrossingDirection::Rising);
        assert_eq!((m.crossings[0].lower, m.crossings[0].upper), (1.0, 2.0));
        assert_eq!(m.crossings[1].direction, CrossingDirection::Falling);
        assert_eq!(m.maxima.len(), 1);
        assert_eq!(m.maxima[0].location, 3.0);
    }

    #[test]
    fn line_fit_exact() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.rms_residual < 1e-14);
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn border_axes_validation() {
        let s = ExperimentSettings::default();
        let g = Axis { parameter: Parameter::Gamma, grid: vec![0.5, 1.0] };
        assert!(border_map(&base(), g.clone(), g.clone(), &s).is_err());
        let o = Axis { parameter: Parameter::Omega, grid: vec![0.5, 1.0] };
        assert!(border_map(&base(), g, o, &s).is_err());
    }
}
