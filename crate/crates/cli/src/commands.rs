//! One function per subcommand. Each returns the report together with the
//! exit status it implies and notes for stderr.

use driven_qubits::dynamics::{
    evolve, evolve_elementwise_n2, evolve_exponential, EvolveOptions, InitialState, Trajectory,
};
use driven_qubits::entanglement::{detect_events, reference_negativity, EventOptions};
use driven_qubits::experiments::{
    border_map, find_optimum, gamma_m_vs_nbar, steady_negativity, sweep, sweep_gamma,
    ExperimentSettings,
};
use driven_qubits::steady::steady_state_of;
use driven_qubits::{build_liouvillian, Error, Parameter, SystemParams};

use crate::config::{RouteChoice, RunConfig};
use crate::report::*;
use crate::{exit, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Evolve,
    Steady,
    Sweep,
    Border,
    Optimum,
    Events,
    OracleCheck,
}

/// A finished command: the report, its exit status and human-readable notes.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub status: i32,
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            status: exit::OK,
            notes: Vec::new(),
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.system.params()?;
    match command {
        Command::Evolve => cmd_evolve(cfg, params),
        Command::Steady => cmd_steady(cfg, params),
        Command::Sweep => cmd_sweep(cfg, params),
        Command::Border => cmd_border(cfg, params),
        Command::Optimum => cmd_optimum(cfg, params),
        Command::Events => cmd_events(cfg, params),
        Command::OracleCheck => cmd_oracle_check(cfg, params),
    }
}

fn missing(table: &str) -> CliError {
    CliError::Config(format!("missing [{table}] table"))
}

fn trajectory(
    p: &SystemParams,
    initial: &InitialState,
    route: RouteChoice,
    t_end: f64,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory, CliError> {
    Ok(match route {
        RouteChoice::Ode => evolve(p, initial, t_end, samples, opts)?,
        RouteChoice::Exponential => evolve_exponential(p, initial, t_end, samples, &opts.tolerances)?,
        RouteChoice::Elementwise => evolve_elementwise_n2(p, initial, t_end, samples, opts)?,
    })
}

pub fn cmd_evolve(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.evolve.clone().unwrap_or_default();
    let opts = cfg.numerics.evolve_options()?;
    let initial = cfg.initial.state(params.n_qubits(), &cfg.numerics)?;
    let traj = trajectory(&params, &initial, run.route, run.t_end, run.samples, &opts)?;
    let rows = traj
        .samples()
        .iter()
        .map(|s| {
            Ok(EvolveRow {
                t: s.time,
                negativity: reference_negativity(&s.state)?,
                populations: s.state.populations(),
                purity: s.state.purity(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Outcome::ok(Report::Evolve(EvolveReport {
        params,
        route: run.route,
        diagnostics: traj.diagnostics(),
        rows,
    })))
}

/// `true` when scaling every Γ by `1 ± probe` flips the entangled/separable call.
fn near_border(p: &SystemParams, settings: &ExperimentSettings, entangled: bool, probe: f64) -> bool {
    [1.0 - probe, 1.0 + probe].iter().any(|&f| {
        let gamma: Vec<f64> = p.gamma().iter().map(|g| g * f).collect();
        SystemParams::new(p.n_qubits(), p.omega().to_vec(), p.delta().to_vec(), p.coupling_j(), gamma, p.nbar())
            .and_then(|q| steady_negativity(&q, &settings.tolerances))
            .map(|n| (n > settings.epsilon) != entangled)
            .unwrap_or(false)
    })
}

pub fn cmd_steady(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.steady.clone().unwrap_or_default();
    let settings = cfg.numerics.experiment_settings()?;
    let l = build_liouvillian(&params)?;
    let ss = match steady_state_of(&l, &settings.tolerances) {
        Ok(ss) => ss,
        Err(e @ Error::Multiplicity { .. }) => {
            let msg = e.to_string();
            return Ok(Outcome {
                report: Report::Steady(SteadyReport {
                    params,
                    negativity: None,
                    residual: None,
                    uniqueness_gap: None,
                    rho_re: Vec::new(),
                    rho_im: Vec::new(),
                    warnings: Vec::new(),
                    error: Some(msg.clone()),
                }),
                status: exit::DEGENERATE,
                notes: vec![msg],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let negativity = reference_negativity(&ss.rho_ss)?;
    let mut warnings = Vec::new();
    if negativity < run.warn_below {
        let entangled = negativity > settings.epsilon;
        if entangled {
            warnings.push(format!("small negativity {negativity:.3e} below {:.1e}", run.warn_below));
        }
        if near_border(&params, &settings, entangled, run.border_probe) {
            warnings.push(format!(
                "near the entanglement border: a {}% change of gamma flips the classification",
                run.border_probe * 100.0
            ));
        }
    }
    let m = ss.rho_ss.matrix();
    let d = m.nrows();
    let rho_re = (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect();
    let rho_im = (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect();
    Ok(Outcome {
        notes: warnings.iter().map(|w| format!("warning: {w}")).collect(),
        report: Report::Steady(SteadyReport {
            params,
            negativity: Some(negativity),
            residual: Some(ss.residual),
            uniqueness_gap: Some(ss.uniqueness_gap),
            rho_re,
            rho_im,
            warnings,
            error: None,
        }),
        status: exit::OK,
    })
}

pub fn cmd_sweep(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let settings = cfg.numerics.experiment_settings()?;
    let grid = run.grid.values();
    let r = match run.parameter {
        Parameter::Gamma => sweep_gamma(&params, &grid, &settings)?,
        other => sweep(&params, other, &grid, &settings)?,
    };
    let failures = r.failures();
    let mut notes: Vec<String> = r
        .markers
        .crossings
        .iter()
        .map(|c| format!("{:?} crossing in [{}, {}]", c.direction, c.lower, c.upper).to_lowercase())
        .collect();
    notes.extend(r.markers.maxima.iter().map(|m| {
        format!("interior maximum {:.6e} at {} = {}", m.negativity, r.parameter, m.location)
    }));
    if failures > 0 {
        notes.push(format!("{failures} grid point(s) failed"));
    }
    Ok(Outcome {
        report: Report::Sweep(SweepReport {
            params,
            parameter: r.parameter,
            epsilon: r.epsilon,
            points: r.points,
            markers: r.markers,
        }),
        status: if failures > 0 { exit::NUMERICAL } else { exit::OK },
        notes,
    })
}

pub fn cmd_border(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.border.as_ref().ok_or_else(|| missing("border"))?;
    let settings = cfg.numerics.experiment_settings()?;
    let map = border_map(&params, run.axis1.axis(), run.axis2.axis(), &settings)?;
    let mut cells = Vec::with_capacity(map.axis1.grid.len() * map.axis2.grid.len());
    for (i, &v1) in map.axis1.grid.iter().enumerate() {
        for (j, &v2) in map.axis2.grid.iter().enumerate() {
            cells.push(BorderCell {
                value1: v1,
                value2: v2,
                negativity: map.negativity[i][j],
                entangled: map.entangled[i][j],
                error: map
                    .errors
                    .iter()
                    .find(|e| e.row == i && e.column == j)
                    .map(|e| e.message.clone()),
            });
        }
    }
    let failures = map.errors.len();
    Ok(Outcome {
        report: Report::Border(BorderReport {
            params,
            axis1: map.axis1,
            axis2: map.axis2,
            epsilon: map.epsilon,
            cells,
        }),
        status: if failures > 0 { exit::NUMERICAL } else { exit::OK },
        notes: if failures > 0 {
            vec![format!("{failures} cell(s) failed")]
        } else {
            Vec::new()
        },
    })
}

pub fn cmd_optimum(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.optimum.as_ref().ok_or_else(|| missing("optimum"))?;
    let settings = cfg.numerics.experiment_settings()?;
    let bracket = (run.bracket[0], run.bracket[1]);
    let mut notes = Vec::new();
    let (optimum, table) = match &run.nbar {
        Some(list) => {
            if run.parameter != Parameter::Gamma {
                return Err(CliError::Config(
                    "optimum.nbar tables are defined for parameter = \"gamma\" only".into(),
                ));
            }
            let t = gamma_m_vs_nbar(&params, list, bracket, run.tol, &settings)?;
            match &t.fit {
                Some(f) => notes.push(format!(
                    "fit e_max = {:.6e} * gamma_m + {:.6e}, relative rms residual {:.3e} over {} points",
                    f.slope, f.intercept, f.relative_rms_residual, f.points
                )),
                None => notes.push("fewer than three points with nbar <= 0.05; no line fit".into()),
            }
            (None, Some(t))
        }
        None => (
            Some(find_optimum(&params, run.parameter, bracket, run.tol, &settings)?),
            None,
        ),
    };
    Ok(Outcome {
        report: Report::Optimum(OptimumReport {
            params,
            parameter: run.parameter,
            bracket: run.bracket,
            tol: run.tol,
            epsilon: settings.epsilon,
            optimum,
            table,
        }),
        status: exit::OK,
        notes,
    })
}

pub fn cmd_events(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.events.clone().unwrap_or_default();
    let opts = cfg.numerics.evolve_options()?;
    let initial = cfg.initial.state(params.n_qubits(), &cfg.numerics)?;
    let traj = evolve(&params, &initial, run.t_end, run.samples, &opts)?;
    let event_opts = EventOptions {
        epsilon: cfg.numerics.epsilon,
        time_resolution: cfg.numerics.time_resolution,
        subsystem: run.subsystem.clone(),
    };
    let events = detect_events(&traj, &event_opts)?;
    Ok(Outcome {
        notes: vec![format!("{} event(s)", events.len())],
        report: Report::Events(EventsReport {
            params,
            epsilon: event_opts.epsilon,
            time_resolution: event_opts.time_resolution,
            subsystem: event_opts.subsystem,
            events,
        }),
        status: exit::OK,
    })
}

pub fn cmd_oracle_check(cfg: &RunConfig, params: SystemParams) -> Result<Outcome, CliError> {
    let run = cfg.oracle_check.clone().unwrap_or_default();
    if params.n_qubits() != 2 {
        return Err(CliError::Config("oracle-check compares against the two-qubit equations; set n_qubits = 2".into()));
    }
    let opts = cfg.numerics.evolve_options()?;
    let initial = cfg.initial.state(2, &cfg.numerics)?;
    let routes = [RouteChoice::Ode, RouteChoice::Exponential, RouteChoice::Elementwise]
        .map(|r| trajectory(&params, &initial, r, run.t_end, run.samples, &opts));
    let [ode, exp, elem] = routes;
    let (ode, exp, elem) = (ode?, exp?, elem?);
    let diff = |a: &Trajectory, b: &Trajectory, k: usize| {
        driven_qubits::linalg::max_abs_difference(a.samples()[k].state.matrix(), b.samples()[k].state.matrix())
    };
    let rows: Vec<OracleRow> = (0..ode.len())
        .map(|k| OracleRow {
            t: ode.samples()[k].time,
            ode_vs_exponential: diff(&ode, &exp, k),
            ode_vs_elementwise: diff(&ode, &elem, k),
            exponential_vs_elementwise: diff(&exp, &elem, k),
        })
        .collect();
    let max_deviation = rows
        .iter()
        .flat_map(|r| [r.ode_vs_exponential, r.ode_vs_elementwise, r.exponential_vs_elementwise])
        .fold(0.0, f64::max);
    let pass = max_deviation <= run.limit;
    Ok(Outcome {
        notes: vec![format!(
            "max three-way deviation {max_deviation:.3e} (limit {:.1e}): {}",
            run.limit,
            if pass { "ok" } else { "exceeded" }
        )],
        report: Report::OracleCheck(OracleReport {
            params,
            t_end: run.t_end,
            samples: run.samples,
            limit: run.limit,
            max_deviation,
            pass,
            rows,
        }),
        status: if pass { exit::OK } else { exit::NUMERICAL },
    })
}
