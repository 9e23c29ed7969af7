//! Report schema and CSV/JSON rendering.
//!
//! CSV numbers use `{:.16e}` (17 significant digits, round-trip exact);
//! missing values are empty fields. JSON reports re-parse into [`Report`].

use serde::{Deserialize, Serialize};

use driven_qubits::dynamics::StepDiagnostics;
use driven_qubits::entanglement::{EntanglementEvent, EventKind};
use driven_qubits::experiments::{Axis, Markers, Optimum, OptimumTable, SweepPoint};
use driven_qubits::{Parameter, SystemParams};

use crate::config::{Format, RouteChoice};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Evolve(EvolveReport),
    Steady(SteadyReport),
    Sweep(SweepReport),
    Border(BorderReport),
    Optimum(OptimumReport),
    Events(EventsReport),
    OracleCheck(OracleReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveRow {
    pub t: f64,
    pub negativity: f64,
    pub populations: Vec<f64>,
    pub purity: f64,
}

/// Negativity is taken across qubit 0 | rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveReport {
    pub params: SystemParams,
    pub route: RouteChoice,
    pub diagnostics: StepDiagnostics,
    pub rows: Vec<EvolveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyReport {
    pub params: SystemParams,
    pub negativity: Option<f64>,
    pub residual: Option<f64>,
    pub uniqueness_gap: Option<f64>,
    pub rho_re: Vec<Vec<f64>>,
    pub rho_im: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub params: SystemParams,
    pub parameter: Parameter,
    pub epsilon: f64,
    pub points: Vec<SweepPoint>,
    pub markers: Markers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BorderCell {
    pub value1: f64,
    pub value2: f64,
    pub negativity: Option<f64>,
    pub entangled: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BorderReport {
    pub params: SystemParams,
    pub axis1: Axis,
    pub axis2: Axis,
    pub epsilon: f64,
    pub cells: Vec<BorderCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumReport {
    pub params: SystemParams,
    pub parameter: Parameter,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub epsilon: f64,
    pub optimum: Option<Optimum>,
    pub table: Option<OptimumTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsReport {
    pub params: SystemParams,
    pub epsilon: f64,
    pub time_resolution: f64,
    pub subsystem: Vec<usize>,
    pub events: Vec<EntanglementEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleRow {
    pub t: f64,
    pub ode_vs_exponential: f64,
    pub ode_vs_elementwise: f64,
    pub exponential_vs_elementwise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub params: SystemParams,
    pub t_end: f64,
    pub samples: usize,
    pub limit: f64,
    pub max_deviation: f64,
    pub pass: bool,
    pub rows: Vec<OracleRow>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flag(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => serde_json::to_string_pretty(self)
                .map(|s| s + "\n")
                .map_err(|e| CliError::Io(e.to_string())),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Report::Evolve(r) => {
                let dim = r.rows.first().map_or(0, |row| row.populations.len());
                let mut header = vec!["t[1/Omega]".to_string(), "negativity[1]".to_string()];
                header.extend((1..=dim).map(|k| format!("rho_{k}{k}[1]")));
                header.push("purity[1]".into());
                w.write_record(&header)?;
                for row in &r.rows {
                    let mut rec = vec![num(row.t), num(row.negativity)];
                    rec.extend(row.populations.iter().map(|&p| num(p)));
                    rec.push(num(row.purity));
                    w.write_record(&rec)?;
                }
            }
            Report::Steady(r) => {
                let mut header: Vec<String> =
                    ["negativity[1]", "residual[1]", "uniqueness_gap[1]"].map(String::from).to_vec();
                let mut rec = vec![opt(r.negativity), opt(r.residual), opt(r.uniqueness_gap)];
                for (i, row) in r.rho_re.iter().enumerate() {
                    for (j, &re) in row.iter().enumerate() {
                        header.push(format!("re_rho_{}{}[1]", i + 1, j + 1));
                        header.push(format!("im_rho_{}{}[1]", i + 1, j + 1));
                        rec.push(num(re));
                        rec.push(num(r.rho_im[i][j]));
                    }
                }
                header.extend(["warning".to_string(), "error".to_string()]);
                rec.push(r.warnings.join("; "));
                rec.push(r.error.clone().unwrap_or_default());
                w.write_record(&header)?;
                w.write_record(&rec)?;
            }
            Report::Sweep(r) => {
                w.write_record([r.parameter.label().as_str(), "negativity[1]", "entangled", "error"])?;
                for p in &r.points {
                    w.write_record([
                        num(p.value),
                        opt(p.negativity),
                        flag(p.negativity.map(|n| n > r.epsilon)),
                        p.error.clone().unwrap_or_default(),
                    ])?;
                }
            }
            Report::Border(r) => {
                w.write_record([
                    r.axis1.parameter.label().as_str(),
                    r.axis2.parameter.label().as_str(),
                    "negativity[1]",
                    "entangled",
                    "error",
                ])?;
                for c in &r.cells {
                    w.write_record([
                        num(c.value1),
                        num(c.value2),
                        opt(c.negativity),
                        flag(c.entangled),
                        c.error.clone().unwrap_or_default(),
                    ])?;
                }
            }
            Report::Optimum(r) => match (&r.table, &r.optimum) {
                (Some(t), _) => {
                    w.write_record(["nbar[1]", "gamma_m[Omega]", "e_max[1]"])?;
                    for row in &t.rows {
                        w.write_record([num(row.nbar), num(row.gamma_m), num(row.e_max)])?;
                    }
                }
                (None, o) => {
                    let label = format!("{}_m[{}]", r.parameter.name(), unit(r.parameter));
                    w.write_record([label.as_str(), "negativity[1]"])?;
                    if let Some(o) = o {
                        w.write_record([num(o.location), num(o.negativity)])?;
                    }
                }
            },
            Report::Events(r) => {
                w.write_record([
                    "kind",
                    "t[1/Omega]",
                    "t_lo[1/Omega]",
                    "t_hi[1/Omega]",
                    "negativity_before[1]",
                    "negativity_after[1]",
                ])?;
                for e in &r.events {
                    w.write_record([
                        match e.kind {
                            EventKind::Birth => "birth".to_string(),
                            EventKind::Death => "death".to_string(),
                        },
                        num(e.time),
                        num(e.bracket.0),
                        num(e.bracket.1),
                        num(e.negativity_before),
                        num(e.negativity_after),
                    ])?;
                }
            }
            Report::OracleCheck(r) => {
                w.write_record([
                    "t[1/Omega]",
                    "ode_vs_exponential[1]",
                    "ode_vs_elementwise[1]",
                    "exponential_vs_elementwise[1]",
                ])?;
                for row in &r.rows {
                    w.write_record([
                        num(row.t),
                        num(row.ode_vs_exponential),
                        num(row.ode_vs_elementwise),
                        num(row.exponential_vs_elementwise),
                    ])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn unit(p: Parameter) -> &'static str {
    match p {
        Parameter::Nbar => "1",
        _ => "Omega",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_round_trip_with_tag() {
        let r = Report::Events(EventsReport {
            params: SystemParams::pair(1.5, 0.8, 0.0, 0.0).unwrap(),
            epsilon: 1e-6,
            time_resolution: 1e-5,
            subsystem: vec![0],
            events: vec![],
        });
        let s = r.render(Format::Json).unwrap();
        assert!(s.contains("\"command\": \"events\""));
        let back: Report = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let tampered = s.replacen("\"epsilon\"", "\"extra\": 1, \"epsilon\"", 1);
        assert!(serde_json::from_str::<Report>(&tampered).is_err());
    }
}
