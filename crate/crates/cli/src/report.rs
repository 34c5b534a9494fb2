//! Serializable artifacts emitted by each subcommand, plus CSV/JSON writers.

use std::io::Write;

use qpointing_core::{
    CheckRow, Encoding, EstimationReport, PrecisionResult, ProbeSpec, SweepRow, SweepTable,
    TransceiverConfig,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// `Γ`, its orthogonal normal form and the derived per-pair quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub m: usize,
    pub gamma: Vec<Vec<f64>>,
    pub transform: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub allocation: Vec<f64>,
    pub sum_lambda: f64,
    pub sum_lambda_sq: f64,
    pub coupling_ratio: f64,
}

/// One `(family, M_S, M_T, n̄, r_R)` evaluation in the flat table layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiRow {
    pub family: String,
    #[serde(rename = "M_S")]
    pub spatial_modes: usize,
    #[serde(rename = "M_T")]
    pub temporal_modes: usize,
    pub n_bar: f64,
    #[serde(rename = "r_R")]
    pub aperture_radius: f64,
    #[serde(with = "qpointing_core::float_serde")]
    pub qfi: f64,
    #[serde(with = "qpointing_core::float_serde")]
    pub delta_d: f64,
}

impl QfiRow {
    pub fn new(spec: &ProbeSpec, result: PrecisionResult) -> Self {
        Self {
            family: spec.family.name(),
            spatial_modes: spec.spatial_modes,
            temporal_modes: spec.temporal_modes,
            n_bar: spec.mean_photons_per_mode,
            aperture_radius: spec.aperture_radius,
            qfi: result.qfi,
            delta_d: result.delta_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tables: Vec<SweepTable>,
}

/// Sweep rows flattened for CSV; `error` is empty for valid points.
#[derive(Debug, Serialize)]
struct ScalingCsvRow<'a> {
    family: &'a str,
    #[serde(rename = "M_S")]
    spatial_modes: usize,
    #[serde(rename = "M_T")]
    temporal_modes: usize,
    n_bar: f64,
    #[serde(rename = "r_R")]
    aperture_radius: f64,
    qfi: f64,
    delta_d: f64,
    error: &'a str,
}

impl<'a> From<&'a SweepRow> for ScalingCsvRow<'a> {
    fn from(r: &'a SweepRow) -> Self {
        Self {
            family: &r.family,
            spatial_modes: r.spatial_modes,
            temporal_modes: r.temporal_modes,
            n_bar: r.n_bar,
            aperture_radius: r.aperture_radius,
            qfi: r.qfi,
            delta_d: r.delta_d,
            error: r.error.as_deref().unwrap_or(""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub report: EstimationReport,
    pub encoding: Encoding,
    pub config: TransceiverConfig,
}

#[derive(Debug, Serialize)]
struct SimulateCsvRow<'a> {
    d_true: f64,
    estimate_mean: f64,
    estimate_std: f64,
    predicted_std: f64,
    closed_form_std: f64,
    trials: usize,
    standard_error: f64,
    encoding: &'a str,
    spatial_modes: usize,
    temporal_modes: usize,
    total_photons: f64,
    squeezed_fraction: f64,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckRow>,
}

/// Anything a subcommand can emit.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Coupling(CouplingReport),
    Qfi(QfiRow),
    Scaling(ScalingReport),
    Simulate(SimulateReport),
    Verify(VerifyReport),
}

impl Artifact {
    pub fn write(&self, format: Format, sink: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Json => {
                let text = match self {
                    Artifact::Coupling(r) => serde_json::to_string_pretty(r),
                    Artifact::Qfi(r) => serde_json::to_string_pretty(r),
                    Artifact::Scaling(r) => serde_json::to_string_pretty(r),
                    Artifact::Simulate(r) => serde_json::to_string_pretty(r),
                    Artifact::Verify(r) => serde_json::to_string_pretty(r),
                }
                .map_err(|e| CliError::new("serialize", e.to_string()))?;
                writeln!(sink, "{text}").map_err(io_error)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                self.write_csv(&mut w).map_err(csv_error)?;
                w.flush().map_err(io_error)
            }
        }
    }

    fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        match self {
            Artifact::Coupling(r) => {
                w.write_record(["quantity", "row", "col", "value"])?;
                let mut cell = |q: &str, row: Option<usize>, col: Option<usize>, v: f64| {
                    let idx = |i: Option<usize>| i.map(|i| i.to_string()).unwrap_or_default();
                    w.write_record([q.to_string(), idx(row), idx(col), v.to_string()])
                };
                for (name, m) in [("gamma", &r.gamma), ("transform", &r.transform)] {
                    for (i, row) in m.iter().enumerate() {
                        for (j, &v) in row.iter().enumerate() {
                            cell(name, Some(i), Some(j), v)?;
                        }
                    }
                }
                for (k, &v) in r.eigenvalues.iter().enumerate() {
                    cell("eigenvalue", Some(k), None, v)?;
                }
                for (k, &v) in r.allocation.iter().enumerate() {
                    cell("allocation", Some(k), None, v)?;
                }
                cell("sum_lambda", None, None, r.sum_lambda)?;
                cell("sum_lambda_sq", None, None, r.sum_lambda_sq)?;
                cell("coupling_ratio", None, None, r.coupling_ratio)?;
                cell("m", None, None, r.m as f64)
            }
            Artifact::Qfi(r) => w.serialize(r),
            Artifact::Scaling(r) => {
                for t in &r.tables {
                    for row in &t.rows {
                        w.serialize(ScalingCsvRow::from(row))?;
                    }
                }
                Ok(())
            }
            Artifact::Simulate(s) => {
                let (r, c) = (&s.report, &s.config);
                w.serialize(SimulateCsvRow {
                    d_true: r.d_true,
                    estimate_mean: r.estimate_mean,
                    estimate_std: r.estimate_std,
                    predicted_std: r.predicted_std,
                    closed_form_std: r.closed_form_std,
                    trials: r.trials,
                    standard_error: r.standard_error,
                    encoding: match s.encoding {
                        Encoding::Linearized => "linearized",
                        Encoding::ExactMzi => "exact_mzi",
                    },
                    spatial_modes: c.spatial_modes,
                    temporal_modes: c.temporal_modes,
                    total_photons: c.total_photons,
                    squeezed_fraction: c.squeezed_fraction,
                    seed: c.seed,
                })
            }
            Artifact::Verify(r) => {
                for row in &r.checks {
                    w.serialize(row)?;
                }
                Ok(())
            }
        }
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::new("io", e.to_string())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::new("serialize", e.to_string())
}
