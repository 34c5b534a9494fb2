//! Argument handling and dispatch for the `qpointing` binary.
//!
//! Kept as a library so integration tests can re-parse emitted JSON into the
//! same report types.

pub mod config;
pub mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qpointing_core::{
    build_gamma, coupling::photon_allocation, normal_form, precision, run_suite, scaling_sweep,
    schatten_sums, simulate, Encoding, ProbeFamily, ProbeSpec, Suite, SweepGrid,
    TransceiverConfig,
};

use config::{parse_int_list, parse_real_list, pick, single, FileConfig};
pub use report::{
    Artifact, CouplingReport, Format, QfiRow, ScalingReport, SimulateReport, VerifyReport,
};

/// Failure reported as one `error: kind=… message=…` line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: String = self
            .message
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        write!(f, "error: kind={} message={}", self.kind, flat)
    }
}

impl From<qpointing_core::Error> for CliError {
    fn from(e: qpointing_core::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qpointing", version, about = "Beam-pointing precision toolkit")]
pub struct Cli {
    /// TOML file with default values for any flag (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub out: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling matrix, its normal form and Schatten sums.
    Coupling {
        #[arg(long)]
        ms: Option<String>,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Fisher information and precision for one probe.
    Qfi {
        #[command(flatten)]
        probe: ProbeArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Precision over a grid, with fitted log-log exponents.
    Scaling {
        #[command(flatten)]
        probe: ProbeArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Monte-Carlo homodyne run of the squeezed transceiver.
    Simulate {
        #[arg(long)]
        ms: Option<String>,
        #[arg(long)]
        mt: Option<String>,
        /// Mean photons per mode; sets N = n̄ M_S M_T.
        #[arg(long, conflicts_with = "total_photons")]
        nbar: Option<String>,
        #[arg(long)]
        total_photons: Option<f64>,
        #[arg(long)]
        squeezed_fraction: Option<f64>,
        /// Displacement in units of the aperture radius.
        #[arg(long, allow_hyphen_values = true)]
        d_true: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Exact interferometer instead of the first-order map.
        #[arg(long)]
        exact_mzi: bool,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Run oracle check suites; exit 1 if any check fails.
    Verify {
        /// hermite, coupling, spin, gaussian or all.
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        io: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// classical, single_mode, spatial_entangled, spatio_temporal_entangled,
    /// gaussian_squeezed (scaling also takes `all`).
    #[arg(long)]
    pub family: Option<String>,
    /// Single value, comma list or inclusive range `a..b`.
    #[arg(long)]
    pub ms: Option<String>,
    #[arg(long)]
    pub mt: Option<String>,
    #[arg(long)]
    pub nbar: Option<String>,
    /// Aperture radius r_R.
    #[arg(long)]
    pub rr: Option<f64>,
    /// Occupied Hermite–Gaussian mode for `single_mode`.
    #[arg(long)]
    pub mode: Option<usize>,
}

/// Result of one invocation: the artifact and where it should go.
#[derive(Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// False only when a `verify` check failed.
    pub passed: bool,
}

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SQUEEZED_FRACTION: f64 = 0.5;

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let text = |v: &Option<config::Value>| v.as_ref().map(ToString::to_string);
    let required = |flag: Option<String>, cfg: Option<String>, what: &str| {
        flag.or(cfg).ok_or_else(|| CliError::new("usage", format!("missing --{what}")))
    };
    let default_format = |cmd_default: Format| -> Result<Format, CliError> {
        match &file.out {
            None => Ok(cmd_default),
            Some(s) => match s.as_str() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                other => Err(CliError::new("config", format!("unknown output format {other:?}"))),
            },
        }
    };

    let (artifact, io, fallback) = match cli.command {
        Command::Coupling { ms, io } => {
            let ms = required(ms, text(&file.ms), "ms")?;
            let m = single(&parse_int_list(&ms, "ms")?, "--ms")?;
            (Artifact::Coupling(coupling_report(m)?), io, Format::Json)
        }
        Command::Qfi { probe, io } => {
            let p = merge_probe(probe, &file)?;
            let family = parse_family(&p.family, p.mode)?;
            let spec = ProbeSpec::new(
                family,
                single(&p.ms, "--ms")?,
                single(&p.mt, "--mt")?,
                single(&p.nbar, "--nbar")?,
                p.rr,
            )?;
            (Artifact::Qfi(QfiRow::new(&spec, precision(&spec)?)), io, Format::Json)
        }
        Command::Scaling { probe, io } => {
            let p = merge_probe(probe, &file)?;
            let families = if p.family == "all" {
                vec![
                    ProbeFamily::SingleMode { mode: p.mode },
                    ProbeFamily::Classical,
                    ProbeFamily::SpatialEntangled,
                    ProbeFamily::SpatioTemporalEntangled,
                    ProbeFamily::GaussianSqueezed,
                ]
            } else {
                vec![parse_family(&p.family, p.mode)?]
            };
            let grid = SweepGrid {
                spatial_modes: p.ms,
                temporal_modes: p.mt,
                photons_per_mode: p.nbar,
                aperture_radius: p.rr,
            };
            let tables = families
                .into_iter()
                .map(|f| scaling_sweep(f, &grid))
                .collect::<Result<Vec<_>, _>>()?;
            (Artifact::Scaling(ScalingReport { tables }), io, Format::Json)
        }
        Command::Simulate {
            ms,
            mt,
            nbar,
            total_photons,
            squeezed_fraction,
            d_true,
            trials,
            seed,
            exact_mzi,
            io,
        } => {
            let ms = single(&parse_int_list(&required(ms, text(&file.ms), "ms")?, "ms")?, "--ms")?;
            let mt_text = mt.or(text(&file.mt)).unwrap_or_else(|| "1".into());
            let mt = single(&parse_int_list(&mt_text, "mt")?, "--mt")?;
            // a flag of either kind beats both config keys
            let total = match (total_photons, nbar) {
                (Some(n), _) => n,
                (None, Some(nb)) => single(&parse_real_list(&nb, "nbar")?, "--nbar")? * (ms * mt) as f64,
                (None, None) => match (file.total_photons, text(&file.nbar)) {
                    (Some(n), _) => n,
                    (None, Some(nb)) => single(&parse_real_list(&nb, "nbar")?, "nbar")? * (ms * mt) as f64,
                    (None, None) => {
                        return Err(CliError::new("usage", "missing --nbar or --total-photons"))
                    }
                },
            };
            let cfg = TransceiverConfig {
                spatial_modes: ms,
                temporal_modes: mt,
                total_photons: total,
                squeezed_fraction: pick(squeezed_fraction, file.squeezed_fraction, DEFAULT_SQUEEZED_FRACTION),
                displacement_true: pick(d_true, file.d_true, 0.0),
                seed: pick(seed, file.seed, 0),
            };
            let encoding = if exact_mzi || file.exact_mzi.unwrap_or(false) {
                Encoding::ExactMzi
            } else {
                Encoding::Linearized
            };
            let report = simulate(&cfg, encoding, pick(trials, file.trials, DEFAULT_TRIALS))?;
            (Artifact::Simulate(SimulateReport { report, encoding, config: cfg }), io, Format::Json)
        }
        Command::Verify { suite, io } => {
            let name = pick(suite, file.suite.clone(), "all".into());
            let suite: Suite = name.parse()?;
            let checks = run_suite(suite);
            let passed = checks.iter().all(|c| c.passed);
            (Artifact::Verify(VerifyReport { passed, checks }), io, Format::Csv)
        }
    };

    let passed = match &artifact {
        Artifact::Verify(v) => v.passed,
        _ => true,
    };
    let format = match io.out {
        Some(f) => f,
        None => default_format(fallback)?,
    };
    Ok(Outcome { artifact, format, output: io.output.or(file.output.clone()), passed })
}

pub fn coupling_report(m: usize) -> Result<CouplingReport, CliError> {
    let gamma = build_gamma(m)?;
    let nf = normal_form(&gamma)?;
    let sums = schatten_sums(&nf);
    let t = &nf.transform;
    Ok(CouplingReport {
        m,
        gamma: gamma.to_rows(),
        transform: (0..t.nrows()).map(|r| t.row(r).iter().copied().collect()).collect(),
        eigenvalues: nf.eigenvalues.clone(),
        allocation: photon_allocation(&nf)?,
        sum_lambda: sums.sum_lambda,
        sum_lambda_sq: sums.sum_lambda_sq,
        coupling_ratio: nf.coupling_ratio(),
    })
}

struct Probe {
    family: String,
    ms: Vec<usize>,
    mt: Vec<usize>,
    nbar: Vec<f64>,
    rr: f64,
    mode: usize,
}

fn merge_probe(a: ProbeArgs, file: &FileConfig) -> Result<Probe, CliError> {
    let text = |v: &Option<config::Value>| v.as_ref().map(ToString::to_string);
    let family = a
        .family
        .or(file.family.clone())
        .ok_or_else(|| CliError::new("usage", "missing --family"))?;
    let ms = a
        .ms
        .or(text(&file.ms))
        .ok_or_else(|| CliError::new("usage", "missing --ms"))?;
    Ok(Probe {
        family,
        ms: parse_int_list(&ms, "ms")?,
        mt: parse_int_list(&pick(a.mt, text(&file.mt), "1".into()), "mt")?,
        nbar: parse_real_list(&pick(a.nbar, text(&file.nbar), "1".into()), "nbar")?,
        rr: pick(a.rr, file.rr, 1.0),
        mode: pick(a.mode, file.mode, 0),
    })
}

pub fn parse_family(name: &str, mode: usize) -> Result<ProbeFamily, CliError> {
    match name.replace('-', "_").as_str() {
        "classical" => Ok(ProbeFamily::Classical),
        "single_mode" => Ok(ProbeFamily::SingleMode { mode }),
        "spatial_entangled" => Ok(ProbeFamily::SpatialEntangled),
        "spatio_temporal_entangled" => Ok(ProbeFamily::SpatioTemporalEntangled),
        "gaussian_squeezed" => Ok(ProbeFamily::GaussianSqueezed),
        _ => Err(CliError::new("usage", format!("unknown family {name:?}"))),
    }
}
