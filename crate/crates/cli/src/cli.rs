//! Command-line surface. Flags override values read from `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ehsense_core::{ObservationSampler, ThresholdMode};

use crate::config::{ExperimentKind, ExperimentSpec, SRange};
use crate::error::{CliError, Result};
use crate::experiment::{run_fig3, run_fig4, run_optimize, run_simulate, run_sweep};
use crate::table::{emit, write_csv};

#[derive(Debug, Parser)]
#[command(
    name = "ehsense",
    version,
    about = "Energy-harvesting sensor network detection experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal thresholds for both designs at one operating point.
    Optimize(CommonArgs),
    /// Distance versus threshold at one operating point.
    Sweep(CommonArgs),
    /// Monte-Carlo run of the network against the analytic predictions.
    Simulate(SimulateArgs),
    /// Single-sensor distance versus noncentrality.
    Fig3(CommonArgs),
    /// Network MAP error probability versus noncentrality.
    Fig4(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    EnergyAdapted,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    GaussianPair,
    InverseCdf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Noncentrality for single-point commands.
    #[arg(long)]
    pub s: Option<f64>,
    /// Explicit noncentrality grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s_values: Option<Vec<f64>>,
    /// Upper end of a grid starting at 0 (with --s-step).
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub s_step: Option<f64>,
    #[arg(long)]
    pub pi1: Option<f64>,
    #[arg(long)]
    pub pe: Option<f64>,
    /// `(pi1, pe)` pairs written `pi1:pe`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    /// Battery capacity in packets; unlimited when omitted.
    #[arg(long)]
    pub capacity: Option<u64>,
    #[arg(long)]
    pub num_sensors: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u32>,
    #[arg(long)]
    pub batches: Option<u32>,
    #[arg(long)]
    pub initial_battery: Option<u64>,
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerArg>,
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("pair `{text}` must look like pi1:pe")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Config(format!("pair `{text}`: {e}")))
    };
    Ok((num(a)?, num(b)?))
}

impl CommonArgs {
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        spec.kind = Some(kind);
        if let Some(v) = self.s {
            spec.s = v;
        }
        if let Some(v) = &self.s_values {
            spec.s_values = Some(v.clone());
        }
        if self.s_max.is_some() || self.s_step.is_some() {
            let base = spec.s_range.unwrap_or(SRange {
                start: 0.0,
                stop: 40.0,
                step: 1.0,
            });
            spec.s_values = None;
            spec.s_range = Some(SRange {
                start: base.start,
                stop: self.s_max.unwrap_or(base.stop),
                step: self.s_step.unwrap_or(base.step),
            });
        }
        if let Some(v) = self.pi1 {
            spec.pi1 = v;
        }
        if let Some(v) = self.pe {
            spec.pe = v;
        }
        if let Some(pairs) = &self.pairs {
            spec.pairs = Some(pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?);
        }
        if let Some(v) = self.capacity {
            spec.capacity = Some(v);
        }
        if let Some(v) = self.num_sensors {
            spec.num_sensors = v;
        }
        if let Some(v) = self.theta {
            spec.theta = Some(v);
        }
        if let Some(m) = self.mode {
            spec.mode = match m {
                ModeArg::EnergyAdapted => ThresholdMode::EnergyAdapted,
                ModeArg::Unconstrained => ThresholdMode::Unconstrained,
            };
        }
        if let Some(v) = self.theta_max {
            spec.sweep.theta_max = Some(v);
        }
        if let Some(v) = self.points {
            spec.sweep.points = v;
        }
        if let Some(out) = &self.out {
            spec.output = Some(out.clone());
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl SimulateArgs {
    pub fn resolve(&self) -> Result<ExperimentSpec> {
        let mut spec = self.common.resolve(ExperimentKind::Simulate)?;
        let sim = &mut spec.sim;
        if let Some(v) = self.horizon {
            sim.horizon = v;
        }
        if let Some(v) = self.warmup {
            sim.warmup = Some(v);
        }
        if let Some(v) = self.replicas {
            sim.replicas = v;
        }
        if let Some(v) = self.batches {
            sim.batches = v;
        }
        if let Some(v) = self.initial_battery {
            sim.initial_battery = v;
        }
        if let Some(v) = self.sampler {
            sim.sampler = match v {
                SamplerArg::GaussianPair => ObservationSampler::GaussianPair,
                SamplerArg::InverseCdf => ObservationSampler::InverseCdf,
            };
        }
        Ok(spec)
    }
}

fn write_rows<R: crate::table::Row + serde::Serialize>(
    rows: &[R],
    spec: &ExperimentSpec,
    format: Option<Format>,
) -> Result<()> {
    let path = spec.output.as_deref();
    match format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(rows, path),
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
            text.push('\n');
            emit(text.as_bytes(), path)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Optimize(a) => {
            let spec = a.resolve(ExperimentKind::Optimize)?;
            write_rows(&run_optimize(&spec)?, &spec, a.format)
        }
        Command::Sweep(a) => {
            let spec = a.resolve(ExperimentKind::Sweep)?;
            write_rows(&run_sweep(&spec)?, &spec, a.format)
        }
        Command::Fig3(a) => {
            let spec = a.resolve(ExperimentKind::SweepS)?;
            write_rows(&run_fig3(&spec)?, &spec, a.format)
        }
        Command::Fig4(a) => {
            let spec = a.resolve(ExperimentKind::ErrorCurve)?;
            write_rows(&run_fig4(&spec)?, &spec, a.format)
        }
        Command::Simulate(a) => {
            let spec = a.resolve()?;
            let (row, _) = run_simulate(&spec, a.seed)?;
            write_rows(&[row], &spec, a.common.format)
        }
    }
}
