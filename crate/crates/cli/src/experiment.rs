//! Experiment pipelines behind the `ehsense` subcommands.

use ehsense_core::sim::SimReport;
use ehsense_core::{
    bhattacharyya_total, error_bound, map_error_probability, objective, optimize_threshold,
    run_simulation, sensor_pmf, EnergySensorConfig, NetworkConfig, ObservationModel, Priors,
    SensorOperatingPoint, ThresholdMode, ThresholdSearchResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::table::{fmt_f64, Row};

/// Both threshold designs for one operating condition.
struct ThresholdPair {
    unconstrained: ThresholdSearchResult,
    adapted: ThresholdSearchResult,
}

fn optimize_both(
    model: &ObservationModel,
    priors: &Priors,
    cfg: &EnergySensorConfig,
) -> Result<ThresholdPair> {
    Ok(ThresholdPair {
        unconstrained: optimize_threshold(model, priors, cfg, ThresholdMode::Unconstrained)?,
        adapted: optimize_threshold(model, priors, cfg, ThresholdMode::EnergyAdapted)?,
    })
}

/// Jobs run concurrently; results come back in job order.
fn run_jobs<J, T, F>(jobs: &[J], f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T> + Sync,
{
    jobs.par_iter().map(&f).collect()
}

fn grid_jobs(spec: &ExperimentSpec) -> Vec<(f64, f64, f64)> {
    let pairs = spec.pairs();
    spec.s_grid()
        .into_iter()
        .flat_map(|s| pairs.iter().map(move |&(pi1, pe)| (s, pi1, pe)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Row {
    pub s: f64,
    pub pi1: f64,
    pub pe: f64,
    /// Energy-aware distance at the unconstrained optimum.
    pub b_unconstrained_theta: f64,
    pub b_adapted_theta: f64,
    pub theta_u: f64,
    pub theta_star: f64,
    pub p0_u: f64,
    pub p0_star: f64,
}

impl Row for Fig3Row {
    fn header() -> &'static [&'static str] {
        &[
            "s",
            "pi1",
            "pe",
            "b_unconstrained_theta",
            "b_adapted_theta",
            "theta_u",
            "theta_star",
            "p0_u",
            "p0_star",
        ]
    }

    fn fields(&self) -> Vec<String> {
        [
            self.s,
            self.pi1,
            self.pe,
            self.b_unconstrained_theta,
            self.b_adapted_theta,
            self.theta_u,
            self.theta_star,
            self.p0_u,
            self.p0_star,
        ]
        .into_iter()
        .map(fmt_f64)
        .collect()
    }
}

/// Single-sensor distance versus `s` for the two threshold designs.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<Fig3Row>> {
    spec.validate()?;
    let capacity = spec.capacity();
    run_jobs(&grid_jobs(spec), |&(s, pi1, pe)| {
        let model = ObservationModel::unit(s)?;
        let priors = Priors::from_pi1(pi1)?;
        let cfg = EnergySensorConfig::new(0.0, pe, capacity)?;
        let th = optimize_both(&model, &priors, &cfg)?;
        let at_u = SensorOperatingPoint::evaluate(
            &model,
            &priors,
            &cfg.with_theta(th.unconstrained.theta_star),
        )?;
        Ok(Fig3Row {
            s,
            pi1,
            pe,
            b_unconstrained_theta: at_u.bhattacharyya(),
            b_adapted_theta: th.adapted.objective_value,
            theta_u: th.unconstrained.theta_star,
            theta_star: th.adapted.theta_star,
            p0_u: at_u.depletion,
            p0_star: th.adapted.depletion_at_optimum,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4Row {
    pub s: f64,
    pub pi1: f64,
    pub pe: f64,
    pub n: u32,
    pub theta_u: f64,
    pub theta_star: f64,
    /// Exact MAP error with the unconstrained threshold.
    pub pe_unconstrained: f64,
    pub pe_adapted: f64,
    pub bound_unconstrained: f64,
    pub bound_adapted: f64,
}

impl Row for Fig4Row {
    fn header() -> &'static [&'static str] {
        &[
            "s",
            "pi1",
            "pe",
            "n",
            "theta_u",
            "theta_star",
            "pe_unconstrained",
            "pe_adapted",
            "bound_unconstrained",
            "bound_adapted",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            fmt_f64(self.s),
            fmt_f64(self.pi1),
            fmt_f64(self.pe),
            self.n.to_string(),
        ];
        out.extend(
            [
                self.theta_u,
                self.theta_star,
                self.pe_unconstrained,
                self.pe_adapted,
                self.bound_unconstrained,
                self.bound_adapted,
            ]
            .into_iter()
            .map(fmt_f64),
        );
        out
    }
}

/// Exact network error probability versus `s` for both threshold designs.
pub fn run_fig4(spec: &ExperimentSpec) -> Result<Vec<Fig4Row>> {
    spec.validate()?;
    let capacity = spec.capacity();
    let n = spec.num_sensors;
    run_jobs(&grid_jobs(spec), |&(s, pi1, pe)| {
        let model = ObservationModel::unit(s)?;
        let net = NetworkConfig::new(n, pi1)?;
        let priors = net.priors();
        let cfg = EnergySensorConfig::new(0.0, pe, capacity)?;
        let th = optimize_both(&model, &priors, &cfg)?;
        let error_and_bound = |theta: f64| -> Result<(f64, f64)> {
            let point = SensorOperatingPoint::evaluate(&model, &priors, &cfg.with_theta(theta))?;
            let error = map_error_probability(&net, &point.pmf())?;
            let total = bhattacharyya_total(&vec![point.bhattacharyya(); n as usize]);
            Ok((error, error_bound(total, &priors)))
        };
        let (pe_unconstrained, bound_unconstrained) = error_and_bound(th.unconstrained.theta_star)?;
        let (pe_adapted, bound_adapted) = error_and_bound(th.adapted.theta_star)?;
        Ok(Fig4Row {
            s,
            pi1,
            pe,
            n,
            theta_u: th.unconstrained.theta_star,
            theta_star: th.adapted.theta_star,
            pe_unconstrained,
            pe_adapted,
            bound_unconstrained,
            bound_adapted,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub tail_h0: f64,
    pub tail_h1: f64,
    pub transmit_prob: f64,
    pub p0: f64,
    pub b_adapted: f64,
    pub b_unconstrained: f64,
}

impl Row for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "theta",
            "tail_h0",
            "tail_h1",
            "transmit_prob",
            "p0",
            "b_adapted",
            "b_unconstrained",
        ]
    }

    fn fields(&self) -> Vec<String> {
        [
            self.theta,
            self.tail_h0,
            self.tail_h1,
            self.transmit_prob,
            self.p0,
            self.b_adapted,
            self.b_unconstrained,
        ]
        .into_iter()
        .map(fmt_f64)
        .collect()
    }
}

/// Distance versus threshold at fixed `(s, pi1, pe)`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let model = ObservationModel::unit(spec.s)?;
    let priors = Priors::from_pi1(spec.pi1)?;
    let cfg = EnergySensorConfig::new(0.0, spec.pe, spec.capacity())?;
    let hi = spec.sweep.theta_max.unwrap_or(spec.s + 8.0);
    let points = spec.sweep.points;
    let thetas: Vec<f64> = (0..points)
        .map(|i| hi * i as f64 / (points - 1) as f64)
        .collect();
    run_jobs(&thetas, |&theta| {
        let point = SensorOperatingPoint::evaluate(&model, &priors, &cfg.with_theta(theta))?;
        Ok(SweepRow {
            theta,
            tail_h0: point.tail_h0,
            tail_h1: point.tail_h1,
            transmit_prob: point.transmit_prob,
            p0: point.depletion,
            b_adapted: point.bhattacharyya(),
            b_unconstrained: point.without_depletion().bhattacharyya(),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeRow {
    pub mode: ThresholdMode,
    pub s: f64,
    pub pi1: f64,
    pub pe: f64,
    pub theta_star: f64,
    /// Distance at `theta_star` under the objective of `mode`.
    pub objective: f64,
    /// Energy-aware distance at `theta_star`.
    pub b_energy_aware: f64,
    pub p0: f64,
    pub degenerate: bool,
}

impl Row for OptimizeRow {
    fn header() -> &'static [&'static str] {
        &[
            "mode",
            "s",
            "pi1",
            "pe",
            "theta_star",
            "objective",
            "b_energy_aware",
            "p0",
            "degenerate",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mode = match self.mode {
            ThresholdMode::EnergyAdapted => "energy_adapted",
            ThresholdMode::Unconstrained => "unconstrained",
        };
        let mut out = vec![mode.to_string()];
        out.extend(
            [
                self.s,
                self.pi1,
                self.pe,
                self.theta_star,
                self.objective,
                self.b_energy_aware,
                self.p0,
            ]
            .map(fmt_f64),
        );
        out.push(self.degenerate.to_string());
        out
    }
}

pub fn run_optimize(spec: &ExperimentSpec) -> Result<Vec<OptimizeRow>> {
    spec.validate()?;
    let model = ObservationModel::unit(spec.s)?;
    let priors = Priors::from_pi1(spec.pi1)?;
    let cfg = EnergySensorConfig::new(0.0, spec.pe, spec.capacity())?;
    [ThresholdMode::Unconstrained, ThresholdMode::EnergyAdapted]
        .into_iter()
        .map(|mode| {
            let r = optimize_threshold(&model, &priors, &cfg, mode)?;
            let point =
                SensorOperatingPoint::evaluate(&model, &priors, &cfg.with_theta(r.theta_star))?;
            Ok(OptimizeRow {
                mode,
                s: spec.s,
                pi1: spec.pi1,
                pe: spec.pe,
                theta_star: r.theta_star,
                objective: r.objective_value,
                b_energy_aware: point.bhattacharyya(),
                p0: point.depletion,
                degenerate: r.degenerate,
            })
        })
        .collect()
}

/// Analytic predictions next to simulated estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRow {
    pub seed: u64,
    pub s: f64,
    pub pi1: f64,
    pub pe: f64,
    pub n: u32,
    pub theta: f64,
    pub horizon: u64,
    pub warmup: u64,
    pub replicas: u32,
    pub steps_measured: u64,
    pub analytic_p0: f64,
    pub empirical_p0: f64,
    pub se_p0: f64,
    pub analytic_q0: f64,
    pub empirical_q0: f64,
    pub se_q0: f64,
    pub analytic_q1: f64,
    pub empirical_q1: f64,
    pub se_q1: f64,
    pub exact_error: f64,
    pub empirical_error: f64,
    pub se_error: f64,
}

impl Row for SimulateRow {
    fn header() -> &'static [&'static str] {
        &[
            "seed",
            "s",
            "pi1",
            "pe",
            "n",
            "theta",
            "horizon",
            "warmup",
            "replicas",
            "steps_measured",
            "analytic_p0",
            "empirical_p0",
            "se_p0",
            "analytic_q0",
            "empirical_q0",
            "se_q0",
            "analytic_q1",
            "empirical_q1",
            "se_q1",
            "exact_error",
            "empirical_error",
            "se_error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.seed.to_string()];
        out.extend([self.s, self.pi1, self.pe].map(fmt_f64));
        out.push(self.n.to_string());
        out.push(fmt_f64(self.theta));
        out.extend(
            [
                self.horizon,
                self.warmup,
                u64::from(self.replicas),
                self.steps_measured,
            ]
            .map(|v| v.to_string()),
        );
        out.extend(
            [
                self.analytic_p0,
                self.empirical_p0,
                self.se_p0,
                self.analytic_q0,
                self.empirical_q0,
                self.se_q0,
                self.analytic_q1,
                self.empirical_q1,
                self.se_q1,
                self.exact_error,
                self.empirical_error,
                self.se_error,
            ]
            .map(fmt_f64),
        );
        out
    }
}

/// Simulates the network at `spec.theta`, or at the optimum for
/// `spec.mode` when no threshold is given.
pub fn run_simulate(spec: &ExperimentSpec, seed: u64) -> Result<(SimulateRow, SimReport)> {
    spec.validate()?;
    let model = ObservationModel::unit(spec.s)?;
    let net = NetworkConfig::new(spec.num_sensors, spec.pi1)?;
    let priors = net.priors();
    let base = EnergySensorConfig::new(0.0, spec.pe, spec.capacity())?;
    let theta = match spec.theta {
        Some(t) => t,
        None => optimize_threshold(&model, &priors, &base, spec.mode)?.theta_star,
    };
    let cfg = base.with_theta(theta);
    let sim = spec.sim.to_config(seed);
    let report = run_simulation(&model, &net, &cfg, &sim)?;
    let point = SensorOperatingPoint::evaluate(&model, &priors, &cfg)?;
    let pmf = sensor_pmf(&model, &priors, &cfg)?;
    let row = SimulateRow {
        seed,
        s: spec.s,
        pi1: spec.pi1,
        pe: spec.pe,
        n: spec.num_sensors,
        theta,
        horizon: sim.horizon,
        warmup: sim.warmup,
        replicas: sim.replicas,
        steps_measured: report.steps_measured,
        analytic_p0: point.depletion,
        empirical_p0: report.empirical_depletion,
        se_p0: report.std_errors.depletion,
        analytic_q0: pmf.prob_one_given_h0,
        empirical_q0: report.empirical_pmf.prob_one_given_h0,
        se_q0: report.std_errors.prob_one_given_h0,
        analytic_q1: pmf.prob_one_given_h1,
        empirical_q1: report.empirical_pmf.prob_one_given_h1,
        se_q1: report.std_errors.prob_one_given_h1,
        exact_error: map_error_probability(&net, &pmf)?,
        empirical_error: report.empirical_error_rate,
        se_error: report.std_errors.error_rate,
    };
    Ok((row, report))
}

/// Energy-aware distance at `theta`; exposed for audits of sweep output.
pub fn energy_aware_distance(s: f64, pi1: f64, pe: f64, theta: f64) -> Result<f64> {
    let model = ObservationModel::unit(s)?;
    let priors = Priors::from_pi1(pi1)?;
    let cfg = EnergySensorConfig::unlimited(theta, pe)?;
    Ok(objective(
        &model,
        &priors,
        &cfg,
        ThresholdMode::EnergyAdapted,
        theta,
    )?)
}
