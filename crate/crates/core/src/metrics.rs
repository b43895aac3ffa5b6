//! Bhattacharyya distance of energy-harvesting sensors and threshold design.
//!
//! A sensor reports `u = 1` when its observation clears the threshold and its
//! battery is nonempty. Battery state is independent of the current
//! hypothesis and observation, so `P(u = 1 | h) = P_h(theta) * (1 - p0)`,
//! with `p0` the steady-state depletion probability. All distances are in
//! nats; perfect separation is `f64::INFINITY`, which sums and exponentiates
//! cleanly.

use serde::{Deserialize, Serialize};

use crate::battery::{depletion, Capacity, EnergySensorConfig};
use crate::error::{check_probability, Result};
use crate::observation::{Hypothesis, ObservationModel, Priors};
use crate::search::{golden_section_max, grid_max};

/// `P(u = 1 | h)` for a single sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConditionalPMF {
    pub prob_one_given_h0: f64,
    pub prob_one_given_h1: f64,
}

impl SensorConditionalPMF {
    pub fn new(prob_one_given_h0: f64, prob_one_given_h1: f64) -> Result<Self> {
        check_probability("prob_one_given_h0", prob_one_given_h0)?;
        check_probability("prob_one_given_h1", prob_one_given_h1)?;
        Ok(Self {
            prob_one_given_h0,
            prob_one_given_h1,
        })
    }

    pub fn prob_one(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.prob_one_given_h0,
            Hypothesis::H1 => self.prob_one_given_h1,
        }
    }

    /// `P(u | h)` for `u` in {0, 1}.
    pub fn prob(&self, u: bool, h: Hypothesis) -> f64 {
        let one = self.prob_one(h);
        if u {
            one
        } else {
            1.0 - one
        }
    }
}

/// Threshold tails and the battery depletion they induce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorOperatingPoint {
    pub tail_h0: f64,
    pub tail_h1: f64,
    /// Complements `1 - tail_h`, kept separately for precision.
    pub body_h0: f64,
    pub body_h1: f64,
    pub transmit_prob: f64,
    pub depletion: f64,
}

impl SensorOperatingPoint {
    pub fn evaluate(
        model: &ObservationModel,
        priors: &Priors,
        config: &EnergySensorConfig,
    ) -> Result<Self> {
        config.validate()?;
        let (tail_h0, body_h0) = model.tail_pair(Hypothesis::H0, config.theta);
        let (tail_h1, body_h1) = model.tail_pair(Hypothesis::H1, config.theta);
        let transmit_prob = (priors.pi0() * tail_h0 + priors.pi1() * tail_h1).clamp(0.0, 1.0);
        let depletion = depletion(config, transmit_prob)?;
        Ok(Self {
            tail_h0,
            tail_h1,
            body_h0,
            body_h1,
            transmit_prob,
            depletion,
        })
    }

    /// Same point with an always-charged battery.
    pub fn without_depletion(self) -> Self {
        Self {
            depletion: 0.0,
            ..self
        }
    }

    pub fn pmf(&self) -> SensorConditionalPMF {
        let avail = 1.0 - self.depletion;
        SensorConditionalPMF {
            prob_one_given_h0: self.tail_h0 * avail,
            prob_one_given_h1: self.tail_h1 * avail,
        }
    }

    /// Bhattacharyya distance, with `P(u = 0 | h) = body_h + tail_h * p0`
    /// assembled from the precise complements.
    pub fn bhattacharyya(&self) -> f64 {
        let avail = 1.0 - self.depletion;
        let one = (self.tail_h0 * avail, self.tail_h1 * avail);
        let zero = (
            self.body_h0 + self.tail_h0 * self.depletion,
            self.body_h1 + self.tail_h1 * self.depletion,
        );
        distance_from_parts(one, zero)
    }
}

pub fn sensor_pmf(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
) -> Result<SensorConditionalPMF> {
    Ok(SensorOperatingPoint::evaluate(model, priors, config)?.pmf())
}

/// `-ln(sum_u sqrt(P(u|0) P(u|1)))` for a one-bit sensor.
pub fn bhattacharyya_single(pmf: &SensorConditionalPMF) -> f64 {
    let (a, b) = (pmf.prob_one_given_h0, pmf.prob_one_given_h1);
    distance_from_parts((a, b), (1.0 - a, 1.0 - b))
}

/// The coefficient deficit `1 - BC` equals half the squared Hellinger sum,
/// which stays accurate when the coefficient is close to one.
fn distance_from_parts(one: (f64, f64), zero: (f64, f64)) -> f64 {
    let d1 = one.0.sqrt() - one.1.sqrt();
    let d0 = zero.0.sqrt() - zero.1.sqrt();
    let deficit = 0.5 * (d1 * d1 + d0 * d0);
    if deficit < 0.5 {
        -(-deficit).ln_1p()
    } else {
        let coeff = (one.0 * one.1).sqrt() + (zero.0 * zero.1).sqrt();
        if coeff <= 0.0 {
            f64::INFINITY
        } else {
            -coeff.ln()
        }
    }
}

/// Network distance for independent sensors.
pub fn bhattacharyya_total(per_sensor: &[f64]) -> f64 {
    per_sensor.iter().sum()
}

/// Upper bound `sqrt(pi0 pi1) exp(-B)` on the MAP error probability.
pub fn error_bound(total_b: f64, priors: &Priors) -> f64 {
    (priors.pi0() * priors.pi1()).sqrt() * (-total_b).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Maximize the distance with battery depletion taken into account.
    EnergyAdapted,
    /// Maximize as if the battery never empties.
    Unconstrained,
}

/// Sensor distance at threshold `theta`.
pub fn objective(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
    mode: ThresholdMode,
    theta: f64,
) -> Result<f64> {
    let point = SensorOperatingPoint::evaluate(model, priors, &config.with_theta(theta))?;
    Ok(match mode {
        ThresholdMode::EnergyAdapted => point.bhattacharyya(),
        ThresholdMode::Unconstrained => point.without_depletion().bhattacharyya(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid_points: usize,
    /// Upper grid limit is `s + theta_margin`.
    pub theta_margin: f64,
    pub tolerance: f64,
    pub keep_trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            theta_margin: 8.0,
            tolerance: 1e-8,
            keep_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearchResult {
    pub theta_star: f64,
    pub objective_value: f64,
    pub depletion_at_optimum: f64,
    pub search_trace: Option<Vec<(f64, f64)>>,
    /// Set when the objective is zero over the whole search range.
    pub degenerate: bool,
}

pub fn optimize_threshold(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
    mode: ThresholdMode,
) -> Result<ThresholdSearchResult> {
    optimize_threshold_with(model, priors, config, mode, &SearchOptions::default())
}

pub fn optimize_threshold_with(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
    mode: ThresholdMode,
    options: &SearchOptions,
) -> Result<ThresholdSearchResult> {
    config.validate()?;
    // surface invalid capacity/probabilities before the closure swallows them
    objective(model, priors, config, mode, 0.0)?;
    let f = |theta: f64| objective(model, priors, config, mode, theta).unwrap_or(f64::NEG_INFINITY);

    let lo = 0.0;
    let hi = model.noncentrality() + options.theta_margin;
    let grid = grid_max(&f, lo, hi, options.grid_points);
    let search_trace = options.keep_trace.then(|| grid.trace.clone());

    if grid.value <= 0.0 {
        return Ok(ThresholdSearchResult {
            theta_star: lo,
            objective_value: 0.0,
            depletion_at_optimum: depletion_at(model, priors, config, mode, lo)?,
            search_trace,
            degenerate: true,
        });
    }

    let step = (hi - lo) / (options.grid_points - 1) as f64;
    let a = (grid.arg - step).max(lo);
    let b = (grid.arg + step).min(hi);
    let (refined, refined_value) = golden_section_max(&f, a, b, options.tolerance);
    let mut candidates = vec![(grid.arg, grid.value), (refined, refined_value)];
    // golden section converges slowly onto the corner where depletion
    // switches on, so locate it directly
    if mode == ThresholdMode::EnergyAdapted {
        if let Some(k) = depletion_kink(model, priors, config.harvest_prob, lo, hi) {
            candidates.push((k, f(k)));
        }
    }
    let (theta_star, objective_value) = candidates
        .into_iter()
        .reduce(|best, c| {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                c
            } else {
                best
            }
        })
        .expect("nonempty");

    Ok(ThresholdSearchResult {
        theta_star,
        objective_value,
        depletion_at_optimum: depletion_at(model, priors, config, mode, theta_star)?,
        search_trace,
        degenerate: false,
    })
}

/// Threshold in `[a, b]` where the transmit probability crosses `pe`, by
/// bisection to adjacent floats.
fn depletion_kink(
    model: &ObservationModel,
    priors: &Priors,
    pe: f64,
    a: f64,
    b: f64,
) -> Option<f64> {
    let p = |t: f64| model.mixed_transmit_prob(priors, t);
    if !(p(a) > pe && p(b) <= pe) {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) > pe {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

fn depletion_at(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
    mode: ThresholdMode,
    theta: f64,
) -> Result<f64> {
    Ok(match mode {
        ThresholdMode::Unconstrained => 0.0,
        ThresholdMode::EnergyAdapted => {
            SensorOperatingPoint::evaluate(model, priors, &config.with_theta(theta))?.depletion
        }
    })
}

/// Unlimited-capacity sensor at threshold `theta` harvesting with `pe`.
pub fn unlimited_sensor(theta: f64, pe: f64) -> Result<EnergySensorConfig> {
    EnergySensorConfig::new(theta, pe, Capacity::Infinite)
}
