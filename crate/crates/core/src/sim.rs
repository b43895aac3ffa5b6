//! Slot-by-slot Monte-Carlo simulation of the sensor network.
//!
//! Within a slot every sensor observes, decides and spends, then harvests:
//! `b' = min(b - w + e, capacity)`. Replicas draw from independent ChaCha
//! streams keyed by `(seed, replica)` and are reduced in replica order, so a
//! report depends only on its inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::{Capacity, EnergySensorConfig};
use crate::error::{invalid, Error, Result};
use crate::fusion::{FusionRule, NetworkConfig};
use crate::metrics::{sensor_pmf, SensorConditionalPMF};
use crate::observation::{Hypothesis, ObservationModel, ObservationSampler, Priors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    pub initial_battery: u64,
    pub replicas: u32,
    /// Contiguous batches per replica used for batch-means standard errors.
    pub batches: u32,
    pub sampler: ObservationSampler,
}

impl SimConfig {
    /// One replica, warmup of a tenth of the horizon, empty initial battery.
    pub fn new(horizon: u64, seed: u64) -> Self {
        Self {
            horizon,
            warmup: horizon / 10,
            seed,
            initial_battery: 0,
            replicas: 1,
            batches: 20,
            sampler: ObservationSampler::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be positive"));
        }
        if self.warmup >= self.horizon {
            return Err(invalid(
                "warmup",
                format!("{} must be below the horizon {}", self.warmup, self.horizon),
            ));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas", "need at least one replica"));
        }
        if self.batches == 0 || u64::from(self.batches) > self.horizon - self.warmup {
            return Err(invalid(
                "batches",
                "need between 1 and horizon - warmup batches",
            ));
        }
        if self.replicas * self.batches < 2 {
            return Err(invalid(
                "batches",
                "need at least two batches in total for standard errors",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStdErrors {
    pub depletion: f64,
    pub prob_one_given_h0: f64,
    pub prob_one_given_h1: f64,
    pub error_rate: f64,
}

/// Observed battery moves, split by the state they start from. Slots at a
/// finite capacity are excluded from the interior counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub from_empty: u64,
    pub empty_to_one: u64,
    pub from_interior: u64,
    pub interior_up: u64,
    pub interior_down: u64,
}

impl TransitionCounts {
    fn add(&mut self, other: &Self) {
        self.from_empty += other.from_empty;
        self.empty_to_one += other.empty_to_one;
        self.from_interior += other.from_interior;
        self.interior_up += other.interior_up;
        self.interior_down += other.interior_down;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub empirical_depletion: f64,
    pub empirical_pmf: SensorConditionalPMF,
    pub empirical_error_rate: f64,
    pub std_errors: SimStdErrors,
    /// Measured slots summed over replicas.
    pub steps_measured: u64,
    pub transitions: TransitionCounts,
}

pub fn step_battery(
    battery: u64,
    transmitted: bool,
    harvested: bool,
    capacity: Capacity,
) -> Result<u64> {
    if transmitted && battery == 0 {
        return Err(Error::Contract("transmission from an empty battery".into()));
    }
    let next = battery - u64::from(transmitted) + u64::from(harvested);
    Ok(match capacity {
        Capacity::Finite(cap) => next.min(cap),
        Capacity::Infinite => next,
    })
}

/// One-bit on-off message: a one needs a threshold crossing and a packet of
/// energy in the battery.
pub fn sensor_decide(x: f64, theta: f64, battery: u64) -> bool {
    x >= theta && battery > 0
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    empty: u64,
    sensor_slots: u64,
    ones: [u64; 2],
    sensor_slots_by_h: [u64; 2],
    errors: u64,
    slots: u64,
}

impl Tally {
    fn add(&mut self, o: &Self) {
        self.empty += o.empty;
        self.sensor_slots += o.sensor_slots;
        self.errors += o.errors;
        self.slots += o.slots;
        for h in 0..2 {
            self.ones[h] += o.ones[h];
            self.sensor_slots_by_h[h] += o.sensor_slots_by_h[h];
        }
    }
}

struct ReplicaOutcome {
    batches: Vec<Tally>,
    transitions: TransitionCounts,
}

struct Setup<'a> {
    model: &'a ObservationModel,
    priors: Priors,
    net: &'a NetworkConfig,
    config: &'a EnergySensorConfig,
    sim: &'a SimConfig,
    rule: FusionRule,
}

fn replica_rng(seed: u64, replica: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(replica));
    rng
}

fn run_replica(setup: &Setup<'_>, replica: u32) -> Result<ReplicaOutcome> {
    let sim = setup.sim;
    let n = setup.net.num_sensors as usize;
    let pe = setup.config.harvest_prob;
    let theta = setup.config.theta;
    let cap = setup.config.capacity;
    let pi1 = setup.priors.pi1();
    let mut rng = replica_rng(sim.seed, replica);

    let start = match cap {
        Capacity::Finite(c) => sim.initial_battery.min(c),
        Capacity::Infinite => sim.initial_battery,
    };
    let mut batteries = vec![start; n];
    let measured = sim.horizon - sim.warmup;
    let mut batches = vec![Tally::default(); sim.batches as usize];
    let mut transitions = TransitionCounts::default();

    for t in 0..sim.horizon {
        let h = if rng.random_bool(pi1) {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        };
        let measuring = t >= sim.warmup;
        let mut ones = 0u32;
        let mut empty = 0u64;
        for b in batteries.iter_mut() {
            let x = setup.model.sample(h, sim.sampler, &mut rng);
            let send = sensor_decide(x, theta, *b);
            let harvested = rng.random_bool(pe);
            let next = step_battery(*b, send, harvested, cap)?;
            debug_assert!(cap.finite().is_none_or(|c| next <= c));
            if measuring {
                if *b == 0 {
                    empty += 1;
                    transitions.from_empty += 1;
                    transitions.empty_to_one += u64::from(next == 1);
                } else if cap.finite().is_none_or(|c| *b < c) {
                    transitions.from_interior += 1;
                    transitions.interior_up += u64::from(next > *b);
                    transitions.interior_down += u64::from(next < *b);
                }
            }
            ones += u32::from(send);
            *b = next;
        }
        if measuring {
            let idx = ((t - sim.warmup) as u128 * u128::from(sim.batches) / u128::from(measured))
                as usize;
            let tally = &mut batches[idx];
            tally.empty += empty;
            tally.sensor_slots += n as u64;
            tally.ones[h.index()] += u64::from(ones);
            tally.sensor_slots_by_h[h.index()] += n as u64;
            tally.errors += u64::from(setup.rule.decide(ones) != h);
            tally.slots += 1;
        }
    }
    Ok(ReplicaOutcome {
        batches,
        transitions,
    })
}

/// Pooled ratio `sum(num) / sum(den)` with its batch-means standard error.
fn ratio_estimate(parts: &[(u64, u64)]) -> (f64, f64) {
    let num: u64 = parts.iter().map(|p| p.0).sum();
    let den: u64 = parts.iter().map(|p| p.1).sum();
    if den == 0 {
        return (0.0, 0.0);
    }
    let ratio = num as f64 / den as f64;
    let used: Vec<_> = parts.iter().filter(|p| p.1 > 0).collect();
    let k = used.len();
    if k < 2 {
        return (ratio, 0.0);
    }
    let ss: f64 = used
        .iter()
        .map(|&&(a, b)| (a as f64 - ratio * b as f64).powi(2))
        .sum();
    let se = (ss * k as f64 / (k as f64 - 1.0)).sqrt() / den as f64;
    (ratio, se)
}

pub fn run_simulation(
    model: &ObservationModel,
    net: &NetworkConfig,
    config: &EnergySensorConfig,
    sim: &SimConfig,
) -> Result<SimReport> {
    net.validate()?;
    config.validate()?;
    sim.validate()?;
    let priors = net.priors();
    let analytic = sensor_pmf(model, &priors, config)?;
    let setup = Setup {
        model,
        priors,
        net,
        config,
        sim,
        rule: FusionRule::new(net, &analytic)?,
    };

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<ReplicaOutcome>> = (0..sim.replicas)
        .into_par_iter()
        .map(|r| run_replica(&setup, r))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<ReplicaOutcome>> =
        (0..sim.replicas).map(|r| run_replica(&setup, r)).collect();

    let mut batches = Vec::new();
    let mut transitions = TransitionCounts::default();
    for outcome in outcomes {
        let outcome = outcome?;
        transitions.add(&outcome.transitions);
        batches.extend(outcome.batches);
    }
    let mut total = Tally::default();
    batches.iter().for_each(|b| total.add(b));

    let collect = |f: &dyn Fn(&Tally) -> (u64, u64)| batches.iter().map(f).collect::<Vec<_>>();
    let (depletion, se_depletion) = ratio_estimate(&collect(&|b| (b.empty, b.sensor_slots)));
    let (q0, se_q0) = ratio_estimate(&collect(&|b| (b.ones[0], b.sensor_slots_by_h[0])));
    let (q1, se_q1) = ratio_estimate(&collect(&|b| (b.ones[1], b.sensor_slots_by_h[1])));
    let (err, se_err) = ratio_estimate(&collect(&|b| (b.errors, b.slots)));

    Ok(SimReport {
        empirical_depletion: depletion,
        empirical_pmf: SensorConditionalPMF {
            prob_one_given_h0: q0,
            prob_one_given_h1: q1,
        },
        empirical_error_rate: err,
        std_errors: SimStdErrors {
            depletion: se_depletion,
            prob_one_given_h0: se_q0,
            prob_one_given_h1: se_q1,
            error_rate: se_err,
        },
        steps_measured: total.slots,
        transitions,
    })
}

/// Battery level of a single sensor over `steps` slots, starting empty.
pub fn battery_trace(
    model: &ObservationModel,
    priors: &Priors,
    config: &EnergySensorConfig,
    steps: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    config.validate()?;
    let mut rng = replica_rng(seed, 0);
    let mut b = 0u64;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(b);
        let h = if rng.random_bool(priors.pi1()) {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        };
        let x = model.sample(h, ObservationSampler::default(), &mut rng);
        let send = sensor_decide(x, config.theta, b);
        b = step_battery(
            b,
            send,
            rng.random_bool(config.harvest_prob),
            config.capacity,
        )?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_steps() {
        assert_eq!(step_battery(0, false, true, Capacity::Infinite).unwrap(), 1);
        assert_eq!(
            step_battery(5, false, true, Capacity::Finite(5)).unwrap(),
            5
        );
        assert_eq!(step_battery(3, true, true, Capacity::Infinite).unwrap(), 3);
        assert_eq!(step_battery(3, true, false, Capacity::Infinite).unwrap(), 2);
        assert!(matches!(
            step_battery(0, true, true, Capacity::Infinite),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn decisions() {
        assert!(!sensor_decide(2.0, 1.0, 0));
        assert!(!sensor_decide(0.5, 1.0, 5));
        assert!(sensor_decide(1.0, 1.0, 1));
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new(100, 1);
        assert!(c.validate().is_ok());
        c.warmup = 100;
        assert!(c.validate().is_err());
        let mut c = SimConfig::new(100, 1);
        c.replicas = 0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::new(100, 1);
        c.batches = 1;
        assert!(c.validate().is_err());
        c.replicas = 2;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn ratio_standard_error() {
        let (r, se) = ratio_estimate(&[(1, 10), (3, 10)]);
        assert_eq!(r, 0.2);
        // batch ratios 0.1 and 0.3: sd of mean = 0.1
        assert!((se - 0.1).abs() < 1e-15);
        assert_eq!(ratio_estimate(&[(0, 0), (0, 0)]), (0.0, 0.0));
    }

    #[test]
    fn full_harvest_never_empties() {
        let model = ObservationModel::unit(1.0).unwrap();
        let net = NetworkConfig::new(2, 0.5).unwrap();
        let cfg = EnergySensorConfig::unlimited(0.5, 1.0).unwrap();
        let mut sim = SimConfig::new(2_000, 3);
        sim.initial_battery = 1;
        let rep = run_simulation(&model, &net, &cfg, &sim).unwrap();
        assert_eq!(rep.empirical_depletion, 0.0);
        assert_eq!(rep.steps_measured, 1_800);
    }

    #[test]
    fn trace_respects_capacity() {
        let model = ObservationModel::unit(1.0).unwrap();
        let pr = Priors::from_pi1(0.5).unwrap();
        let cfg = EnergySensorConfig::new(1.0, 0.6, Capacity::Finite(3)).unwrap();
        let tr = battery_trace(&model, &pr, &cfg, 5_000, 9).unwrap();
        assert_eq!(tr[0], 0);
        assert!(tr.iter().all(|&b| b <= 3));
        assert!(tr.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
    }
}
