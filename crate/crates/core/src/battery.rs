//! Battery charge as a birth-death chain.
//!
//! From any nonempty state the battery moves up one packet with probability
//! `(1 - P) * pe` (harvest, no transmission) and down one with probability
//! `P * (1 - pe)` (transmission, no harvest), where `P` is the sensor's
//! unconstrained transmit probability. From the empty state it can only move
//! up, with probability `pe`.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    pub fn finite(self) -> Option<u64> {
        match self {
            Capacity::Finite(c) => Some(c),
            Capacity::Infinite => None,
        }
    }
}

/// Per-sensor policy and energy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySensorConfig {
    pub theta: f64,
    pub harvest_prob: f64,
    pub capacity: Capacity,
}

impl EnergySensorConfig {
    pub fn new(theta: f64, harvest_prob: f64, capacity: Capacity) -> Result<Self> {
        let cfg = Self {
            theta,
            harvest_prob,
            capacity,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn unlimited(theta: f64, harvest_prob: f64) -> Result<Self> {
        Self::new(theta, harvest_prob, Capacity::Infinite)
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("harvest_prob", self.harvest_prob)?;
        if self.theta.is_nan() {
            return Err(invalid("theta", "NaN threshold"));
        }
        if self.capacity == Capacity::Finite(0) {
            return Err(invalid("capacity", "finite capacity must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathChain {
    /// Birth probability out of the empty state.
    pub lambda0: f64,
    /// Birth probability out of any state `k >= 1`.
    pub lambda_tail: f64,
    /// Death probability out of any state `k >= 1`.
    pub mu_tail: f64,
    pub capacity: Capacity,
}

impl BirthDeathChain {
    pub fn birth(&self, state: u64) -> f64 {
        if let Capacity::Finite(c) = self.capacity {
            if state >= c {
                return 0.0;
            }
        }
        if state == 0 {
            self.lambda0
        } else {
            self.lambda_tail
        }
    }

    pub fn death(&self, state: u64) -> f64 {
        if state == 0 {
            0.0
        } else {
            self.mu_tail
        }
    }

    /// One-step transition probability `Pr(B' = to | B = from)`.
    pub fn transition(&self, from: u64, to: u64) -> f64 {
        let up = self.birth(from);
        let down = self.death(from);
        if to == from + 1 {
            up
        } else if from > 0 && to == from - 1 {
            down
        } else if to == from {
            1.0 - up - down
        } else {
            0.0
        }
    }
}

pub fn build_chain(config: &EnergySensorConfig, transmit_prob: f64) -> Result<BirthDeathChain> {
    config.validate()?;
    check_probability("transmit_prob", transmit_prob)?;
    let pe = config.harvest_prob;
    Ok(BirthDeathChain {
        lambda0: pe,
        lambda_tail: (1.0 - transmit_prob) * pe,
        mu_tail: transmit_prob * (1.0 - pe),
        capacity: config.capacity,
    })
}

/// Long-run fraction of slots with an empty battery, unlimited capacity.
///
/// Zero whenever harvesting keeps pace with demand (`pe >= P`), otherwise
/// `1 - pe / P`.
pub fn depletion_infinite(harvest_prob: f64, transmit_prob: f64) -> f64 {
    if harvest_prob >= transmit_prob {
        0.0
    } else {
        1.0 - harvest_prob / transmit_prob
    }
}

/// `true` when the unlimited-capacity chain is null recurrent: harvest and
/// demand balance exactly, the empty fraction is 0 but return times to the
/// empty state have infinite mean.
pub fn is_null_recurrent(harvest_prob: f64, transmit_prob: f64) -> bool {
    harvest_prob == transmit_prob && harvest_prob > 0.0 && harvest_prob < 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySteadyState {
    pub depletion_prob: f64,
    /// Stationary probabilities of states `0..=capacity` (finite chains).
    pub distribution: Option<Vec<f64>>,
    /// `sum_{k>=1} prod_{i<k} lambda_i / prod_{i<=k} mu_i`; infinite when the
    /// series diverges.
    pub capacity_series: Option<f64>,
    pub null_recurrent: bool,
}

impl BatterySteadyState {
    pub fn infinite(harvest_prob: f64, transmit_prob: f64) -> Self {
        let depletion_prob = depletion_infinite(harvest_prob, transmit_prob);
        let capacity_series = if depletion_prob > 0.0 {
            Some(1.0 / depletion_prob - 1.0)
        } else {
            Some(f64::INFINITY)
        };
        Self {
            depletion_prob,
            distribution: None,
            capacity_series,
            null_recurrent: is_null_recurrent(harvest_prob, transmit_prob),
        }
    }
}

/// Stationary distribution of a finite-capacity chain from the cut balance
/// `lambda_k p_k = mu_{k+1} p_{k+1}`, accumulated in log space.
pub fn stationary_finite(chain: &BirthDeathChain) -> Result<BatterySteadyState> {
    let cap = chain
        .capacity
        .finite()
        .ok_or_else(|| invalid("capacity", "stationary_finite needs a finite capacity"))?;
    if cap == 0 {
        return Err(invalid("capacity", "finite capacity must be at least 1"));
    }
    check_probability("lambda0", chain.lambda0)?;
    check_probability("lambda_tail", chain.lambda_tail)?;
    check_probability("mu_tail", chain.mu_tail)?;
    let n = cap as usize + 1;

    let point_mass = |state: usize| {
        let mut dist = vec![0.0; n];
        dist[state] = 1.0;
        BatterySteadyState {
            depletion_prob: dist[0],
            distribution: Some(dist),
            capacity_series: Some(if state == 0 { 0.0 } else { f64::INFINITY }),
            null_recurrent: false,
        }
    };
    if chain.lambda0 == 0.0 {
        return Ok(point_mass(0));
    }
    if chain.mu_tail == 0.0 {
        // Charging never reverses; mass piles up at the highest reachable state.
        let top = if chain.lambda_tail > 0.0 {
            cap as usize
        } else {
            1
        };
        return Ok(point_mass(top));
    }

    let mut log_w = vec![f64::NEG_INFINITY; n];
    log_w[0] = 0.0;
    log_w[1] = (chain.lambda0 / chain.mu_tail).ln();
    let log_ratio = (chain.lambda_tail / chain.mu_tail).ln();
    for k in 2..n {
        log_w[k] = log_w[k - 1] + log_ratio;
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut dist: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = dist.iter().sum();
    dist.iter_mut().for_each(|p| *p /= total);

    let capacity_series = if dist[0] > 0.0 {
        dist[1..].iter().sum::<f64>() / dist[0]
    } else {
        f64::INFINITY
    };
    Ok(BatterySteadyState {
        depletion_prob: dist[0],
        distribution: Some(dist),
        capacity_series: Some(capacity_series),
        null_recurrent: false,
    })
}

/// Empty-battery probability for either capacity regime.
pub fn depletion(config: &EnergySensorConfig, transmit_prob: f64) -> Result<f64> {
    match config.capacity {
        Capacity::Infinite => {
            check_probability("transmit_prob", transmit_prob)?;
            Ok(depletion_infinite(config.harvest_prob, transmit_prob))
        }
        Capacity::Finite(_) => {
            let chain = build_chain(config, transmit_prob)?;
            Ok(stationary_finite(&chain)?.depletion_prob)
        }
    }
}
