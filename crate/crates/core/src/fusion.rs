//! MAP fusion of one-bit messages from identical sensors.
//!
//! With iid sensors the number of ones is a sufficient statistic, so the
//! `2^N` message vectors collapse onto `N + 1` binomial counts.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::SensorConditionalPMF;
use crate::observation::{Hypothesis, Priors};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub num_sensors: u32,
    pub prior_h1: f64,
}

impl NetworkConfig {
    pub fn new(num_sensors: u32, prior_h1: f64) -> Result<Self> {
        let net = Self {
            num_sensors,
            prior_h1,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sensors == 0 {
            return Err(invalid("num_sensors", "need at least one sensor"));
        }
        if !(self.prior_h1 > 0.0 && self.prior_h1 < 1.0) {
            return Err(invalid(
                "prior_h1",
                format!("{} must lie in (0, 1)", self.prior_h1),
            ));
        }
        Ok(())
    }

    pub fn priors(&self) -> Priors {
        Priors::from_pi1(self.prior_h1).expect("validated prior")
    }
}

/// `C(n, k)`, exact in integer arithmetic up to `n = 64`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 64 {
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            c = c * (n as u128 - i) / (i + 1);
        }
        c as f64
    } else {
        (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
    }
}

/// `pi_h * P(count | h)` for every count `0..=N`.
fn weighted_count_likelihoods(
    net: &NetworkConfig,
    pmf: &SensorConditionalPMF,
    h: Hypothesis,
) -> Vec<f64> {
    let n = net.num_sensors;
    let q = pmf.prob_one(h);
    let prior = net.priors().get(h);
    (0..=n)
        .map(|k| prior * binomial(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32))
        .collect()
}

/// Exact MAP error probability `sum_u min_h pi_h P(u | h)`.
pub fn map_error_probability(net: &NetworkConfig, pmf: &SensorConditionalPMF) -> Result<f64> {
    net.validate()?;
    SensorConditionalPMF::new(pmf.prob_one_given_h0, pmf.prob_one_given_h1)?;
    let l0 = weighted_count_likelihoods(net, pmf, Hypothesis::H0);
    let l1 = weighted_count_likelihoods(net, pmf, Hypothesis::H1);
    // summing the losing side directly avoids cancellation against 1
    let err: f64 = l0.iter().zip(&l1).map(|(a, b)| a.min(*b)).sum();
    Ok(err.clamp(0.0, 1.0))
}

/// MAP decision given the number of sensors that reported a one. Equal
/// posteriors resolve to `H0`.
pub fn map_decision(
    net: &NetworkConfig,
    pmf: &SensorConditionalPMF,
    ones_count: u32,
) -> Result<Hypothesis> {
    if ones_count > net.num_sensors {
        return Err(Error::Domain(format!(
            "{ones_count} ones from {} sensors",
            net.num_sensors
        )));
    }
    Ok(FusionRule::new(net, pmf)?.decide(ones_count))
}

/// Precomputed MAP decisions for every count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRule {
    decisions: Vec<Hypothesis>,
}

impl FusionRule {
    pub fn new(net: &NetworkConfig, pmf: &SensorConditionalPMF) -> Result<Self> {
        net.validate()?;
        let l0 = weighted_count_likelihoods(net, pmf, Hypothesis::H0);
        let l1 = weighted_count_likelihoods(net, pmf, Hypothesis::H1);
        let decisions = l0
            .iter()
            .zip(&l1)
            .map(|(a, b)| {
                if b > a {
                    Hypothesis::H1
                } else {
                    Hypothesis::H0
                }
            })
            .collect();
        Ok(Self { decisions })
    }

    pub fn decide(&self, ones_count: u32) -> Hypothesis {
        self.decisions[ones_count as usize]
    }
}
