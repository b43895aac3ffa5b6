//! Decentralized binary detection with energy-harvesting sensors.
//!
//! Sensors threshold a Rayleigh/Rician observation and report a one-bit
//! on-off message to a fusion center, paying one packet of harvested energy
//! per transmission. This crate provides the observation model, the battery
//! birth-death chain, the Bhattacharyya distance and its threshold
//! optimization, exact MAP fusion, and a Monte-Carlo simulator of the whole
//! network.

pub mod battery;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod observation;
pub mod search;
pub mod sim;
pub mod special;

pub use battery::{
    build_chain, depletion, depletion_infinite, stationary_finite, BatterySteadyState,
    BirthDeathChain, Capacity, EnergySensorConfig,
};
pub use error::{Error, Result};
pub use fusion::{map_decision, map_error_probability, FusionRule, NetworkConfig};
pub use metrics::{
    bhattacharyya_single, bhattacharyya_total, error_bound, objective, optimize_threshold,
    optimize_threshold_with, sensor_pmf, SearchOptions, SensorConditionalPMF, SensorOperatingPoint,
    ThresholdMode, ThresholdSearchResult,
};
pub use observation::{Hypothesis, ObservationModel, ObservationSampler, Priors};
pub use sim::{run_simulation, sensor_decide, step_battery, SimConfig, SimReport};
