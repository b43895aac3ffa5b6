//! Browser bindings. Each export returns a flat `Float64Array`, one record
//! after another, so the page can plot without any glue objects.

use ehsense_core::{
    bhattacharyya_total, error_bound, map_error_probability, objective, optimize_threshold,
    EnergySensorConfig, NetworkConfig, ObservationModel, Priors, Result, SensorOperatingPoint,
    ThresholdMode,
};
use wasm_bindgen::prelude::*;

/// Fields per record of [`distance_curve`].
pub const CURVE_STRIDE: usize = 4;
/// Fields per record of [`s_sweep`] and [`error_curve`].
pub const SWEEP_STRIDE: usize = 5;

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// `[theta, B adapted, B unconstrained, p0]` for `theta` in `[0, theta_max]`.
pub fn distance_curve_rs(
    s: f64,
    pi1: f64,
    pe: f64,
    theta_max: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let model = ObservationModel::unit(s)?;
    let priors = Priors::from_pi1(pi1)?;
    let base = EnergySensorConfig::unlimited(0.0, pe)?;
    let mut out = Vec::with_capacity(points * CURVE_STRIDE);
    for theta in grid(0.0, theta_max, points) {
        let point = SensorOperatingPoint::evaluate(&model, &priors, &base.with_theta(theta))?;
        out.extend([
            theta,
            point.bhattacharyya(),
            point.without_depletion().bhattacharyya(),
            point.depletion,
        ]);
    }
    Ok(out)
}

/// `[s, B at theta*, B at theta_u, theta*, theta_u]` for `s` in `[0, s_max]`.
pub fn s_sweep_rs(pi1: f64, pe: f64, s_max: f64, points: usize) -> Result<Vec<f64>> {
    let priors = Priors::from_pi1(pi1)?;
    let base = EnergySensorConfig::unlimited(0.0, pe)?;
    let mut out = Vec::with_capacity(points * SWEEP_STRIDE);
    for s in grid(0.0, s_max, points) {
        let model = ObservationModel::unit(s)?;
        let adapted = optimize_threshold(&model, &priors, &base, ThresholdMode::EnergyAdapted)?;
        let plain = optimize_threshold(&model, &priors, &base, ThresholdMode::Unconstrained)?;
        let at_u = objective(
            &model,
            &priors,
            &base,
            ThresholdMode::EnergyAdapted,
            plain.theta_star,
        )?;
        out.extend([
            s,
            adapted.objective_value,
            at_u,
            adapted.theta_star,
            plain.theta_star,
        ]);
    }
    Ok(out)
}

/// `[s, error adapted, error unconstrained, bound adapted, bound unconstrained]`
/// for an `n`-sensor network.
pub fn error_curve_rs(pi1: f64, pe: f64, n: u32, s_max: f64, points: usize) -> Result<Vec<f64>> {
    let net = NetworkConfig::new(n, pi1)?;
    let priors = net.priors();
    let base = EnergySensorConfig::unlimited(0.0, pe)?;
    let mut out = Vec::with_capacity(points * SWEEP_STRIDE);
    for s in grid(0.0, s_max, points) {
        let model = ObservationModel::unit(s)?;
        let at = |mode| -> Result<(f64, f64)> {
            let theta = optimize_threshold(&model, &priors, &base, mode)?.theta_star;
            let point = SensorOperatingPoint::evaluate(&model, &priors, &base.with_theta(theta))?;
            let total = bhattacharyya_total(&vec![point.bhattacharyya(); n as usize]);
            Ok((
                map_error_probability(&net, &point.pmf())?,
                error_bound(total, &priors),
            ))
        };
        let (ea, ba) = at(ThresholdMode::EnergyAdapted)?;
        let (eu, bu) = at(ThresholdMode::Unconstrained)?;
        out.extend([s, ea, eu, ba, bu]);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn distance_curve(
    s: f64,
    pi1: f64,
    pe: f64,
    theta_max: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsValue> {
    js(distance_curve_rs(s, pi1, pe, theta_max, points))
}

#[wasm_bindgen]
pub fn s_sweep(
    pi1: f64,
    pe: f64,
    s_max: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsValue> {
    js(s_sweep_rs(pi1, pe, s_max, points))
}

#[wasm_bindgen]
pub fn error_curve(
    pi1: f64,
    pe: f64,
    n: u32,
    s_max: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsValue> {
    js(error_curve_rs(pi1, pe, n, s_max, points))
}
