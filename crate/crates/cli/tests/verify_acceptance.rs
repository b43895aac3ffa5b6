//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::Command;
use std::time::Instant;

use common::{brute_force_map_error, brute_force_total_bhattacharyya, tail_by_quadrature};
use ehsense_core::{
    bhattacharyya_single, bhattacharyya_total, build_chain, depletion_infinite,
    map_error_probability, run_simulation, stationary_finite, Capacity, EnergySensorConfig,
    Hypothesis, NetworkConfig, ObservationModel, Priors, SensorConditionalPMF, SimConfig,
    ThresholdMode,
};
use ehsense_runner::experiment::{energy_aware_distance, run_fig3, run_fig4, run_simulate};
use ehsense_runner::{ExperimentKind, ExperimentSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const C1_THETAS: [f64; 5] = [0.25, 0.5, 0.75, 1.0, 1.25];
const C1_PES: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];

fn depletion_vs_simulation() -> Outcome {
    let start = Instant::now();
    let model = ObservationModel::unit(1.0).unwrap();
    let net = NetworkConfig::new(1, 0.5).unwrap();
    let mut worst = (0.0_f64, 0.0, 0.0);
    let mut failures = 0;
    for (i, &theta) in C1_THETAS.iter().enumerate() {
        let p = model.mixed_transmit_prob(&net.priors(), theta);
        for (j, &pe) in C1_PES.iter().enumerate() {
            assert!(pe < p);
            let cfg = EnergySensorConfig::unlimited(theta, pe).unwrap();
            let sim = SimConfig {
                warmup: 100_000,
                ..SimConfig::new(1_100_000, 1000 + (5 * i + j) as u64)
            };
            let rep = run_simulation(&model, &net, &cfg, &sim).unwrap();
            let exact = depletion_infinite(pe, p);
            let dev = (rep.empirical_depletion - exact).abs();
            let tol = 0.01_f64.max(3.0 * rep.std_errors.depletion);
            if dev > tol {
                failures += 1;
            }
            if dev / tol > worst.0 {
                worst = (dev / tol, theta, pe);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs <= 60.0,
        format!(
            "25 points, {failures} outside tolerance, worst dev/tol {:.3} at theta={} pe={}, {secs:.1}s",
            worst.0, worst.1, worst.2
        ),
    )
}

fn depletion_vs_truncated_chain() -> Outcome {
    let model = ObservationModel::unit(1.0).unwrap();
    let priors = Priors::from_pi1(0.5).unwrap();
    let mut cases: Vec<(f64, f64)> = Vec::new();
    for &theta in &C1_THETAS {
        let p = model.mixed_transmit_prob(&priors, theta);
        cases.extend(C1_PES.iter().map(|&pe| (pe, p)));
    }
    for i in 1..20 {
        for j in 1..20 {
            cases.push((i as f64 / 20.0, j as f64 / 20.0));
        }
    }
    let mut checked = 0;
    let mut worst = 0.0_f64;
    for (pe, p) in cases {
        if pe / p > 0.9 {
            continue;
        }
        let cfg = EnergySensorConfig::new(0.0, pe, Capacity::Finite(10_000)).unwrap();
        let finite = stationary_finite(&build_chain(&cfg, p).unwrap())
            .unwrap()
            .depletion_prob;
        worst = worst.max((finite - depletion_infinite(pe, p)).abs());
        checked += 1;
    }
    outcome(
        worst <= 1e-6,
        format!("{checked} points, max |diff| {worst:.3e}"),
    )
}

fn random_pmf(rng: &mut ChaCha8Rng) -> SensorConditionalPMF {
    SensorConditionalPMF::new(rng.random(), rng.random()).unwrap()
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0_f64;
    for n in 1..=10 {
        for _ in 0..100 {
            let pmfs: Vec<_> = (0..n).map(|_| random_pmf(&mut rng)).collect();
            let singles: Vec<f64> = pmfs.iter().map(bhattacharyya_single).collect();
            worst = worst.max(
                (bhattacharyya_total(&singles) - brute_force_total_bhattacharyya(&pmfs)).abs(),
            );
        }
    }
    outcome(
        worst <= 1e-10,
        format!("1000 cases, max |diff| {worst:.3e}"),
    )
}

fn map_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let pmf = random_pmf(&mut rng);
        let pi1 = rng.random_range(0.01..0.99);
        for n in 1..=12u32 {
            let fast = map_error_probability(&NetworkConfig::new(n, pi1).unwrap(), &pmf).unwrap();
            worst = worst.max((fast - brute_force_map_error(&pmf, n as usize, pi1)).abs());
        }
    }
    outcome(
        worst <= 1e-14,
        format!("1200 cases, max |diff| {worst:.3e}"),
    )
}

fn fig4_spec() -> ExperimentSpec {
    ExperimentSpec {
        kind: Some(ExperimentKind::ErrorCurve),
        num_sensors: 4,
        ..ExperimentSpec::default()
    }
}

fn fig3_spec() -> ExperimentSpec {
    ExperimentSpec {
        kind: Some(ExperimentKind::SweepS),
        ..ExperimentSpec::default()
    }
}

fn bound_holds(rows: &[ehsense_runner::experiment::Fig4Row]) -> Outcome {
    let violations = rows
        .iter()
        .filter(|r| r.pe_unconstrained > r.bound_unconstrained || r.pe_adapted > r.bound_adapted)
        .count();
    let slack = rows
        .iter()
        .flat_map(|r| {
            [
                r.bound_unconstrained - r.pe_unconstrained,
                r.bound_adapted - r.pe_adapted,
            ]
        })
        .fold(f64::INFINITY, f64::min);
    outcome(
        violations == 0,
        format!(
            "{} rows x 2 designs, {violations} violations, min slack {slack:.3e}",
            rows.len()
        ),
    )
}

fn adaptation_gain(rows: &[ehsense_runner::experiment::Fig3Row]) -> Outcome {
    let mut losses = 0;
    let mut best_strict = 0.0_f64;
    for r in rows {
        let at_u = energy_aware_distance(r.s, r.pi1, r.pe, r.theta_u).unwrap();
        let at_star = energy_aware_distance(r.s, r.pi1, r.pe, r.theta_star).unwrap();
        if at_star < at_u {
            losses += 1;
        }
        if r.pe < r.pi1 {
            best_strict = best_strict.max(at_star - at_u);
        }
    }
    outcome(
        losses == 0 && best_strict > 1e-6,
        format!(
            "{} grid points, {losses} losses, largest gain with pe < pi1 {best_strict:.4}",
            rows.len()
        ),
    )
}

fn regime_dichotomy(rows: &[ehsense_runner::experiment::Fig3Row]) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for &(pi1, pe) in ehsense_runner::config::DEFAULT_PAIRS.iter() {
        let at = |s: f64| {
            rows.iter()
                .find(|r| r.s == s && r.pi1 == pi1 && r.pe == pe)
                .map(|r| r.b_adapted_theta)
                .expect("grid contains s = 20 and s = 40")
        };
        let (b20, b40) = (at(20.0), at(40.0));
        if pe < pi1 {
            ok &= b40 / b20 <= 1.05;
            notes.push(format!("({pi1},{pe}) ratio {:.4}", b40 / b20));
        } else {
            ok &= b40 >= b20 + 0.1;
            notes.push(format!("({pi1},{pe}) gain {:.2}", b40 - b20));
        }
    }
    outcome(ok, notes.join(", "))
}

fn fig4_property(rows: &[ehsense_runner::experiment::Fig4Row]) -> Outcome {
    let order_violations = rows
        .iter()
        .filter(|r| r.pe_adapted > r.pe_unconstrained)
        .count();

    let mut runs = 0;
    let mut misses = Vec::new();
    let mut worst_z = 0.0_f64;
    for &s in &[1.0, 2.0, 3.0, 4.0] {
        for &(pi1, pe) in ehsense_runner::config::DEFAULT_PAIRS.iter() {
            for mode in [ThresholdMode::Unconstrained, ThresholdMode::EnergyAdapted] {
                let mut spec = ExperimentSpec {
                    s,
                    pi1,
                    pe,
                    mode,
                    num_sensors: 4,
                    ..ExperimentSpec::default()
                };
                spec.sim.horizon = 1_100_000;
                spec.sim.warmup = Some(100_000);
                let (row, _) = run_simulate(&spec, 4000 + runs).unwrap();
                runs += 1;
                let z = (row.empirical_error - row.exact_error) / row.se_error;
                worst_z = if z.abs() > worst_z.abs() { z } else { worst_z };
                if z.abs() > 3.0 {
                    misses.push(format!(
                        "s={s} ({pi1},{pe}) {mode:?} z={z:.1} p0={:.3}",
                        row.analytic_p0
                    ));
                }
            }
        }
    }
    let mut detail = format!(
        "ordering: {} rows, {order_violations} violations; simulation: {runs} runs, {} beyond 3 s.e., worst z {worst_z:.1}",
        rows.len(),
        misses.len()
    );
    if !misses.is_empty() {
        detail.push_str(&format!("; {}", misses.join("; ")));
    }
    outcome(order_violations == 0 && misses.is_empty(), detail)
}

fn marcum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = (0.0_f64, 0.0, 0.0);
    for _ in 0..200 {
        let s = rng.random_range(0.0..=40.0);
        let theta = rng.random_range(0.0..=10.0);
        let model = ObservationModel::unit(s).unwrap();
        let d = (model.tail_prob(Hypothesis::H1, theta)
            - tail_by_quadrature(&model, Hypothesis::H1, theta))
        .abs();
        if d > worst.0 {
            worst = (d, s, theta);
        }
    }
    outcome(
        worst.0 <= 1e-8,
        format!(
            "200 points, max |diff| {:.3e} at s={:.3} theta={:.3}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_ehsense"))
            .args([
                "simulate", "--seed", "42", "--s", "1.5", "--pi1", "0.3", "--pe", "0.2",
            ])
            .args([
                "--num-sensors",
                "4",
                "--horizon",
                "200000",
                "--replicas",
                "2",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    outcome(
        a == b && !a.is_empty(),
        format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() {
    let fig3 = run_fig3(&fig3_spec()).expect("fig3 grid");
    let fig4 = run_fig4(&fig4_spec()).expect("fig4 grid");

    let criteria: Vec<(&str, Check)> = vec![
        (
            "depletion closed form vs simulation",
            Box::new(depletion_vs_simulation),
        ),
        (
            "depletion closed form vs truncated chain",
            Box::new(depletion_vs_truncated_chain),
        ),
        ("Bhattacharyya decomposition", Box::new(decomposition)),
        ("MAP count collapse vs enumeration", Box::new(map_collapse)),
        ("error bound", Box::new(|| bound_holds(&fig4))),
        (
            "adapted threshold never loses",
            Box::new(|| adaptation_gain(&fig3)),
        ),
        (
            "saturation vs growth regimes",
            Box::new(|| regime_dichotomy(&fig3)),
        ),
        (
            "network error ordering and simulation",
            Box::new(|| fig4_property(&fig4)),
        ),
        ("Marcum Q vs quadrature", Box::new(marcum_oracle)),
        ("simulate determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
