//! Independent reference computations for the test suites: adaptive
//! quadrature of the densities and brute-force enumeration over message
//! vectors. Nothing here calls the closed forms it is used to check.

#![allow(dead_code)]

use ehsense_core::{Hypothesis, ObservationModel, SensorConditionalPMF};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += K15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gauss_kronrod(f, a, b);
        if err <= tol || depth >= 50 {
            return value;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    recurse(f, a, b, tol, 0)
}

/// `Pr(X >= theta | h)` by integrating the density. The upper limit sits
/// 15 scale units beyond the larger of `theta` and the signal amplitude,
/// where the remaining mass is below 1e-45.
pub fn tail_by_quadrature(model: &ObservationModel, h: Hypothesis, theta: f64) -> f64 {
    let theta = theta.max(0.0);
    let sigma = model.scale_h0().max(model.scale_h1());
    let upper = theta.max(model.noncentrality()) + 15.0 * sigma;
    // split at the mode region so the adaptive rule sees the bulk
    let f = |x: f64| model.pdf(h, x).unwrap();
    let mid = model.noncentrality().clamp(theta, upper);
    integrate(&f, theta, mid, 1e-14) + integrate(&f, mid, upper, 1e-14)
}

fn vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..(1 << n)).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

fn vector_prob(pmfs: &[SensorConditionalPMF], u: &[bool], h: Hypothesis) -> f64 {
    pmfs.iter().zip(u).map(|(p, &bit)| p.prob(bit, h)).product()
}

/// Network distance `-ln sum_u sqrt(P(u|0) P(u|1))` over all `2^N` vectors.
pub fn brute_force_total_bhattacharyya(pmfs: &[SensorConditionalPMF]) -> f64 {
    let coeff: f64 = vectors(pmfs.len())
        .map(|u| {
            (vector_prob(pmfs, &u, Hypothesis::H0) * vector_prob(pmfs, &u, Hypothesis::H1)).sqrt()
        })
        .sum();
    -coeff.ln()
}

/// `sum_u min_h pi_h P(u | h)` over all `2^N` vectors, compensated summation.
pub fn brute_force_map_error(pmf: &SensorConditionalPMF, n: usize, pi1: f64) -> f64 {
    let pmfs = vec![*pmf; n];
    neumaier_sum(vectors(n).map(|u| {
        let a = (1.0 - pi1) * vector_prob(&pmfs, &u, Hypothesis::H0);
        let b = pi1 * vector_prob(&pmfs, &u, Hypothesis::H1);
        a.min(b)
    }))
}

pub fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for t in terms {
        let next = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - next) + t
        } else {
            (t - next) + sum
        };
        sum = next;
    }
    sum + comp
}

/// MAP decision for a specific vector, ties to `H0`.
pub fn brute_force_map_decision(pmf: &SensorConditionalPMF, u: &[bool], pi1: f64) -> Hypothesis {
    let pmfs = vec![*pmf; u.len()];
    let a = (1.0 - pi1) * vector_prob(&pmfs, u, Hypothesis::H0);
    let b = pi1 * vector_prob(&pmfs, u, Hypothesis::H1);
    if b > a {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
