//! Special functions behind the Rician observation model.
//!
//! `bessel_i0e` is the exponentially scaled modified Bessel function of the
//! first kind, order zero. `marcum_q1` returns the first-order Marcum Q
//! function together with its complement, both with good relative accuracy
//! deep into either tail.

use std::f64::consts::PI;

/// Switch-over point between the power series and the asymptotic expansion.
const I0_SERIES_LIMIT: f64 = 40.0;

/// `exp(-|x|) * I0(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_SERIES_LIMIT {
        i0e_series(x)
    } else {
        i0e_asymptotic(x)
    }
}

fn i0e_series(x: f64) -> f64 {
    // sum (x^2/4)^k / (k!)^2, all terms positive
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum * (-x).exp()
}

/// Large-argument expansion, truncated at its smallest term.
fn i0e_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0_f64;
    loop {
        let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * x);
        if next >= term {
            break;
        }
        sum += next;
        if next <= sum * 1e-17 {
            break;
        }
        term = next;
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `I0(x)`; overflows to infinity for `|x|` beyond roughly 713.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0e(x) * x.abs().exp()
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 30 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Poisson(`mean`) probabilities for `k = 0..=hi`, built outward from the
/// mode with multiplicative recurrences. Terms below the f64 range are zero.
fn poisson_pmf(mean: f64, hi: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; hi + 1];
    if mean <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    let mode = (mean.floor() as usize).min(hi);
    pmf[mode] = (-mean + mode as f64 * mean.ln() - ln_factorial(mode as u64)).exp();
    for k in mode + 1..=hi {
        pmf[k] = pmf[k - 1] * mean / k as f64;
    }
    for k in (0..mode).rev() {
        pmf[k] = pmf[k + 1] * (k + 1) as f64 / mean;
    }
    // absorb the rounding of the anchor term
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    pmf
}

/// First-order Marcum Q function `Q1(a, b)` and `1 - Q1(a, b)`.
///
/// Uses the representation `Q1(a, b) = Pr[K_x <= K_l]` with independent
/// `K_l ~ Poisson(a^2/2)` and `K_x ~ Poisson(b^2/2)`, which is the Bessel
/// series regrouped as a Poisson mixture of Poisson tails. Every summand is
/// nonnegative, so both the value and its complement are accumulated
/// without cancellation. Terms beyond 12 standard deviations of the larger
/// mean are dropped.
pub fn marcum_q1(a: f64, b: f64) -> (f64, f64) {
    let a = a.abs();
    if b <= 0.0 {
        return (1.0, 0.0);
    }
    let lam = 0.5 * a * a;
    let x = 0.5 * b * b;
    let big = lam.max(x);
    let hi = (big + 12.0 * big.sqrt() + 40.0).ceil() as usize;
    let w = poisson_pmf(lam, hi);
    let v = poisson_pmf(x, hi);

    // upper[k] = sum_{j > k} v_j
    let mut upper = vec![0.0; hi + 1];
    let mut acc = 0.0;
    for k in (0..hi).rev() {
        acc += v[k + 1];
        upper[k] = acc;
    }
    let mut q = 0.0;
    let mut qc = 0.0;
    let mut lower = 0.0;
    for k in 0..=hi {
        lower += v[k];
        if w[k] != 0.0 {
            q += w[k] * lower;
            qc += w[k] * upper[k];
        }
    }
    // the smaller side carries full relative precision; derive the other
    // from it so the pair sums to one and stays monotone near 1
    if q <= qc {
        let q = q.clamp(0.0, 0.5);
        (q, 1.0 - q)
    } else {
        let qc = qc.clamp(0.0, 0.5);
        (1.0 - qc, qc)
    }
}
