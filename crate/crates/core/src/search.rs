//! Grid scan followed by golden-section refinement, for maximizing a scalar
//! objective that may carry kinks and several local maxima.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub arg: f64,
    pub value: f64,
    pub trace: Vec<(f64, f64)>,
}

/// Evaluates `f` on `points` evenly spaced nodes of `[lo, hi]` and returns
/// the best node. Ties go to the smallest abscissa. Evaluation order does not
/// affect the result.
pub fn grid_max<F>(f: &F, lo: f64, hi: f64, points: usize) -> GridMax
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| {
        if i + 1 == points {
            hi
        } else {
            lo + step * i as f64
        }
    };

    #[cfg(feature = "parallel")]
    let trace: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .map(|i| (node(i), f(node(i))))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let trace: Vec<(f64, f64)> = (0..points).map(|i| (node(i), f(node(i)))).collect();

    let mut best = 0;
    for (i, &(_, v)) in trace.iter().enumerate() {
        if v > trace[best].1 {
            best = i;
        }
    }
    GridMax {
        arg: trace[best].0,
        value: trace[best].1,
        trace,
    }
}

/// Golden-section maximization of `f` on `[a, b]` until the bracket is no
/// wider than `tol`. Returns the best point seen.
pub fn golden_section_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(a, f(a)), (c, fc), (d, fd), (b, f(b))];
    let mut best = candidates[0];
    for &cand in &candidates[1..] {
        if cand.1 > best.1 || (cand.1 == best.1 && cand.0 < best.0) {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let f = |x: f64| -(x - 1.234_567).powi(2);
        let (x, _) = golden_section_max(&f, 0.0, 3.0, 1e-10);
        assert!((x - 1.234_567).abs() < 1e-8);
    }

    #[test]
    fn golden_section_handles_kinked_peak() {
        let f = |x: f64| -(x - 0.75).abs();
        let (x, v) = golden_section_max(&f, 0.0, 2.0, 1e-9);
        assert!((x - 0.75).abs() < 1e-8);
        assert!(v <= 0.0 && v > -1e-8);
    }

    #[test]
    fn grid_ties_go_left() {
        let f = |_x: f64| 1.0;
        let g = grid_max(&f, 0.0, 1.0, 11);
        assert_eq!(g.arg, 0.0);
        assert_eq!(g.trace.len(), 11);
        assert_eq!(g.trace[10].0, 1.0);
    }

    #[test]
    fn grid_picks_global_of_two_bumps() {
        let f =
            |x: f64| (-(x - 1.0).powi(2) * 20.0).exp() + 1.5 * (-(x - 4.0).powi(2) * 20.0).exp();
        let g = grid_max(&f, 0.0, 5.0, 501);
        assert!((g.arg - 4.0).abs() < 0.011);
    }
}
