//! Conditional observation laws: Rayleigh under `H = 0`, Rician under `H = 1`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Error, Result};
use crate::special::{bessel_i0e, marcum_q1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// How [`ObservationModel::sample`] draws from the conditional laws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSampler {
    /// Rayleigh by its closed-form inverse; Rician as the modulus of a
    /// complex Gaussian with mean `s`.
    #[default]
    GaussianPair,
    /// Inverse of the tail function for both laws (Rician by safeguarded
    /// Newton iteration, five to ten tail evaluations per draw).
    InverseCdf,
}

/// Prior probabilities `(pi0, pi1)` of the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pi0: f64,
    pi1: f64,
}

impl Priors {
    const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(pi0: f64, pi1: f64) -> Result<Self> {
        check_probability("pi0", pi0)?;
        check_probability("pi1", pi1)?;
        if (pi0 + pi1 - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(invalid("priors", format!("pi0 + pi1 = {} != 1", pi0 + pi1)));
        }
        Ok(Self { pi0, pi1 })
    }

    pub fn from_pi1(pi1: f64) -> Result<Self> {
        check_probability("pi1", pi1)?;
        Ok(Self {
            pi0: 1.0 - pi1,
            pi1,
        })
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn get(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.pi0,
            Hypothesis::H1 => self.pi1,
        }
    }
}

/// Rayleigh (scale `scale_h0`) versus Rician (scale `scale_h1`, amplitude
/// `noncentrality`) observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    scale_h0: f64,
    scale_h1: f64,
    noncentrality: f64,
}

impl ObservationModel {
    pub fn new(scale_h0: f64, scale_h1: f64, noncentrality: f64) -> Result<Self> {
        if !(scale_h0 > 0.0 && scale_h0.is_finite()) {
            return Err(invalid("scale_h0", format!("{scale_h0} must be positive")));
        }
        if !(scale_h1 > 0.0 && scale_h1.is_finite()) {
            return Err(invalid("scale_h1", format!("{scale_h1} must be positive")));
        }
        if !(noncentrality >= 0.0 && noncentrality.is_finite()) {
            return Err(invalid(
                "noncentrality",
                format!("{noncentrality} must be nonnegative"),
            ));
        }
        Ok(Self {
            scale_h0,
            scale_h1,
            noncentrality,
        })
    }

    /// Unit scales, amplitude `s`.
    pub fn unit(s: f64) -> Result<Self> {
        Self::new(1.0, 1.0, s)
    }

    pub fn scale_h0(&self) -> f64 {
        self.scale_h0
    }

    pub fn scale_h1(&self) -> f64 {
        self.scale_h1
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    /// Conditional density `f(x | h)`.
    pub fn pdf(&self, h: Hypothesis, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!(
                "observation {x} must be nonnegative"
            )));
        }
        Ok(self.pdf_unchecked(h, x))
    }

    pub(crate) fn pdf_unchecked(&self, h: Hypothesis, x: f64) -> f64 {
        match h {
            Hypothesis::H0 => {
                let v = self.scale_h0 * self.scale_h0;
                x / v * (-0.5 * x * x / v).exp()
            }
            Hypothesis::H1 => {
                let v = self.scale_h1 * self.scale_h1;
                let s = self.noncentrality;
                let d = x - s;
                x / v * (-0.5 * d * d / v).exp() * bessel_i0e(x * s / v)
            }
        }
    }

    /// `Pr(X >= theta | h)`. Negative thresholds give 1.
    pub fn tail_prob(&self, h: Hypothesis, theta: f64) -> f64 {
        self.tail_pair(h, theta).0
    }

    /// `(Pr(X >= theta | h), Pr(X < theta | h))`, each accurate in relative
    /// terms even when the other is close to one.
    pub fn tail_pair(&self, h: Hypothesis, theta: f64) -> (f64, f64) {
        if theta <= 0.0 {
            return (1.0, 0.0);
        }
        if theta == f64::INFINITY {
            return (0.0, 1.0);
        }
        match h {
            Hypothesis::H0 => rayleigh_tail(theta / self.scale_h0),
            Hypothesis::H1 => {
                let sigma = self.scale_h1;
                if self.noncentrality == 0.0 {
                    rayleigh_tail(theta / sigma)
                } else {
                    marcum_q1(self.noncentrality / sigma, theta / sigma)
                }
            }
        }
    }

    /// Unconstrained probability that a sensor wants to transmit,
    /// `pi0 * P0(theta) + pi1 * P1(theta)`.
    pub fn mixed_transmit_prob(&self, priors: &Priors, theta: f64) -> f64 {
        priors.pi0() * self.tail_prob(Hypothesis::H0, theta)
            + priors.pi1() * self.tail_prob(Hypothesis::H1, theta)
    }

    /// Observation whose tail probability equals `u`, i.e. the inverse of
    /// [`tail_prob`](Self::tail_prob). Feeding `u ~ Uniform(0, 1]` yields a
    /// draw from `f(x | h)`.
    pub fn inverse_tail(&self, h: Hypothesis, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("tail level {u} must lie in (0, 1]")));
        }
        Ok(self.inverse_tail_unchecked(h, u))
    }

    pub(crate) fn inverse_tail_unchecked(&self, h: Hypothesis, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        let rayleigh = |sigma: f64| sigma * (-2.0 * u.ln()).sqrt();
        match h {
            Hypothesis::H0 => rayleigh(self.scale_h0),
            Hypothesis::H1 if self.noncentrality == 0.0 => rayleigh(self.scale_h1),
            Hypothesis::H1 => self.invert_rician(u),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        h: Hypothesis,
        sampler: ObservationSampler,
        rng: &mut R,
    ) -> f64 {
        match (sampler, h) {
            (ObservationSampler::GaussianPair, Hypothesis::H1) => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (self.noncentrality + self.scale_h1 * re).hypot(self.scale_h1 * im)
            }
            _ => {
                // 1 - U lies in (0, 1]
                let u = 1.0 - rng.random::<f64>();
                self.inverse_tail_unchecked(h, u)
            }
        }
    }

    /// Newton iteration on the tail, safeguarded by a shrinking bracket.
    fn invert_rician(&self, u: f64) -> f64 {
        const TOL: f64 = 1e-10;
        let sigma = self.scale_h1;
        let f = |x: f64| self.tail_prob(Hypothesis::H1, x) - u;

        let mut lo = 0.0;
        let mut hi = self.noncentrality + sigma * ((-2.0 * u.ln()).sqrt() + 1.0);
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        // tail is decreasing: f(lo) >= 0 >= f(hi)
        let mut x = self.noncentrality.clamp(lo, hi);
        for _ in 0..200 {
            let fx = f(x);
            if fx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let density = self.pdf_unchecked(Hypothesis::H1, x);
            let newton = x + fx / density;
            let next = if density > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= TOL || hi - lo <= TOL {
                return next;
            }
            x = next;
        }
        x
    }
}

fn rayleigh_tail(z: f64) -> (f64, f64) {
    let e = -0.5 * z * z;
    (e.exp(), -e.exp_m1())
}
