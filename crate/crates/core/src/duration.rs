//! Laws of nonnegative durations (exposed, infectious and immune periods,
//! infection ages).

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, Exp, Gamma, LogNormal};

use crate::math::{gamma_p, norm_cdf, norm_pdf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationLaw {
    /// Point mass at zero (no exposed period, for instance).
    Zero,
    /// Point mass at `value`. Only allowed where no breakpoint depends on it.
    Deterministic { value: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl DurationLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, name, why: &str| if c { Ok(()) } else { Err(Error::param(name, why)) };
        match *self {
            DurationLaw::Zero => Ok(()),
            DurationLaw::Deterministic { value } => {
                ok(value.is_finite() && value > 0.0, "value", "must be positive and finite")
            }
            DurationLaw::Exponential { rate } => {
                ok(rate.is_finite() && rate > 0.0, "rate", "must be positive and finite")
            }
            DurationLaw::Gamma { shape, rate } => {
                ok(shape.is_finite() && shape > 0.0, "shape", "must be positive and finite")?;
                ok(rate.is_finite() && rate > 0.0, "rate", "must be positive and finite")
            }
            DurationLaw::LogNormal { mu, sigma } => {
                ok(mu.is_finite(), "mu", "must be finite")?;
                ok(sigma.is_finite() && sigma > 0.0, "sigma", "must be positive and finite")
            }
            DurationLaw::Uniform { lo, hi } => {
                ok(lo.is_finite() && lo >= 0.0, "lo", "must be nonnegative")?;
                ok(hi.is_finite() && hi > lo, "hi", "must exceed lo")
            }
        }
    }

    /// Location of the point mass, if the law is degenerate.
    pub fn atom(&self) -> Option<f64> {
        match *self {
            DurationLaw::Zero => Some(0.0),
            DurationLaw::Deterministic { value } => Some(value),
            _ => None,
        }
    }

    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            DurationLaw::Exponential { rate } => Some(rate),
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            DurationLaw::Zero => 1.0,
            DurationLaw::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            DurationLaw::Exponential { rate } => -(-rate * x).exp_m1(),
            DurationLaw::Gamma { shape, rate } => gamma_p(shape, rate * x),
            DurationLaw::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            DurationLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            DurationLaw::Exponential { rate } if x >= 0.0 => (-rate * x).exp(),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Density of the absolutely continuous laws; zero for atoms.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            DurationLaw::Zero | DurationLaw::Deterministic { .. } => 0.0,
            DurationLaw::Exponential { rate } => rate * (-rate * x).exp(),
            DurationLaw::Gamma { shape, rate } => {
                if x == 0.0 {
                    return if shape == 1.0 {
                        rate
                    } else if shape < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                }
                let y = rate * x;
                (shape * y.ln() - y - libm::lgamma(shape)).exp() / x
            }
            DurationLaw::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
            DurationLaw::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DurationLaw::Zero => 0.0,
            DurationLaw::Deterministic { value } => value,
            DurationLaw::Exponential { rate } => 1.0 / rate,
            DurationLaw::Gamma { shape, rate } => shape / rate,
            DurationLaw::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            DurationLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// Typical length scale, used to size quadrature panels.
    pub(crate) fn scale(&self) -> f64 {
        match *self {
            DurationLaw::Zero => 1.0,
            DurationLaw::Deterministic { value } => value,
            DurationLaw::Exponential { rate } => 1.0 / rate,
            DurationLaw::Gamma { shape, rate } => shape.sqrt().max(0.5).min(shape) / rate,
            DurationLaw::LogNormal { mu, sigma } => (mu - sigma * sigma).exp().max(1e-3),
            DurationLaw::Uniform { lo, hi } => hi - lo,
        }
    }

    /// Support `[lo, hi]`.
    pub(crate) fn support(&self) -> (f64, f64) {
        match *self {
            DurationLaw::Zero => (0.0, 0.0),
            DurationLaw::Deterministic { value } => (value, value),
            DurationLaw::Uniform { lo, hi } => (lo, hi),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Points where the density is not smooth.
    pub(crate) fn kinks(&self) -> [f64; 2] {
        match *self {
            DurationLaw::Uniform { lo, hi } => [lo, hi],
            _ => [0.0, 0.0],
        }
    }

    /// Hölder data `(rho, C)` of the CDF: `F(t) - F(s) <= C (t - s)^rho`.
    /// `None` for atoms.
    pub fn cdf_holder(&self) -> Option<(f64, f64)> {
        match *self {
            DurationLaw::Zero | DurationLaw::Deterministic { .. } => None,
            DurationLaw::Exponential { rate } => Some((1.0, rate)),
            DurationLaw::Uniform { lo, hi } => Some((1.0, 1.0 / (hi - lo))),
            DurationLaw::Gamma { shape, rate } => {
                if shape >= 1.0 {
                    let mode = (shape - 1.0) / rate;
                    Some((1.0, self.pdf(mode).max(self.pdf(0.0))))
                } else {
                    // F(t) - F(s) <= F(t - s) <= (r x)^a / Γ(a + 1).
                    Some((shape, rate.powf(shape) / libm::tgamma(shape + 1.0)))
                }
            }
            DurationLaw::LogNormal { mu, sigma } => {
                let mode = (mu - sigma * sigma).exp();
                Some((1.0, self.pdf(mode)))
            }
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationLaw::Zero => 0.0,
            DurationLaw::Deterministic { value } => value,
            DurationLaw::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            DurationLaw::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated gamma")
                .sample(rng),
            DurationLaw::LogNormal { mu, sigma } => LogNormal::new(mu, sigma)
                .expect("validated log-normal")
                .sample(rng),
            DurationLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    const LAWS: [DurationLaw; 4] = [
        DurationLaw::Exponential { rate: 0.7 },
        DurationLaw::Gamma { shape: 2.5, rate: 1.3 },
        DurationLaw::LogNormal { mu: 0.3, sigma: 0.5 },
        DurationLaw::Uniform { lo: 1.0, hi: 3.0 },
    ];

    #[test]
    fn density_integrates_to_cdf() {
        for law in LAWS {
            let x = 2.2;
            let v = crate::math::gl_split(0.0, x, &law.kinks(), 0.05, |u| law.pdf(u));
            assert_relative_eq!(v, law.cdf(x), max_relative = 1e-9);
        }
    }

    #[test]
    fn sample_means_match() {
        for law in LAWS {
            let mut rng = stream(3, 0);
            let m = 200_000;
            let xs: alloc::vec::Vec<f64> = (0..m).map(|_| law.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / m as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            let se = (var / m as f64).sqrt();
            assert!((mean - law.mean()).abs() < 5.0 * se, "{law:?}: {mean}");
        }
    }

    #[test]
    fn gamma_small_shape_holder_bound() {
        let law = DurationLaw::Gamma { shape: 0.5, rate: 2.0 };
        let (rho, c) = law.cdf_holder().unwrap();
        for &h in &[1e-4, 1e-2, 0.5] {
            assert!(law.cdf(h) <= c * h.powf(rho) + 1e-15);
        }
    }
}
