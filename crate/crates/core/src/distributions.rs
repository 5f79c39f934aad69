//! Base distributions that perturbations are applied to.

use serde::Serialize;
use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDistribution {
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
}

impl BaseDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!("uniform needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn standard_uniform() -> Self {
        Self::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Parameter(format!(
                "normal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self::Normal { mu, sigma })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Parameter(format!("exponential needs rate > 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Normal { .. } => "normal",
            Self::Exponential { .. } => "exponential",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Normal { mu, sigma } => 0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2)),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// `1 - F(x)`, computed without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { .. } => 1.0 - self.cdf(x),
            Self::Normal { mu, sigma } => 0.5 * erfc((x - mu) / (sigma * std::f64::consts::SQRT_2)),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    /// Inverse CDF. `p = 0` and `p = 1` map to the support endpoints, which
    /// may be infinite.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(match *self {
            Self::Uniform { lo, hi } => {
                if p == 1.0 {
                    hi
                } else {
                    lo + p * (hi - lo)
                }
            }
            Self::Normal { mu, sigma } => {
                if p == 0.0 || p == 1.0 {
                    mu - sigma * std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
                } else if p <= 0.5 {
                    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
                    mu + sigma * refine_standard_normal(z, p)
                } else {
                    let z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * (1.0 - p));
                    mu - sigma * refine_standard_normal(-z, 1.0 - p)
                }
            }
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
        })
    }

    /// The `x` with `1 - F(x) = q`, accurate for tiny `q`.
    pub fn upper_quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(match *self {
            Self::Uniform { lo, hi } => {
                if q == 0.0 {
                    hi
                } else {
                    hi - q * (hi - lo)
                }
            }
            Self::Normal { mu, sigma } => {
                if q == 0.0 || q == 1.0 {
                    mu + sigma * std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)
                } else {
                    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
                    mu - sigma * refine_standard_normal(z, q)
                }
            }
            Self::Exponential { rate } => -q.ln() / rate,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Support with infinite ends replaced by the `tail` and `1 - tail` quantiles.
    pub fn effective_support(&self, tail: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        let lo = if lo.is_finite() {
            lo
        } else {
            self.quantile(tail).unwrap_or(lo)
        };
        let hi = if hi.is_finite() {
            hi
        } else {
            self.upper_quantile(tail).unwrap_or(hi)
        };
        (lo, hi)
    }

    /// Raw moment `E[X^k]` in closed form.
    pub fn raw_moment(&self, k: u32) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                let k1 = k as i32 + 1;
                (hi.powi(k1) - lo.powi(k1)) / (k1 as f64 * (hi - lo))
            }
            Self::Normal { mu, sigma } => {
                // sum over even j of C(k, j) mu^(k-j) sigma^j (j-1)!!
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut double_fact = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        binom *= (k - j + 1) as f64 / j as f64;
                    }
                    if j % 2 == 0 {
                        if j >= 2 {
                            double_fact *= (j - 1) as f64;
                        }
                        total += binom * mu.powi((k - j) as i32) * sigma.powi(j as i32) * double_fact;
                    }
                }
                total
            }
            Self::Exponential { rate } => {
                let fact: f64 = (1..=k).map(|i| i as f64).product();
                fact / rate.powi(k as i32)
            }
        }
    }
}

/// One Newton step on `Phi(z) = p` for a lower-tail probability `p <= 1/2`.
fn refine_standard_normal(z: f64, p: f64) -> f64 {
    let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        z - (cdf - p) / pdf
    } else {
        z
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain { p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constructors_validate() {
        assert!(BaseDistribution::uniform(1.0, 1.0).is_err());
        assert!(BaseDistribution::normal(0.0, 0.0).is_err());
        assert!(BaseDistribution::exponential(-1.0).is_err());
        assert!(BaseDistribution::normal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn known_values() {
        let n = BaseDistribution::normal(0.0, 1.0).unwrap();
        assert_eq!(n.cdf(0.0), 0.5);
        assert_abs_diff_eq!(n.pdf(0.0), 0.398_942_280_401_432_7, epsilon = 1e-15);
        // Phi(1.959963984540054) = 0.975
        assert_abs_diff_eq!(n.quantile(0.975).unwrap(), 1.959_963_984_540_054, epsilon = 1e-12);
        let e = BaseDistribution::exponential(2.0).unwrap();
        assert_abs_diff_eq!(e.cdf(1.0), 0.864_664_716_763_387_3, epsilon = 1e-15);
        assert_eq!(e.cdf(-1.0), 0.0);
        let u = BaseDistribution::uniform(-1.0, 3.0).unwrap();
        assert_eq!(u.cdf(1.0), 0.5);
        assert_eq!(u.pdf(5.0), 0.0);
        assert_eq!(u.quantile(1.0).unwrap(), 3.0);
    }

    #[test]
    fn quantile_endpoints_and_domain() {
        let n = BaseDistribution::normal(0.0, 1.0).unwrap();
        assert_eq!(n.quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(n.quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(n.quantile(1.5), Err(Error::Domain { p: 1.5 }));
        assert!(n.quantile(f64::NAN).is_err());
    }

    #[test]
    fn tails() {
        let n = BaseDistribution::normal(1.0, 2.0).unwrap();
        let x = n.upper_quantile(1e-12).unwrap();
        assert!((n.sf(x) / 1e-12 - 1.0).abs() < 1e-9);
        let (lo, hi) = n.effective_support(1e-9);
        assert_abs_diff_eq!(lo + hi, 2.0, epsilon = 1e-9);
        let e = BaseDistribution::exponential(0.5).unwrap();
        assert_abs_diff_eq!(e.upper_quantile(1e-30).unwrap(), 2.0 * 30.0 * std::f64::consts::LN_10, epsilon = 1e-10);
        assert_eq!(e.effective_support(1e-9).0, 0.0);
    }

    #[test]
    fn raw_moments_closed_form() {
        let n = BaseDistribution::normal(1.0, 2.0).unwrap();
        assert_eq!(n.raw_moment(0), 1.0);
        assert_abs_diff_eq!(n.raw_moment(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.raw_moment(2), 5.0, epsilon = 1e-14);
        // mu^4 + 6 mu^2 s^2 + 3 s^4 = 1 + 24 + 48
        assert_abs_diff_eq!(n.raw_moment(4), 73.0, epsilon = 1e-12);
        let e = BaseDistribution::exponential(2.0).unwrap();
        assert_abs_diff_eq!(e.raw_moment(3), 6.0 / 8.0, epsilon = 1e-15);
        let u = BaseDistribution::uniform(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(u.raw_moment(3), 0.25, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(p in 1e-8f64..(1.0 - 1e-8)) {
            for d in [
                BaseDistribution::normal(-0.5, 3.0).unwrap(),
                BaseDistribution::exponential(1.7).unwrap(),
                BaseDistribution::uniform(2.0, 5.0).unwrap(),
            ] {
                let x = d.quantile(p).unwrap();
                prop_assert!((d.cdf(x) - p).abs() < 1e-12);
            }
        }
    }
}
