//! Perturbed CDFs and densities built from cumulative wavelets.
//!
//! The free functions evaluate single-wavelet perturbations directly.
//! [`PerturbedDistribution`] covers the single and multilevel constructions
//! and adds quantiles, sampling and validation.

mod distribution;
mod spec;
mod validate;

pub use distribution::{PerturbedDistribution, DEFAULT_QUANTILE_TOLERANCE};
pub use spec::{Construction, Level, PerturbationSpec};
pub use validate::{ValidityReport, EFFECTIVE_SUPPORT_TAIL, MIN_VALIDATION_GRID, MONOTONE_SLACK};

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::wavelet::{CumulativeWavelet, Wavelet};

fn check_gain(gain: f64) -> Result<()> {
    if gain >= 0.0 && gain.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("gain must be finite and nonnegative, got {gain}")))
    }
}

fn check_direct_amplitude(w: &Wavelet, gain: f64) -> Result<()> {
    check_gain(gain)?;
    let sup = w.sup_abs();
    let product = gain * sup;
    if product <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(Error::Amplitude {
            segment: "single".to_string(),
            sup,
            product,
        })
    }
}

fn check_normalizable(w: &Wavelet, gain: f64) -> Result<()> {
    check_gain(gain)?;
    if gain > 1.0 {
        return Err(Error::Parameter(format!("gain must lie in [0, 1], got {gain}")));
    }
    let sup = w.sup_abs();
    if sup.is_finite() && sup > 0.0 {
        Ok(())
    } else {
        Err(Error::Amplitude {
            segment: "single".to_string(),
            sup,
            product: f64::INFINITY,
        })
    }
}

/// `Psi((b - a) u + a) / (b - a)` for `u` in [0, 1].
fn mapped_cumulative(w: &Wavelet, u: f64) -> Result<f64> {
    let (a, b) = w.support();
    let c = CumulativeWavelet::new(w.clone())?;
    Ok(c.eval((b - a) * u + a) / (b - a))
}

/// `x + gain Psi((b - a) x + a) / (b - a)` on [0, 1]; 0 below and 1 above.
///
/// Requires `gain * sup|psi| <= 1`, which keeps the density nonnegative.
pub fn perturb_uniform_cdf(w: &Wavelet, x: f64, gain: f64) -> Result<f64> {
    check_direct_amplitude(w, gain)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    Ok(x + gain * mapped_cumulative(w, x)?)
}

/// `1 + gain psi((b - a) x + a)` on [0, 1], zero outside.
pub fn perturb_uniform_pdf(w: &Wavelet, x: f64, gain: f64) -> Result<f64> {
    check_direct_amplitude(w, gain)?;
    if !(0.0..=1.0).contains(&x) {
        return Ok(0.0);
    }
    let (a, b) = w.support();
    Ok(1.0 + gain * w.eval((b - a) * x + a))
}

/// `F_X(x) + gain Psi((b - a) F_X(x) + a) / ((b - a) sup|psi|)`.
pub fn perturb_general_cdf(base: &BaseDistribution, w: &Wavelet, x: f64, gain: f64) -> Result<f64> {
    check_normalizable(w, gain)?;
    let u = base.cdf(x);
    Ok(u + gain * mapped_cumulative(w, u)? / w.sup_abs())
}

/// `f_X(x) (1 + gain psi((b - a) F_X(x) + a) / sup|psi|)`.
pub fn perturb_general_pdf(base: &BaseDistribution, w: &Wavelet, x: f64, gain: f64) -> Result<f64> {
    check_normalizable(w, gain)?;
    let fx = base.pdf(x);
    if fx == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = w.support();
    let u = base.cdf(x);
    Ok(fx * (1.0 + gain * w.eval((b - a) * u + a) / w.sup_abs()))
}

/// Perturbed CDF of the standard uniform under `spec`, which may be multilevel.
pub fn multilevel_cdf(spec: &PerturbationSpec, x: f64) -> Result<f64> {
    let pd = PerturbedDistribution::new(BaseDistribution::standard_uniform(), spec.clone())?;
    Ok(pd.cdf(x))
}
