//! Raw-moment corrections induced by a perturbation.
//!
//! Substituting `u = F_X(x)` in `integral of x^k (f_new - f_X) dx` turns each
//! segment's contribution into an integral of the base quantile against psi:
//! `A_s / (b - a) * integral_a^b Q((s + (y - a)/(b - a)) / m)^k psi(y) dy`.

use serde::Serialize;

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::numerics::{integrate_best_effort, integrate_piecewise};
use crate::perturbation::PerturbedDistribution;
use crate::wavelet::Wavelet;

pub const MAX_MOMENT_ORDER: u32 = 12;

/// Probabilities handed to the base quantile are kept this far from 0 and 1.
pub const QUANTILE_CLIP: f64 = 1e-12;

/// Tail probability cut from unbounded supports in the direct check.
const DIRECT_CHECK_TAIL: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: u32,
    pub base_moment: f64,
    pub correction: f64,
    pub new_moment: f64,
    /// `integral of x^k f_new` by direct quadrature.
    pub direct_check: f64,
    pub residual: f64,
}

/// One segment's correction: `scale / (b - a) * integral Q(...)^k psi`.
fn segment_correction(
    base: &BaseDistribution,
    w: &Wavelet,
    k: u32,
    scale: f64,
    segment: usize,
    segments: usize,
    tol: f64,
) -> Result<f64> {
    if scale == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = w.support();
    let m = segments as f64;
    let integrand = |y: f64| {
        let u = ((segment as f64 + (y - a) / (b - a)) / m).clamp(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP);
        let q = base.quantile(u).unwrap_or(f64::NAN);
        q.powi(k as i32) * w.eval(y)
    };
    let mut breaks = w.integration_breaks();
    // the base quantile grows without bound at the ends of an unbounded support
    for j in 2..=12 {
        let d = (b - a) * 10f64.powi(-j);
        breaks.push(a + d);
        breaks.push(b - d);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    for piece in breaks.windows(2) {
        let local = tol * (piece[1] - piece[0]) / (b - a);
        total += integrate_best_effort(&integrand, piece[0], piece[1], local)?.value;
    }
    Ok(scale * total / (b - a))
}

/// `scale / (b - a) * integral_a^b Q((u - a)/(b - a))^k psi(u) du` for a
/// single wavelet over the whole base.
///
/// `scale` is the amplitude multiplying `Psi`: the gain on the direct uniform
/// construction, or `gain / sup|psi|` on the normalized one.
pub fn moment_correction_general(
    base: &BaseDistribution,
    w: &Wavelet,
    k: u32,
    scale: f64,
    tol: f64,
) -> Result<f64> {
    segment_correction(base, w, k, scale, 0, 1, tol)
}

/// `gain * M_k` of the support-normalized wavelet.
pub fn moment_correction_uniform(w: &Wavelet, k: u32, gain: f64, tol: f64) -> Result<f64> {
    Ok(gain * w.support_normalized().moment(k, tol)?)
}

/// Total correction to `E[X^k]` for `pd`, summed over segments.
pub fn moment_correction(pd: &PerturbedDistribution, k: u32, tol: f64) -> Result<f64> {
    let segments = pd.segments();
    let mut total = 0.0;
    for (s, seg) in segments.iter().enumerate() {
        total += segment_correction(pd.base(), seg.wavelet(), k, seg.amplitude, s, segments.len(), tol)?;
    }
    Ok(total)
}

/// `integral of x^k f_new(x) dx` over the support, clipped at base tail
/// probability 1e-30 where unbounded.
pub fn direct_moment(pd: &PerturbedDistribution, k: u32, tol: f64) -> Result<f64> {
    let (lo, hi) = pd.effective_support(DIRECT_CHECK_TAIL);
    let breaks = pd.x_breakpoints(lo, hi);
    let r = integrate_piecewise(|x| x.powi(k as i32) * pd.pdf(x), &breaks, tol)?;
    Ok(r.value)
}

/// Base moment, correction and direct check for `k = 0..=k_max`.
pub fn moment_report(pd: &PerturbedDistribution, k_max: u32, tol: f64) -> Result<Vec<MomentReport>> {
    if k_max > MAX_MOMENT_ORDER {
        return Err(Error::Parameter(format!(
            "moment order is limited to {MAX_MOMENT_ORDER}, got {k_max}"
        )));
    }
    (0..=k_max)
        .map(|k| {
            let base_moment = pd.base().raw_moment(k);
            let correction = moment_correction(pd, k, tol)?;
            let new_moment = base_moment + correction;
            let direct_check = direct_moment(pd, k, tol)?;
            Ok(MomentReport {
                order: k,
                base_moment,
                correction,
                new_moment,
                direct_check,
                residual: (new_moment - direct_check).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::PerturbationSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn psi_u_first_moment() {
        let w = Wavelet::psi_u();
        assert_abs_diff_eq!(moment_correction_uniform(&w, 1, 1.0, 1e-12).unwrap(), -1.0 / 72.0, epsilon = 1e-7);
        assert_abs_diff_eq!(moment_correction_uniform(&w, 0, 1.0, 1e-12).unwrap(), 0.0, epsilon = 1e-9);
        let uniform = BaseDistribution::standard_uniform();
        assert_abs_diff_eq!(
            moment_correction_general(&uniform, &w, 1, 1.0, 1e-12).unwrap(),
            -1.0 / 72.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn report_for_uniform_psi_u() {
        let pd = PerturbedDistribution::new(BaseDistribution::standard_uniform(), PerturbationSpec::single(Wavelet::psi_u()))
            .unwrap();
        let r = moment_report(&pd, 2, 1e-11).unwrap();
        assert_eq!(r.len(), 3);
        assert_abs_diff_eq!(r[1].new_moment, 35.0 / 72.0, epsilon = 1e-9);
        assert!(r[1].residual <= 1e-6);
        // M_2 of psi_U equals M_1
        assert_abs_diff_eq!(r[2].correction, -1.0 / 72.0, epsilon = 1e-9);
        assert!(r[2].residual <= 1e-6);
        assert!(moment_report(&pd, 13, 1e-10).is_err());
    }

    #[test]
    fn report_for_normal_psi_u() {
        let n = BaseDistribution::normal(0.0, 1.0).unwrap();
        let pd = PerturbedDistribution::new(n, PerturbationSpec::single(Wavelet::psi_u())).unwrap();
        let r = moment_report(&pd, 3, 1e-11).unwrap();
        for row in &r {
            assert!(row.residual <= 1e-6, "{row:?}");
        }
        let direct = moment_correction_general(&n, &Wavelet::psi_u(), 1, 1.0 / Wavelet::psi_u().sup_abs(), 1e-11).unwrap();
        assert_abs_diff_eq!(direct, r[1].correction, epsilon = 1e-12);
    }
}
