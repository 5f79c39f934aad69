//! Adaptive Simpson quadrature.
//!
//! Panels are bisected until the Richardson difference `|S2 - S1|` drops below
//! `15 * tol * width / (hi - lo)`, so the tolerance is spread over the interval
//! in proportion to panel width. Accepted panels carry the usual `(S2 - S1)/15`
//! correction.

use crate::error::{Error, Result};

/// Maximum bisection depth for a single panel.
pub const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Sum of the absolute Richardson estimates over accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Endpoint values that are not finite are replaced by the one-sided limit,
/// approximated by evaluating just inside the interval. A non-finite value at
/// an interior node is an [`Error::Evaluation`].
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    let (res, converged_at) = integrate_inner(&f, lo, hi, tol)?;
    match converged_at {
        None => Ok(res),
        Some((a, b)) => Err(Error::Convergence { lo: a, hi: b }),
    }
}

/// Like [`integrate`], but returns the best available estimate when the
/// depth limit is hit instead of failing. Non-finite interior values are
/// still reported as errors.
pub fn integrate_best_effort<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_inner(&f, lo, hi, tol).map(|(res, _)| res)
}

/// Integrates `f` piecewise over consecutive `breaks`, splitting `tol` in
/// proportion to piece width. `breaks` must be sorted ascending.
pub fn integrate_piecewise<F>(f: F, breaks: &[f64], tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    let mut total = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    if breaks.len() < 2 {
        return Ok(total);
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let local_tol = if span > 0.0 {
            tol * (w[1] - w[0]) / span
        } else {
            tol
        };
        let r = integrate(&f, w[0], w[1], local_tol)?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

fn endpoint_value<F: Fn(f64) -> f64>(f: &F, x: f64, toward: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        return Ok(v);
    }
    // one-sided limit, approached from inside
    let step = (toward - x) * 1e-12;
    let v = f(x + step);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { abscissa: x })
    }
}

fn interior_value<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { abscissa: x })
    }
}

fn integrate_inner<F>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(QuadratureResult, Option<(f64, f64)>)>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!("invalid integration interval [{lo}, {hi}]")));
    }

    let fa = endpoint_value(f, lo, hi)?;
    let fb = endpoint_value(f, hi, lo)?;
    let m = 0.5 * (lo + hi);
    let fm = if lo == hi { fa } else { interior_value(f, m)? };
    let mut evaluations = 3;

    let width = hi - lo;
    if width == 0.0 {
        return Ok((
            QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations,
            },
            None,
        ));
    }

    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut failed: Option<(f64, f64)> = None;
    let mut stack = vec![Panel {
        a: lo,
        fa,
        m,
        fm,
        b: hi,
        fb,
        whole: simpson(lo, fa, fm, hi, fb),
        depth: 0,
    }];

    while let Some(p) = stack.pop() {
        let lm = 0.5 * (p.a + p.m);
        let rm = 0.5 * (p.m + p.b);
        let flm = interior_value(f, lm)?;
        let frm = interior_value(f, rm)?;
        evaluations += 2;
        let left = simpson(p.a, p.fa, flm, p.m, p.fm);
        let right = simpson(p.m, p.fm, frm, p.b, p.fb);
        let delta = left + right - p.whole;

        let local_tol = (tol * (p.b - p.a) / width).max(f64::EPSILON * (left + right).abs());
        let degenerate = !(lm > p.a && lm < p.m && rm > p.m && rm < p.b);
        if delta.abs() <= 15.0 * local_tol || degenerate || p.depth >= MAX_DEPTH {
            if (p.depth >= MAX_DEPTH || degenerate) && delta.abs() > 15.0 * local_tol && failed.is_none() {
                failed = Some((p.a, p.b));
            }
            value += left + right + delta / 15.0;
            error_estimate += delta.abs() / 15.0;
            continue;
        }
        stack.push(Panel {
            a: p.m,
            fa: p.fm,
            m: rm,
            fm: frm,
            b: p.b,
            fb: p.fb,
            whole: right,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            fa: p.fa,
            m: lm,
            fm: flm,
            b: p.m,
            fb: p.fm,
            whole: left,
            depth: p.depth + 1,
        });
    }

    Ok((
        QuadratureResult {
            value,
            error_estimate,
            evaluations,
        },
        failed,
    ))
}

#[inline]
fn simpson(a: f64, fa: f64, fm: f64, b: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn psi_u(x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -0.5 * x * x.ln() + 0.5 * (1.0 - x) * (1.0 - x).ln()
        }
    }

    // closed-form antiderivative of psi_U with Psi(0) = 0
    fn psi_u_antiderivative(x: f64) -> f64 {
        let part = |t: f64| if t <= 0.0 { 0.0 } else { t * t / 2.0 * t.ln() - t * t / 4.0 };
        -0.5 * part(x) - 0.5 * part(1.0 - x) - 0.125
    }

    #[test]
    fn linear_is_exact() {
        let r = integrate(|x| x, 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert!(r.evaluations >= 3);
        assert!(r.error_estimate >= 0.0);
    }

    #[test]
    fn cubic_is_exact_on_arbitrary_interval() {
        let f = |x: f64| 2.0 * x * x * x - 3.0 * x * x + x - 7.0;
        let anti = |x: f64| 0.5 * x.powi(4) - x.powi(3) + 0.5 * x * x - 7.0 * x;
        let r = integrate(f, -1.3, 2.9, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, anti(2.9) - anti(-1.3), epsilon = 1e-12);
    }

    #[test]
    fn psi_u_full_support_integrates_to_zero() {
        let r = integrate(psi_u, 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn psi_u_half_support_matches_antiderivative() {
        let oracle = psi_u_antiderivative(0.5) - psi_u_antiderivative(0.0);
        assert_abs_diff_eq!(oracle, 0.024_143_397_569_993_16, epsilon = 1e-15);
        let r = integrate(psi_u, 0.0, 0.5, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.024_143_4, epsilon = 1e-7);
        assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-10);
    }

    #[test]
    fn endpoint_singularity_uses_one_sided_limit() {
        // x ln x is -> 0 at 0 but ln(0) evaluates to -inf * 0 = NaN
        let r = integrate(|x: f64| x * x.ln(), 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, -0.25, epsilon = 1e-9);
    }

    #[test]
    fn interior_nan_is_reported() {
        let err = integrate(|x: f64| if x == 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-8).unwrap_err();
        assert_eq!(err, Error::Evaluation { abscissa: 0.5 });
    }

    #[test]
    fn non_integrable_spike_fails_to_converge() {
        let err = integrate(|x: f64| 1.0 / (x - 0.3).abs().sqrt().max(1e-300).powi(3), 0.0, 1.0, 1e-10);
        assert!(matches!(err, Err(Error::Convergence { .. }) | Err(Error::Evaluation { .. })));
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(|x| x * x, 2.0, 2.0, 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.evaluations >= 3);
    }

    #[test]
    fn piecewise_sums_pieces() {
        let r = integrate_piecewise(|x: f64| x.abs(), &[-1.0, 0.0, 1.0], 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
