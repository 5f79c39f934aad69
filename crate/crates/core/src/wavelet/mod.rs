//! Compactly supported wavelets used as perturbation shapes.
//!
//! Four families are built in: `psi_u` on [0, 1], the beta wavelet (negative
//! derivative of a Beta density), a truncated and re-centred Mexican hat, and
//! Daubechies wavelets sampled by the cascade algorithm. Arbitrary closures can
//! be wrapped with [`Wavelet::custom`].

pub mod filters;
mod cumulative;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::numerics::{
    self, cascade, golden_section_max, integrate_best_effort, integrate_piecewise, linspace,
    CascadeTable,
};

pub use cumulative::{cumulative, CumulativeWavelet, CACHE_KNOTS, DEFAULT_CUMULATIVE_TOLERANCE};

/// Grid size used by [`Wavelet::sup_abs`] before golden-section refinement.
pub const SUP_GRID_POINTS: usize = 4097;

pub const DEFAULT_MEXICAN_HAT_HALF_WIDTH: f64 = 5.0;
pub const MIN_MEXICAN_HAT_HALF_WIDTH: f64 = 3.0;

/// Tolerance applied to wavelets before they may drive a perturbation.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-6;

const QUADRATURE_TOLERANCE: f64 = 1e-12;
const MIN_INTEGRATION_PIECES: usize = 16;

/// `psi_U(x) = -x ln(x)/2 + (1 - x) ln(1 - x)/2` on (0, 1), zero elsewhere.
///
/// The endpoint limits are zero, and `psi_U(1 - x) = -psi_U(x)`.
pub fn eval_psi_u(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -0.5 * x * x.ln() + 0.5 * (1.0 - x) * (1.0 - x).ln()
}

/// Antiderivative of `psi_U` vanishing at 0; it also vanishes at 1.
fn psi_u_antiderivative(x: f64) -> f64 {
    let part = |t: f64| if t <= 0.0 { 0.0 } else { 0.5 * t * t * t.ln() - 0.25 * t * t };
    -0.5 * part(x) - 0.5 * part(1.0 - x) - 0.125
}

/// Negative derivative of the Beta(alpha, beta) density on [0, 1].
pub fn eval_beta(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_beta_params(alpha, beta)?;
    Ok(beta_kernel(x, alpha, beta, (-ln_beta(alpha, beta)).exp()))
}

fn check_beta_params(alpha: f64, beta: f64) -> Result<()> {
    if alpha > 1.0 && beta > 1.0 && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "beta wavelet needs alpha > 1 and beta > 1, got ({alpha}, {beta})"
        )))
    }
}

fn beta_kernel(x: f64, alpha: f64, beta: f64, inv_norm: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let y = 1.0 - x;
    let slope = (alpha - 1.0) * x.powf(alpha - 2.0) * y.powf(beta - 1.0)
        - (beta - 1.0) * x.powf(alpha - 1.0) * y.powf(beta - 2.0);
    let v = -slope * inv_norm;
    // an endpoint with exponent in (1, 2) is singular
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Mexican hat truncated to `[-half_width, half_width]` and shifted down by the
/// constant that makes its integral over the truncation exactly zero.
pub fn eval_mexican_hat_truncated(x: f64, half_width: f64) -> f64 {
    mexican_hat_kernel(x, half_width, mexican_hat_offset(half_width))
}

/// Raw integral of `(1 - x^2) exp(-x^2/2)` over `[-w, w]` is `2 w exp(-w^2/2)`,
/// since the integrand is the derivative of `x exp(-x^2/2)`.
fn mexican_hat_offset(half_width: f64) -> f64 {
    (-0.5 * half_width * half_width).exp()
}

fn mexican_hat_kernel(x: f64, half_width: f64, offset: f64) -> f64 {
    if x.abs() > half_width {
        return 0.0;
    }
    let x2 = x * x;
    (1.0 - x2) * (-0.5 * x2).exp() - offset
}

/// Piecewise-linear interpolation of a cascade table.
pub fn eval_daubechies(x: f64, table: &CascadeTable) -> f64 {
    table.eval(x)
}

/// Wavelet family and its shape parameters.
#[derive(Clone)]
pub enum Family {
    PsiU,
    Beta {
        alpha: f64,
        beta: f64,
    },
    MexicanHat {
        half_width: f64,
    },
    Daubechies {
        order: usize,
        depth: u32,
        table: Arc<CascadeTable>,
    },
    /// `x -> psi((b - a) x + a) / (b - a)` on [0, 1].
    SupportNormalized(Box<Wavelet>),
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PsiU => write!(f, "PsiU"),
            Family::Beta { alpha, beta } => write!(f, "Beta({alpha}, {beta})"),
            Family::MexicanHat { half_width } => write!(f, "MexicanHat({half_width})"),
            Family::Daubechies { order, depth, .. } => write!(f, "Daubechies(db{order}, depth {depth})"),
            Family::SupportNormalized(inner) => write!(f, "SupportNormalized({:?})", inner.family),
            Family::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A compactly supported real function with zero integral.
///
/// `sup_abs` is computed once at construction, so a `Wavelet` is immutable and
/// cheap to share.
#[derive(Clone, Debug)]
pub struct Wavelet {
    family: Family,
    support_lo: f64,
    support_hi: f64,
    sup_abs: f64,
    // 1/B(alpha, beta) for beta wavelets, the re-centring constant for the hat
    aux: f64,
}

impl Wavelet {
    pub fn psi_u() -> Self {
        Self::build(Family::PsiU, 0.0, 1.0, 0.0)
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        check_beta_params(alpha, beta)?;
        let inv_norm = (-ln_beta(alpha, beta)).exp();
        Ok(Self::build(Family::Beta { alpha, beta }, 0.0, 1.0, inv_norm))
    }

    pub fn mexican_hat(half_width: f64) -> Result<Self> {
        if !(half_width >= MIN_MEXICAN_HAT_HALF_WIDTH) || !half_width.is_finite() {
            return Err(Error::Parameter(format!(
                "mexican hat half width must be at least {MIN_MEXICAN_HAT_HALF_WIDTH}, got {half_width}"
            )));
        }
        Ok(Self::build(
            Family::MexicanHat { half_width },
            -half_width,
            half_width,
            mexican_hat_offset(half_width),
        ))
    }

    /// Daubechies wavelet with `order` vanishing moments at the default cascade depth.
    pub fn daubechies(order: usize) -> Result<Self> {
        Self::daubechies_with_depth(order, numerics::DEFAULT_DEPTH)
    }

    pub fn daubechies_with_depth(order: usize, depth: u32) -> Result<Self> {
        let filter = filters::daubechies_filter(order)?;
        let table = cascade(filter, depth)?.wavelet;
        let (lo, hi) = table.support();
        Ok(Self::build(
            Family::Daubechies {
                order,
                depth,
                table: Arc::new(table),
            },
            lo,
            hi,
            0.0,
        ))
    }

    /// Wraps an arbitrary function, which is treated as zero outside `[lo, hi]`.
    pub fn custom<F>(name: impl Into<String>, lo: f64, hi: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!("invalid support [{lo}, {hi}]")));
        }
        Ok(Self::build(
            Family::Custom {
                name: name.into(),
                eval: Arc::new(f),
            },
            lo,
            hi,
            0.0,
        ))
    }

    fn build(family: Family, support_lo: f64, support_hi: f64, aux: f64) -> Self {
        let mut w = Self {
            family,
            support_lo,
            support_hi,
            sup_abs: f64::NAN,
            aux,
        };
        w.sup_abs = w.compute_sup_abs();
        w
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn width(&self) -> f64 {
        self.support_hi - self.support_lo
    }

    /// Short human-readable name, e.g. `beta(4,3)` or `db4`.
    pub fn name(&self) -> String {
        match &self.family {
            Family::PsiU => "psi_u".to_string(),
            Family::Beta { alpha, beta } => format!("beta({alpha},{beta})"),
            Family::MexicanHat { half_width } => format!("mexican_hat({half_width})"),
            Family::Daubechies { order, .. } => format!("db{order}"),
            Family::SupportNormalized(inner) => format!("normalized({})", inner.name()),
            Family::Custom { name, .. } => name.clone(),
        }
    }

    /// Evaluates psi; exactly zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if !(x >= self.support_lo && x <= self.support_hi) {
            return 0.0;
        }
        match &self.family {
            Family::PsiU => eval_psi_u(x),
            Family::Beta { alpha, beta } => beta_kernel(x, *alpha, *beta, self.aux),
            Family::MexicanHat { half_width } => mexican_hat_kernel(x, *half_width, self.aux),
            Family::Daubechies { table, .. } => table.eval(x),
            Family::SupportNormalized(inner) => {
                let (a, b) = inner.support();
                inner.eval((b - a) * x + a) / (b - a)
            }
            Family::Custom { eval, .. } => eval(x),
        }
    }

    /// Supremum of `|psi|` over the support.
    ///
    /// Beta wavelets with an exponent below 2 are unbounded at an endpoint and
    /// report infinity.
    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    fn compute_sup_abs(&self) -> f64 {
        match &self.family {
            Family::Beta { alpha, beta } if *alpha < 2.0 || *beta < 2.0 => f64::INFINITY,
            Family::Daubechies { table, .. } => table.max_abs(),
            Family::SupportNormalized(inner) => inner.sup_abs() / inner.width(),
            _ => {
                let grid = linspace(self.support_lo, self.support_hi, SUP_GRID_POINTS);
                let (best_i, best) = grid
                    .iter()
                    .map(|&x| self.eval(x).abs())
                    .enumerate()
                    .fold((0, 0.0_f64), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
                let lo = grid[best_i.saturating_sub(1)];
                let hi = grid[(best_i + 1).min(grid.len() - 1)];
                let (_, refined) =
                    golden_section_max(|x| self.eval(x).abs(), lo, hi, 1e-13 * self.width());
                best.max(refined)
            }
        }
    }

    /// Points where psi may lose smoothness: support edges, plus every table
    /// knot for sampled wavelets.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Daubechies { table, .. } => table.samples().map(|(x, _)| x).collect(),
            Family::SupportNormalized(inner) => {
                let (a, b) = inner.support();
                inner.breakpoints().into_iter().map(|y| (y - a) / (b - a)).collect()
            }
            _ => vec![self.support_lo, self.support_hi],
        }
    }

    /// Breakpoints merged with a uniform split of the support, suitable as
    /// quadrature pieces.
    pub(crate) fn integration_breaks(&self) -> Vec<f64> {
        let mut breaks = self.breakpoints();
        breaks.extend(linspace(self.support_lo, self.support_hi, MIN_INTEGRATION_PIECES + 1));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    /// Closed-form running integral from the left support end, without the
    /// clamp to zero at the right end. `None` for custom wavelets.
    pub(crate) fn exact_cumulative(&self, x: f64) -> Option<f64> {
        let x = x.clamp(self.support_lo, self.support_hi);
        match &self.family {
            Family::PsiU => Some(psi_u_antiderivative(x)),
            Family::Beta { alpha, beta } => {
                Some(-x.powf(alpha - 1.0) * (1.0 - x).powf(beta - 1.0) * self.aux)
            }
            // d/dx [x exp(-x^2/2)] = (1 - x^2) exp(-x^2/2)
            Family::MexicanHat { .. } => Some(x * ((-0.5 * x * x).exp() - self.aux)),
            Family::Daubechies { table, .. } => Some(table.integral_to(x)),
            Family::SupportNormalized(inner) => {
                let (a, b) = inner.support();
                inner
                    .exact_cumulative((b - a) * x + a)
                    .map(|v| v / ((b - a) * (b - a)))
            }
            Family::Custom { .. } => None,
        }
    }

    fn is_piecewise_linear(&self) -> bool {
        match &self.family {
            Family::Daubechies { .. } => true,
            Family::SupportNormalized(inner) => inner.is_piecewise_linear(),
            _ => false,
        }
    }

    /// The wavelet remapped to support [0, 1]: `x -> psi((b - a) x + a) / (b - a)`.
    ///
    /// A wavelet already supported on [0, 1] is returned unchanged.
    pub fn support_normalized(&self) -> Wavelet {
        if self.support_lo == 0.0 && self.support_hi == 1.0 {
            return self.clone();
        }
        Self::build(Family::SupportNormalized(Box::new(self.clone())), 0.0, 1.0, 0.0)
    }

    /// `M_k = integral of u^k psi(u) du` over the support.
    pub fn moment(&self, k: u32, tol: f64) -> Result<f64> {
        let r = integrate_piecewise(
            |u| u.powi(k as i32) * self.eval(u),
            &self.integration_breaks(),
            tol,
        )?;
        Ok(r.value)
    }

    /// Quadrature of psi over its support.
    ///
    /// Piecewise-linear tables are integrated exactly by the trapezoid rule.
    pub fn integral(&self, tol: f64) -> Result<f64> {
        if self.is_piecewise_linear() {
            return Ok(self.exact_cumulative(self.support_hi).unwrap_or(0.0));
        }
        let breaks = self.integration_breaks();
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let local = tol * (w[1] - w[0]) / self.width();
            total += integrate_best_effort(|u| self.eval(u), w[0], w[1], local)?.value;
        }
        Ok(total)
    }
}

/// Outcome of the zero-integral and boundary checks on a wavelet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub zero_integral_residual: f64,
    pub boundary_residual: f64,
    pub sup_abs: f64,
    pub passes: bool,
    pub tolerance: f64,
}

impl AdmissibilityReport {
    pub(crate) fn new(zero_integral_residual: f64, boundary_residual: f64, sup_abs: f64, tolerance: f64) -> Self {
        let passes = zero_integral_residual.max(boundary_residual) <= tolerance;
        Self {
            zero_integral_residual,
            boundary_residual,
            sup_abs,
            passes,
            tolerance,
        }
    }
}

/// Checks `|integral psi| <= tol` and `|Psi(b)| <= tol`.
///
/// The integral is computed by direct quadrature and `Psi(b)` from the
/// cumulative cache, so the two residuals come from independent routes.
pub fn admissibility_check(w: &Wavelet, tol: f64) -> AdmissibilityReport {
    match CumulativeWavelet::new(w.clone()) {
        Ok(c) => c.admissibility(tol),
        Err(_) => AdmissibilityReport::new(
            zero_integral_residual(w),
            f64::INFINITY,
            w.sup_abs(),
            tol,
        ),
    }
}

pub(crate) fn zero_integral_residual(w: &Wavelet) -> f64 {
    w.integral(QUADRATURE_TOLERANCE)
        .map(f64::abs)
        .unwrap_or(f64::INFINITY)
}

/// `M_k` of `w`; see [`Wavelet::moment`].
pub fn wavelet_moment(w: &Wavelet, k: u32, tol: f64) -> Result<f64> {
    w.moment(k, tol)
}
