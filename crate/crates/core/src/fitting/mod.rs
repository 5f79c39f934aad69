//! Kolmogorov-Smirnov fitting of beta-wavelet perturbations to data.
//!
//! On a uniform base each observation falls in exactly one dyadic segment and
//! its CDF value depends only on that segment's wavelet, so the KS statistic is
//! the maximum of per-segment terms. Each segment is searched on its own: an
//! 8 x 8 grid over the (alpha, beta) box, then Nelder-Mead from the best grid
//! point. The objective budget is split evenly across segments and every
//! evaluation sequence for a smaller budget is a prefix of the one for a larger
//! budget, so more budget never gives a worse fit.

mod nelder_mead;

pub use nelder_mead::{Minimum, NelderMead, Point};

use rayon::prelude::*;

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::numerics::linspace;
use crate::perturbation::{Level, PerturbationSpec, PerturbedDistribution};
use crate::wavelet::Wavelet;

pub const PARAMETER_MIN: f64 = 1.5;
pub const PARAMETER_MAX: f64 = 12.0;
pub const GRID_SIDE: usize = 8;
pub const MIN_BUDGET: usize = 50;

const NM_F_TOL: f64 = 1e-10;
const NM_X_TOL: f64 = 1e-6;

/// Largest deviation between the empirical CDF of sorted `data` and `cdf`,
/// taken at the observations.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> Result<f64> {
    check_sorted(data)?;
    let n = data.len() as f64;
    Ok(data
        .iter()
        .enumerate()
        .map(|(i, &x)| ks_term(i, n, cdf(x)))
        .fold(0.0, f64::max))
}

fn ks_term(i: usize, n: f64, f: f64) -> f64 {
    ((i + 1) as f64 / n - f).max(f - i as f64 / n)
}

fn check_sorted(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Parameter("data must not be empty".to_string()));
    }
    if let Some(i) = data.iter().position(|x| x.is_nan()) {
        return Err(Error::Unsorted { index: i });
    }
    match data.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct FitRequest {
    data: Vec<f64>,
    base: BaseDistribution,
    level: Level,
}

impl FitRequest {
    /// `data` must be sorted ascending; on a uniform base it must lie in the support.
    pub fn new(data: Vec<f64>, base: BaseDistribution, level: Level) -> Result<Self> {
        check_sorted(&data)?;
        if let BaseDistribution::Uniform { lo, hi } = base {
            if data[0] < lo || data[data.len() - 1] > hi {
                return Err(Error::Parameter(format!(
                    "data must lie within the uniform support [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { data, base, level })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn base(&self) -> &BaseDistribution {
        &self.base
    }

    pub fn level(&self) -> Level {
        self.level
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: PerturbationSpec,
    /// Fitted `(alpha, beta)` per segment, left to right.
    pub parameters: Vec<(f64, f64)>,
    pub ks_before: f64,
    pub ks_after: f64,
    pub evaluations: usize,
    /// Every segment search stopped on its tolerance rather than the budget.
    pub converged: bool,
}

struct Objective {
    base: BaseDistribution,
    level: Level,
    /// (global index, observation) pairs for one segment
    members: Vec<(usize, f64)>,
    n: f64,
}

impl Objective {
    fn value(&self, p: Point) -> f64 {
        let Ok(w) = Wavelet::beta(p[0], p[1]) else {
            return f64::INFINITY;
        };
        if !w.sup_abs().is_finite() {
            return f64::INFINITY;
        }
        let spec = match self.level.segments() {
            1 => PerturbationSpec::single(w),
            2 => PerturbationSpec::level2(w.clone(), w),
            _ => PerturbationSpec::level4(w.clone(), w.clone(), w.clone(), w),
        };
        let Ok(pd) = PerturbedDistribution::new(self.base, spec) else {
            return f64::INFINITY;
        };
        self.members
            .iter()
            .map(|&(i, x)| ks_term(i, self.n, pd.cdf(x)))
            .fold(0.0, f64::max)
    }
}

struct SegmentFit {
    point: Point,
    value: f64,
    evaluations: usize,
    converged: bool,
}

fn fit_segment(objective: &Objective, budget: usize) -> SegmentFit {
    let axis = linspace(PARAMETER_MIN, PARAMETER_MAX, GRID_SIDE);
    let grid: Vec<Point> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| [a, b]))
        .take(budget)
        .collect();
    let scores: Vec<f64> = grid.par_iter().map(|&p| objective.value(p)).collect();
    let (best_i, best_value) = scores
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let mut fit = SegmentFit {
        point: grid[best_i],
        value: best_value,
        evaluations: grid.len(),
        converged: false,
    };
    let remaining = budget - grid.len();
    if remaining == 0 || !best_value.is_finite() {
        return fit;
    }
    let solver = NelderMead {
        lower: [PARAMETER_MIN; 2],
        upper: [PARAMETER_MAX; 2],
        initial_step: axis[1] - axis[0],
        f_tol: NM_F_TOL,
        x_tol: NM_X_TOL,
    };
    let m = solver.minimize(|p| objective.value(p), fit.point, best_value, remaining);
    if m.value < fit.value {
        fit.point = m.point;
        fit.value = m.value;
    }
    fit.evaluations += m.evaluations;
    fit.converged = m.converged;
    fit
}

/// Searches beta-wavelet parameters in each segment to minimize the KS
/// distance to `req.data`, with at most `budget` objective evaluations.
///
/// If the best fit is worse than the unperturbed base, the fitted wavelets are
/// returned with gain 0 and `ks_after == ks_before`.
pub fn fit(req: &FitRequest, budget: usize) -> Result<FitResult> {
    if budget < MIN_BUDGET {
        return Err(Error::Parameter(format!(
            "fit budget must be at least {MIN_BUDGET}, got {budget}"
        )));
    }
    let data = req.data();
    let base = *req.base();
    let m = req.level().segments();
    let n = data.len() as f64;
    let ks_before = ks_statistic(data, |x| base.cdf(x))?;

    let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (i, &x) in data.iter().enumerate() {
        let s = ((base.cdf(x) * m as f64).floor().max(0.0) as usize).min(m - 1);
        members[s].push((i, x));
    }

    let per_segment = budget / m;
    let mut fits = Vec::with_capacity(m);
    for seg_members in members {
        let objective = Objective {
            base,
            level: req.level(),
            members: seg_members,
            n,
        };
        fits.push(fit_segment(&objective, per_segment));
    }
    if fits.iter().any(|f| !f.value.is_finite()) {
        return Err(Error::NoFeasibleSpec);
    }

    let parameters: Vec<(f64, f64)> = fits.iter().map(|f| (f.point[0], f.point[1])).collect();
    let wavelets = parameters
        .iter()
        .map(|&(a, b)| Wavelet::beta(a, b))
        .collect::<Result<Vec<_>>>()?;
    let spec = PerturbationSpec::new(req.level(), wavelets)?;
    let pd = PerturbedDistribution::new(base, spec.clone())?;
    let ks_fitted = ks_statistic(data, |x| pd.cdf(x))?;
    let (spec, ks_after) = if ks_fitted > ks_before {
        (spec.with_gain(0.0)?, ks_before)
    } else {
        (spec, ks_fitted)
    };
    Ok(FitResult {
        spec,
        parameters,
        ks_before,
        ks_after,
        evaluations: fits.iter().map(|f| f.evaluations).sum(),
        converged: fits.iter().all(|f| f.converged),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_hand_computed() {
        let d = ks_statistic(&[0.5], |x| x).unwrap();
        assert_eq!(d, 0.5);
        let n = 10;
        let data: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert_abs_diff_eq!(ks_statistic(&data, |x| x).unwrap(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert_eq!(ks_statistic(&[0.1, 0.3, 0.2], |x| x), Err(Error::Unsorted { index: 2 }));
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn request_validation() {
        let u = BaseDistribution::standard_uniform();
        assert!(FitRequest::new(vec![0.2, 1.5], u, Level::Single).is_err());
        assert!(FitRequest::new(vec![0.4, 0.2], u, Level::Single).is_err());
        assert!(FitRequest::new(vec![0.2, 0.4], u, Level::Level2).is_ok());
    }

    #[test]
    fn small_budget_is_rejected() {
        let req = FitRequest::new(vec![0.1, 0.5, 0.9], BaseDistribution::standard_uniform(), Level::Single).unwrap();
        assert!(fit(&req, 49).is_err());
    }

    #[test]
    fn fit_never_worse_than_base() {
        let data: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0).collect();
        let req = FitRequest::new(data, BaseDistribution::standard_uniform(), Level::Level2).unwrap();
        let r = fit(&req, 60).unwrap();
        assert!(r.ks_after <= r.ks_before + 1e-12);
        assert!(r.evaluations <= 60);
    }
}
