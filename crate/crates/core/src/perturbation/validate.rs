use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_best_effort, linspace};

use super::distribution::PerturbedDistribution;

/// Tail probability cut from each side of an unbounded base.
pub const EFFECTIVE_SUPPORT_TAIL: f64 = 1e-9;

pub const MIN_VALIDATION_GRID: usize = 101;

/// Slack on `F_{i+1} >= F_i` between grid neighbours.
pub const MONOTONE_SLACK: f64 = 1e-12;

const MASS_TOLERANCE: f64 = 1e-10;

/// Results of checking a perturbed distribution on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub monotone: bool,
    pub boundary_lo_residual: f64,
    pub boundary_hi_residual: f64,
    /// `|integral of f_new - 1|` over the effective support.
    pub mass_residual: f64,
    /// Largest `|epsilon| - F_X` on the grid, or 0.
    pub bound_violation: f64,
    pub min_density: f64,
    /// `integral of epsilon` over the effective support. Not part of `passes`.
    pub epsilon_integral: f64,
    pub tolerance: f64,
    pub passes: bool,
}

impl PerturbedDistribution {
    /// Checks monotonicity, the boundary values, unit mass, `|epsilon| <= F_X`
    /// and nonnegative density on an equispaced grid of `grid_points` over the
    /// effective support. Residuals above `tol` make `passes` false.
    pub fn validate(&self, grid_points: usize, tol: f64) -> Result<ValidityReport> {
        if grid_points < MIN_VALIDATION_GRID {
            return Err(Error::Parameter(format!(
                "validation grid needs at least {MIN_VALIDATION_GRID} points, got {grid_points}"
            )));
        }
        if !(tol >= 0.0) {
            return Err(Error::Parameter(format!("tolerance must be nonnegative, got {tol}")));
        }
        let (lo, hi) = self.effective_support(EFFECTIVE_SUPPORT_TAIL);
        let grid = linspace(lo, hi, grid_points);

        let mut monotone = true;
        let mut bound_violation = 0.0_f64;
        let mut min_density = f64::INFINITY;
        let mut prev = f64::NEG_INFINITY;
        for &x in &grid {
            let fx = self.base().cdf(x);
            let f_new = self.cdf_at_probability(fx);
            if f_new < prev - MONOTONE_SLACK {
                monotone = false;
            }
            prev = f_new;
            bound_violation = bound_violation.max((f_new - fx).abs() - fx);
            min_density = min_density.min(self.pdf(x));
        }

        let breaks = self.x_breakpoints(lo, hi);
        let mass = self.integrate_pieces(|x| self.pdf(x), &breaks)?;
        let epsilon_integral = self.integrate_pieces(|x| self.epsilon(x), &breaks)?;

        let boundary_lo_residual = self.cdf(lo).abs();
        let boundary_hi_residual = (1.0 - self.cdf(hi)).abs();
        let mass_residual = (mass - 1.0).abs();
        let passes = monotone
            && boundary_lo_residual <= tol
            && boundary_hi_residual <= tol
            && mass_residual <= tol
            && bound_violation <= tol
            && min_density >= -tol;
        Ok(ValidityReport {
            monotone,
            boundary_lo_residual,
            boundary_hi_residual,
            mass_residual,
            bound_violation,
            min_density,
            epsilon_integral,
            tolerance: tol,
            passes,
        })
    }

    pub(crate) fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64> {
        let span = breaks[breaks.len() - 1] - breaks[0];
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let local = MASS_TOLERANCE * (w[1] - w[0]) / span;
            total += integrate_best_effort(&f, w[0], w[1], local)?.value;
        }
        Ok(total)
    }
}
