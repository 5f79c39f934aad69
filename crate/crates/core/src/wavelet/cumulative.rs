use crate::error::{Error, Result};
use crate::numerics::{integrate_best_effort, linspace};

use super::{zero_integral_residual, AdmissibilityReport, Wavelet};

/// Number of cached intervals between the support endpoints.
pub const CACHE_KNOTS: usize = 1024;

pub const DEFAULT_CUMULATIVE_TOLERANCE: f64 = 1e-13;

/// Running integral `Psi(x) = integral of psi from a to x`.
///
/// Built-in families have closed forms (Daubechies tables are integrated
/// exactly as piecewise-linear functions). For custom wavelets, values at
/// `CACHE_KNOTS + 1` equally spaced knots are accumulated once and an
/// evaluation adds a short adaptive quadrature from the nearest knot on the
/// left. `Psi` is forced to zero at and outside both support endpoints; the
/// value at `b` before that clamp is kept as
/// [`CumulativeWavelet::closure_residual`].
#[derive(Debug, Clone)]
pub struct CumulativeWavelet {
    wavelet: Wavelet,
    tolerance: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
    closure: f64,
}

impl CumulativeWavelet {
    pub fn new(wavelet: Wavelet) -> Result<Self> {
        Self::with_tolerance(wavelet, DEFAULT_CUMULATIVE_TOLERANCE)
    }

    pub fn with_tolerance(wavelet: Wavelet, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {tolerance}")));
        }
        if let Some(closure) = wavelet.exact_cumulative(wavelet.support().1) {
            return Ok(Self {
                wavelet,
                tolerance,
                knots: Vec::new(),
                values: Vec::new(),
                closure,
            });
        }
        let (lo, hi) = wavelet.support();
        let knots = linspace(lo, hi, CACHE_KNOTS + 1);
        let piece_tol = tolerance / CACHE_KNOTS as f64;
        let mut values = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        values.push(acc);
        for w in knots.windows(2) {
            acc += integrate_best_effort(|x| wavelet.eval(x), w[0], w[1], piece_tol)?.value;
            values.push(acc);
        }
        Ok(Self {
            wavelet,
            tolerance,
            knots,
            values,
            closure: acc,
        })
    }

    pub fn wavelet(&self) -> &Wavelet {
        &self.wavelet
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `Psi(x)`, falling back to the nearest cached knot if quadrature fails.
    pub fn eval(&self, x: f64) -> f64 {
        match self.try_eval(x) {
            Ok(v) => v,
            Err(_) => self.values.get(self.knot_index(x)).copied().unwrap_or(0.0),
        }
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.wavelet.support();
        if x.is_nan() {
            return Err(Error::Evaluation { abscissa: x });
        }
        if x <= lo || x >= hi {
            return Ok(0.0);
        }
        if let Some(v) = self.wavelet.exact_cumulative(x) {
            return Ok(v);
        }
        let j = self.knot_index(x);
        let k = self.knots[j];
        if x == k {
            return Ok(self.values[j]);
        }
        let local_tol = self.tolerance * (x - k) / (hi - lo);
        let tail = integrate_best_effort(|t| self.wavelet.eval(t), k, x, local_tol)?;
        Ok(self.values[j] + tail.value)
    }

    fn knot_index(&self, x: f64) -> usize {
        let (lo, hi) = self.wavelet.support();
        let t = (x - lo) / (hi - lo) * CACHE_KNOTS as f64;
        if t.is_nan() || t <= 0.0 {
            0
        } else {
            (t.floor() as usize).min(CACHE_KNOTS - 1)
        }
    }

    /// Accumulated integral at the right end of the support, before `Psi(b)`
    /// is forced to zero.
    pub fn closure_residual(&self) -> f64 {
        self.closure
    }

    /// Whether evaluation goes through the knot cache rather than a closed form.
    pub fn is_cached(&self) -> bool {
        !self.knots.is_empty()
    }

    pub fn admissibility(&self, tolerance: f64) -> AdmissibilityReport {
        AdmissibilityReport::new(
            zero_integral_residual(&self.wavelet),
            self.closure_residual().abs(),
            self.wavelet.sup_abs(),
            tolerance,
        )
    }
}

/// One-off evaluation of `Psi(x)` at tolerance `tol`.
pub fn cumulative(w: &Wavelet, x: f64, tol: f64) -> Result<f64> {
    CumulativeWavelet::with_tolerance(w.clone(), tol)?.try_eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::numerics::integrate;
    use proptest::prelude::*;

    fn psi_u_oracle(x: f64) -> f64 {
        let part = |t: f64| if t <= 0.0 { 0.0 } else { t * t / 2.0 * t.ln() - t * t / 4.0 };
        -0.5 * part(x) - 0.5 * part(1.0 - x) - 0.125
    }

    fn by_quadrature(w: &Wavelet, x: f64) -> f64 {
        let (a, _) = w.support();
        integrate(|t| w.eval(t), a, x, 1e-14).unwrap().value
    }

    #[test]
    fn psi_u_cumulative_values() {
        let c = CumulativeWavelet::new(Wavelet::psi_u()).unwrap();
        assert!(!c.is_cached());
        assert_abs_diff_eq!(c.eval(0.5), 0.024_143_4, epsilon = 1e-7);
        assert_abs_diff_eq!(c.eval(0.5), 0.024_143_397_569_993_16, epsilon = 1e-15);
        assert_eq!(c.eval(0.0), 0.0);
        assert_eq!(c.eval(1.0), 0.0);
        assert_eq!(c.eval(-3.0), 0.0);
        assert!(c.closure_residual().abs() < 1e-15);
        for i in 1..50 {
            let x = i as f64 / 50.0;
            assert_abs_diff_eq!(c.eval(x), by_quadrature(c.wavelet(), x), epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for w in [
            Wavelet::beta(4.0, 3.0).unwrap(),
            Wavelet::beta(2.0, 7.0).unwrap(),
            Wavelet::mexican_hat(5.0).unwrap(),
            Wavelet::mexican_hat(3.0).unwrap().support_normalized(),
        ] {
            let c = CumulativeWavelet::new(w.clone()).unwrap();
            let (a, b) = w.support();
            for i in 1..40 {
                let x = a + (b - a) * i as f64 / 40.0;
                assert_abs_diff_eq!(c.eval(x), by_quadrature(&w, x), epsilon = 1e-11);
            }
            assert!(c.closure_residual().abs() < 1e-13, "{}", w.name());
        }
    }

    #[test]
    fn beta_cumulative_is_negative_density_shape() {
        // Psi = -x^3 (1-x)^2 / B(4,3) for the (4, 3) beta wavelet
        let c = CumulativeWavelet::new(Wavelet::beta(4.0, 3.0).unwrap()).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert_abs_diff_eq!(c.eval(x), -60.0 * x.powi(3) * (1.0 - x).powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn custom_wavelet_uses_cache() {
        let w = Wavelet::custom("psi_u copy", 0.0, 1.0, crate::wavelet::eval_psi_u).unwrap();
        let c = CumulativeWavelet::new(w).unwrap();
        assert!(c.is_cached());
        for i in 0..=97 {
            let x = i as f64 / 97.0;
            assert_abs_diff_eq!(c.eval(x), if i == 0 || i == 97 { 0.0 } else { psi_u_oracle(x) }, epsilon = 1e-12);
        }
        assert!(c.closure_residual().abs() < 1e-12);
    }

    #[test]
    fn free_function_agrees() {
        let v = cumulative(&Wavelet::psi_u(), 0.5, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 0.024_143_397_569_993_16, epsilon = 1e-10);
        assert!(cumulative(&Wavelet::psi_u(), f64::NAN, 1e-10).is_err());
    }

    #[test]
    fn daubechies_cumulative_is_exact_for_table() {
        let w = Wavelet::daubechies(3).unwrap();
        let c = CumulativeWavelet::new(w.clone()).unwrap();
        let Some(exact) = w.exact_cumulative(2.3) else {
            unreachable!()
        };
        assert_eq!(c.eval(2.3), exact);
        let quad = crate::numerics::integrate_piecewise(
            |x| w.eval(x),
            &w.breakpoints().into_iter().filter(|&x| x <= 2.3).chain([2.3]).collect::<Vec<_>>(),
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(c.eval(2.3), quad.value, epsilon = 1e-10);
        assert!(c.closure_residual().abs() < 1e-9);
    }

    #[test]
    fn built_in_wavelets_are_admissible() {
        let ws = [
            Wavelet::psi_u(),
            Wavelet::beta(4.0, 3.0).unwrap(),
            Wavelet::beta(3.0, 7.0).unwrap(),
            Wavelet::mexican_hat(5.0).unwrap(),
            Wavelet::mexican_hat(3.0).unwrap(),
            Wavelet::daubechies(2).unwrap(),
            Wavelet::daubechies(4).unwrap(),
            Wavelet::daubechies(4).unwrap().support_normalized(),
        ];
        for w in ws {
            let r = CumulativeWavelet::new(w.clone()).unwrap().admissibility(1e-6);
            assert!(r.passes, "{} {:?}", w.name(), r);
        }
    }

    proptest! {
        #[test]
        fn derivative_matches_psi(x in 0.01f64..0.99) {
            let c = CumulativeWavelet::new(Wavelet::psi_u()).unwrap();
            let h = 1e-5;
            let d = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            prop_assert!((d - crate::wavelet::eval_psi_u(x)).abs() < 1e-6);
        }

        #[test]
        fn psi_u_cumulative_is_symmetric(x in 0.0f64..1.0) {
            let c = CumulativeWavelet::new(Wavelet::psi_u()).unwrap();
            prop_assert!((c.eval(x) - c.eval(1.0 - x)).abs() < 1e-12);
        }

        #[test]
        fn hat_cumulative_derivative(x in -4.9f64..4.9) {
            let w = Wavelet::mexican_hat(5.0).unwrap();
            let c = CumulativeWavelet::new(w.clone()).unwrap();
            let h = 1e-5;
            let d = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            prop_assert!((d - w.eval(x)).abs() < 1e-6);
        }
    }
}
