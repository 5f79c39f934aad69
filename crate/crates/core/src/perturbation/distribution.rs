use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{check_probability, BaseDistribution};
use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, linspace};
use crate::wavelet::{CumulativeWavelet, Wavelet, ADMISSIBILITY_TOLERANCE};

use super::spec::{Construction, Level, PerturbationSpec};

/// Root-finding tolerance in probability space used by [`PerturbedDistribution::quantile`].
pub const DEFAULT_QUANTILE_TOLERANCE: f64 = 1e-13;

/// Slack allowed on the positivity product `amplitude * m * sup|psi| <= 1`.
const AMPLITUDE_SLACK: f64 = 1e-12;

const UNIFORM_SPLITS: usize = 64;

#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub(crate) cumulative: CumulativeWavelet,
    pub(crate) amplitude: f64,
    lo: f64,
    width: f64,
}

impl Segment {
    fn new(w: Wavelet, amplitude: f64) -> Result<Self> {
        let (lo, hi) = w.support();
        Ok(Self {
            cumulative: CumulativeWavelet::new(w)?,
            amplitude,
            lo,
            width: hi - lo,
        })
    }

    pub(crate) fn wavelet(&self) -> &Wavelet {
        self.cumulative.wavelet()
    }

    /// Contribution to `F_new - F_X` at local coordinate `t` in [0, 1].
    fn epsilon(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * self.cumulative.eval(self.lo + self.width * t) / self.width
    }

    fn psi(&self, t: f64) -> f64 {
        self.wavelet().eval(self.lo + self.width * t)
    }
}

/// A base distribution with a wavelet perturbation applied to its CDF.
///
/// With `u = F_X(x)` falling in segment `s` of `m` (local coordinate
/// `t = m u - s`), the perturbed CDF is
/// `F_new(x) = u + A_s Psi((b - a) t + a) / (b - a)` and the density is
/// `f_new(x) = f_X(x) (1 + A_s m psi((b - a) t + a))`, where `A_s` is the
/// segment amplitude set by the construction.
#[derive(Debug, Clone)]
pub struct PerturbedDistribution {
    base: BaseDistribution,
    spec: PerturbationSpec,
    construction: Construction,
    segments: Vec<Segment>,
}

impl PerturbedDistribution {
    /// Builds the distribution, rejecting inadmissible wavelets and any
    /// segment where `amplitude * m * sup|psi| > 1`.
    pub fn new(base: BaseDistribution, spec: PerturbationSpec) -> Result<Self> {
        let construction = resolve_construction(&base, &spec)?;
        let m = spec.level().segments() as f64;
        for (w, label) in spec.wavelets().iter().zip(spec.level().labels()) {
            let report = crate::wavelet::admissibility_check(w, ADMISSIBILITY_TOLERANCE);
            if !report.passes {
                return Err(Error::Admissibility {
                    wavelet: format!("{} ({label})", w.name()),
                    zero_integral: report.zero_integral_residual,
                    boundary: report.boundary_residual,
                    tolerance: ADMISSIBILITY_TOLERANCE,
                });
            }
            let sup = w.sup_abs();
            let product = amplitude(construction, spec.gain(), m, sup) * m * sup;
            if !(sup.is_finite() && sup > 0.0) || !(product <= 1.0 + AMPLITUDE_SLACK) {
                return Err(Error::Amplitude {
                    segment: label.to_string(),
                    sup,
                    product,
                });
            }
        }
        Self::assemble(base, spec, construction)
    }

    /// Builds the distribution without the admissibility and amplitude checks.
    ///
    /// The result may be an invalid distribution; [`PerturbedDistribution::validate`]
    /// reports how.
    pub fn new_unchecked(base: BaseDistribution, spec: PerturbationSpec) -> Result<Self> {
        let construction = resolve_construction(&base, &spec)?;
        for (w, label) in spec.wavelets().iter().zip(spec.level().labels()) {
            let sup = w.sup_abs();
            if !(sup.is_finite() && sup > 0.0) {
                return Err(Error::Amplitude {
                    segment: label.to_string(),
                    sup,
                    product: f64::INFINITY,
                });
            }
        }
        Self::assemble(base, spec, construction)
    }

    fn assemble(base: BaseDistribution, spec: PerturbationSpec, construction: Construction) -> Result<Self> {
        let m = spec.level().segments() as f64;
        let segments = spec
            .wavelets()
            .iter()
            .map(|w| Segment::new(w.clone(), amplitude(construction, spec.gain(), m, w.sup_abs())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base,
            spec,
            construction,
            segments,
        })
    }

    pub fn base(&self) -> &BaseDistribution {
        &self.base
    }

    pub fn spec(&self) -> &PerturbationSpec {
        &self.spec
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Effective amplitude `A_s` in each segment.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.amplitude).collect()
    }

    pub(crate) fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn is_identity(&self) -> bool {
        self.segments.iter().all(|s| s.amplitude == 0.0)
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let m = self.segments.len();
        if m == 1 {
            return (0, u);
        }
        let scaled = u * m as f64;
        let s = (scaled.floor().max(0.0) as usize).min(m - 1);
        (s, scaled - s as f64)
    }

    /// `F_new - F_X` as a function of `u = F_X(x)`.
    pub fn epsilon_at_probability(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        let (s, t) = self.locate(u);
        self.segments[s].epsilon(t)
    }

    /// `f_new / f_X` as a function of `u = F_X(x)`.
    pub fn density_ratio(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 1.0;
        }
        let (s, t) = self.locate(u);
        let seg = &self.segments[s];
        1.0 + seg.amplitude * self.segments.len() as f64 * seg.psi(t)
    }

    /// Perturbed CDF in probability space: `u + epsilon(u)`.
    pub fn cdf_at_probability(&self, u: f64) -> f64 {
        u + self.epsilon_at_probability(u)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_at_probability(self.base.cdf(x))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let fx = self.base.pdf(x);
        if fx == 0.0 {
            return 0.0;
        }
        fx * self.density_ratio(self.base.cdf(x))
    }

    /// `epsilon(x) = F_new(x) - F_X(x)`.
    pub fn epsilon(&self, x: f64) -> f64 {
        self.epsilon_at_probability(self.base.cdf(x))
    }

    /// Generalized inverse `inf {x : F_new(x) >= p}`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.quantile_with_tolerance(p, DEFAULT_QUANTILE_TOLERANCE)
    }

    /// As [`quantile`](Self::quantile), solving `F_new = p` in probability
    /// space to bracket width `tol` before mapping through the base quantile.
    pub fn quantile_with_tolerance(&self, p: f64, tol: f64) -> Result<f64> {
        let u = self.probability_quantile(p, tol)?;
        self.base.quantile(u)
    }

    fn probability_quantile(&self, p: f64, tol: f64) -> Result<f64> {
        check_probability(p)?;
        if self.is_identity() || p == 0.0 || p == 1.0 {
            return Ok(p);
        }
        find_root_monotone(|u| self.cdf_at_probability(u) - p, 0.0, 1.0, tol)
    }

    /// `n` draws by inverse-transform sampling. Uniforms come from ChaCha8
    /// seeded with `seed`, in order; output order matches draw order.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".to_string()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
        draws
            .into_par_iter()
            .map(|p| self.quantile(p))
            .collect()
    }

    /// Support clipped to the `tail` and `1 - tail` base quantiles where infinite.
    pub fn effective_support(&self, tail: f64) -> (f64, f64) {
        self.base.effective_support(tail)
    }

    /// Sorted x-points inside `[lo, hi]` where `f_new` may lose smoothness:
    /// segment edges, wavelet breakpoints and a uniform split in probability,
    /// all mapped through the base quantile.
    pub(crate) fn x_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let m = self.segments.len() as f64;
        let mut us: Vec<f64> = linspace(0.0, 1.0, UNIFORM_SPLITS + 1);
        for (s, seg) in self.segments.iter().enumerate() {
            let (a, b) = seg.wavelet().support();
            for y in seg.wavelet().integration_breaks() {
                us.push((s as f64 + (y - a) / (b - a)) / m);
            }
        }
        let mut xs: Vec<f64> = us
            .into_iter()
            .filter(|u| *u > 0.0 && *u < 1.0)
            .filter_map(|u| self.base.quantile(u).ok())
            .filter(|x| *x > lo && *x < hi)
            .collect();
        xs.push(lo);
        xs.push(hi);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

fn resolve_construction(base: &BaseDistribution, spec: &PerturbationSpec) -> Result<Construction> {
    let construction = spec.construction().unwrap_or(if base.is_uniform() {
        Construction::Direct
    } else {
        Construction::Normalized
    });
    if !base.is_uniform() {
        if spec.level() != Level::Single {
            return Err(Error::Parameter(format!(
                "{} perturbations are defined on a uniform base only, got {}",
                spec.level().name(),
                base.name()
            )));
        }
        if construction == Construction::Direct {
            return Err(Error::Parameter(format!(
                "the direct construction needs a uniform base, got {}",
                base.name()
            )));
        }
    }
    Ok(construction)
}

fn amplitude(construction: Construction, gain: f64, m: f64, sup: f64) -> f64 {
    match construction {
        Construction::Normalized => gain / (m * sup),
        Construction::Direct => {
            if m * sup <= 1.0 {
                gain
            } else {
                gain / (m * sup)
            }
        }
    }
}
