use crate::error::{Error, Result};
use crate::wavelet::Wavelet;

/// Number of dyadic segments the unit interval is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Single,
    Level2,
    Level4,
}

impl Level {
    pub fn segments(self) -> usize {
        match self {
            Level::Single => 1,
            Level::Level2 => 2,
            Level::Level4 => 4,
        }
    }

    /// Segment names, left to right.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Level::Single => &["single"],
            Level::Level2 => &["L", "H"],
            Level::Level4 => &["LL", "LH", "HL", "HH"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Single => "single",
            Level::Level2 => "level2",
            Level::Level4 => "level4",
        }
    }
}

/// How the wavelet amplitude is set in each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    /// `F = x + gain * Psi_[0,1](m x - s)` on the uniform base. A wavelet whose
    /// `m * sup|psi|` exceeds 1 is rescaled by `1 / (m * sup|psi|)` so that the
    /// density stays nonnegative.
    Direct,
    /// `F = F_X + gain * Psi((b - a) u + a) / ((b - a) m sup|psi|)` with
    /// `u = F_X(x)`, valid for any base.
    Normalized,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Direct => "direct",
            Construction::Normalized => "normalized",
        }
    }
}

/// Wavelets per segment, a gain, and optionally a forced construction.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    level: Level,
    wavelets: Vec<Wavelet>,
    gain: f64,
    construction: Option<Construction>,
}

impl PerturbationSpec {
    /// `wavelets` must hold one entry per segment, ordered left to right.
    pub fn new(level: Level, wavelets: Vec<Wavelet>) -> Result<Self> {
        if wavelets.len() != level.segments() {
            return Err(Error::Parameter(format!(
                "{} needs {} wavelet(s), got {}",
                level.name(),
                level.segments(),
                wavelets.len()
            )));
        }
        Ok(Self {
            level,
            wavelets,
            gain: 1.0,
            construction: None,
        })
    }

    pub fn single(w: Wavelet) -> Self {
        Self {
            level: Level::Single,
            wavelets: vec![w],
            gain: 1.0,
            construction: None,
        }
    }

    pub fn level2(lo: Wavelet, hi: Wavelet) -> Self {
        Self {
            level: Level::Level2,
            wavelets: vec![lo, hi],
            gain: 1.0,
            construction: None,
        }
    }

    pub fn level4(ll: Wavelet, lh: Wavelet, hl: Wavelet, hh: Wavelet) -> Self {
        Self {
            level: Level::Level4,
            wavelets: vec![ll, lh, hl, hh],
            gain: 1.0,
            construction: None,
        }
    }

    /// Any finite nonnegative gain is accepted here; the range is enforced
    /// when a [`PerturbedDistribution`](super::PerturbedDistribution) is built.
    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain >= 0.0) || !gain.is_finite() {
            return Err(Error::Parameter(format!("gain must be finite and nonnegative, got {gain}")));
        }
        self.gain = gain;
        Ok(self)
    }

    pub fn with_construction(mut self, construction: Construction) -> Self {
        self.construction = Some(construction);
        self
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn wavelets(&self) -> &[Wavelet] {
        &self.wavelets
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// The construction requested explicitly, if any.
    pub fn construction(&self) -> Option<Construction> {
        self.construction
    }
}
