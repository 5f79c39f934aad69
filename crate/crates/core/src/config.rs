//! Serializable description of a perturbed distribution.
//!
//! ```json
//! {
//!   "base": {"kind": "uniform", "lo": 0, "hi": 1},
//!   "perturbation": {
//!     "mode": "level2",
//!     "gain": 1,
//!     "wavelets": [{"family": "beta", "alpha": 4, "beta": 3},
//!                  {"family": "beta", "alpha": 3, "beta": 7}]
//!   }
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::numerics::DEFAULT_DEPTH;
use crate::perturbation::{Construction, Level, PerturbationSpec, PerturbedDistribution};
use crate::wavelet::{Family, Wavelet, DEFAULT_MEXICAN_HAT_HALF_WIDTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub base: BaseConfig,
    pub perturbation: PerturbationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Uniform,
    Normal,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub kind: BaseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Single,
    Level2,
    Level4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Direct,
    Normalized,
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub mode: ModeKind,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default)]
    pub wavelets: Vec<WaveletConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    PsiU,
    Beta,
    MexicanHat,
    Daubechies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletConfig {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

fn reject_fields(context: &str, fields: &[(&str, bool)]) -> Result<()> {
    match fields.iter().find(|(_, present)| *present) {
        Some((name, _)) => Err(Error::Config(format!("field '{name}' does not apply to {context}"))),
        None => Ok(()),
    }
}

impl BaseConfig {
    pub fn build(&self) -> Result<BaseDistribution> {
        match self.kind {
            BaseKind::Uniform => {
                reject_fields(
                    "a uniform base",
                    &[("mu", self.mu.is_some()), ("sigma", self.sigma.is_some()), ("rate", self.rate.is_some())],
                )?;
                BaseDistribution::uniform(self.lo.unwrap_or(0.0), self.hi.unwrap_or(1.0))
            }
            BaseKind::Normal => {
                reject_fields(
                    "a normal base",
                    &[("lo", self.lo.is_some()), ("hi", self.hi.is_some()), ("rate", self.rate.is_some())],
                )?;
                BaseDistribution::normal(self.mu.unwrap_or(0.0), self.sigma.unwrap_or(1.0))
            }
            BaseKind::Exponential => {
                reject_fields(
                    "an exponential base",
                    &[
                        ("lo", self.lo.is_some()),
                        ("hi", self.hi.is_some()),
                        ("mu", self.mu.is_some()),
                        ("sigma", self.sigma.is_some()),
                    ],
                )?;
                BaseDistribution::exponential(self.rate.unwrap_or(1.0))
            }
        }
    }
}

impl From<&BaseDistribution> for BaseConfig {
    fn from(base: &BaseDistribution) -> Self {
        let mut c = BaseConfig {
            kind: BaseKind::Uniform,
            lo: None,
            hi: None,
            mu: None,
            sigma: None,
            rate: None,
        };
        match *base {
            BaseDistribution::Uniform { lo, hi } => {
                c.lo = Some(lo);
                c.hi = Some(hi);
            }
            BaseDistribution::Normal { mu, sigma } => {
                c.kind = BaseKind::Normal;
                c.mu = Some(mu);
                c.sigma = Some(sigma);
            }
            BaseDistribution::Exponential { rate } => {
                c.kind = BaseKind::Exponential;
                c.rate = Some(rate);
            }
        }
        c
    }
}

impl WaveletConfig {
    fn empty(family: FamilyKind) -> Self {
        Self {
            family,
            alpha: None,
            beta: None,
            half_width: None,
            order: None,
            depth: None,
        }
    }

    pub fn build(&self) -> Result<Wavelet> {
        match self.family {
            FamilyKind::PsiU => {
                reject_fields(
                    "psi_u",
                    &[
                        ("alpha", self.alpha.is_some()),
                        ("beta", self.beta.is_some()),
                        ("half_width", self.half_width.is_some()),
                        ("order", self.order.is_some()),
                        ("depth", self.depth.is_some()),
                    ],
                )?;
                Ok(Wavelet::psi_u())
            }
            FamilyKind::Beta => {
                reject_fields(
                    "a beta wavelet",
                    &[
                        ("half_width", self.half_width.is_some()),
                        ("order", self.order.is_some()),
                        ("depth", self.depth.is_some()),
                    ],
                )?;
                let (Some(alpha), Some(beta)) = (self.alpha, self.beta) else {
                    return Err(Error::Config("a beta wavelet needs 'alpha' and 'beta'".to_string()));
                };
                Wavelet::beta(alpha, beta)
            }
            FamilyKind::MexicanHat => {
                reject_fields(
                    "a mexican_hat wavelet",
                    &[
                        ("alpha", self.alpha.is_some()),
                        ("beta", self.beta.is_some()),
                        ("order", self.order.is_some()),
                        ("depth", self.depth.is_some()),
                    ],
                )?;
                Wavelet::mexican_hat(self.half_width.unwrap_or(DEFAULT_MEXICAN_HAT_HALF_WIDTH))
            }
            FamilyKind::Daubechies => {
                reject_fields(
                    "a daubechies wavelet",
                    &[
                        ("alpha", self.alpha.is_some()),
                        ("beta", self.beta.is_some()),
                        ("half_width", self.half_width.is_some()),
                    ],
                )?;
                let Some(order) = self.order else {
                    return Err(Error::Config("a daubechies wavelet needs 'order'".to_string()));
                };
                Wavelet::daubechies_with_depth(order, self.depth.unwrap_or(DEFAULT_DEPTH))
            }
        }
    }

    pub fn from_wavelet(w: &Wavelet) -> Result<Self> {
        match w.family() {
            Family::PsiU => Ok(Self::empty(FamilyKind::PsiU)),
            Family::Beta { alpha, beta } => Ok(Self {
                alpha: Some(*alpha),
                beta: Some(*beta),
                ..Self::empty(FamilyKind::Beta)
            }),
            Family::MexicanHat { half_width } => Ok(Self {
                half_width: Some(*half_width),
                ..Self::empty(FamilyKind::MexicanHat)
            }),
            Family::Daubechies { order, depth, .. } => Ok(Self {
                order: Some(*order),
                depth: (*depth != DEFAULT_DEPTH).then_some(*depth),
                ..Self::empty(FamilyKind::Daubechies)
            }),
            Family::SupportNormalized(_) | Family::Custom { .. } => Err(Error::Config(format!(
                "wavelet '{}' has no configuration form",
                w.name()
            ))),
        }
    }
}

impl PerturbationConfig {
    pub fn level(&self) -> Level {
        match self.mode {
            ModeKind::Single => Level::Single,
            ModeKind::Level2 => Level::Level2,
            ModeKind::Level4 => Level::Level4,
        }
    }

    pub fn build(&self) -> Result<PerturbationSpec> {
        let level = self.level();
        if self.wavelets.len() != level.segments() {
            return Err(Error::Config(format!(
                "mode '{}' needs {} wavelet(s), got {}",
                level.name(),
                level.segments(),
                self.wavelets.len()
            )));
        }
        let wavelets = self
            .wavelets
            .iter()
            .map(WaveletConfig::build)
            .collect::<Result<Vec<_>>>()?;
        let mut spec = PerturbationSpec::new(level, wavelets)?.with_gain(self.gain)?;
        if let Some(c) = self.construction {
            spec = spec.with_construction(match c {
                ConstructionKind::Direct => Construction::Direct,
                ConstructionKind::Normalized => Construction::Normalized,
            });
        }
        Ok(spec)
    }
}

impl SpecConfig {
    /// Builds and checks the distribution.
    pub fn build(&self) -> Result<PerturbedDistribution> {
        PerturbedDistribution::new(self.base.build()?, self.perturbation.build()?)
    }

    pub fn from_parts(base: &BaseDistribution, spec: &PerturbationSpec) -> Result<Self> {
        let mode = match spec.level() {
            Level::Single => ModeKind::Single,
            Level::Level2 => ModeKind::Level2,
            Level::Level4 => ModeKind::Level4,
        };
        Ok(Self {
            base: base.into(),
            perturbation: PerturbationConfig {
                mode,
                gain: spec.gain(),
                wavelets: spec
                    .wavelets()
                    .iter()
                    .map(WaveletConfig::from_wavelet)
                    .collect::<Result<Vec<_>>>()?,
                construction: spec.construction().map(|c| match c {
                    Construction::Direct => ConstructionKind::Direct,
                    Construction::Normalized => ConstructionKind::Normalized,
                }),
            },
        })
    }
}
