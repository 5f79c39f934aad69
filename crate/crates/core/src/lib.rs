//! Wavelet perturbations of probability distributions.

pub mod config;
pub mod distributions;
pub mod error;
pub mod fitting;
pub mod moments;
pub mod numerics;
pub mod perturbation;
pub mod wavelet;

pub use distributions::BaseDistribution;
pub use error::{Error, Result};
pub use perturbation::{Construction, Level, PerturbationSpec, PerturbedDistribution, ValidityReport};
pub use wavelet::{CumulativeWavelet, Wavelet};
