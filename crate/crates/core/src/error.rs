use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand is not finite at x = {abscissa}")]
    Evaluation { abscissa: f64 },

    #[error("adaptive quadrature did not converge on [{lo}, {hi}] within the depth limit")]
    Convergence { lo: f64, hi: f64 },

    #[error("root is not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("invalid scaling filter: coefficients sum to {sum}, expected sqrt(2)")]
    InvalidFilter { sum: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("probability {p} is outside [0, 1]")]
    Domain { p: f64 },

    #[error("amplitude condition violated in segment {segment}: gain * sup|psi| * segments = {product} > 1 (sup|psi| = {sup})")]
    Amplitude {
        segment: String,
        sup: f64,
        product: f64,
    },

    #[error("wavelet '{wavelet}' is not admissible: |integral| = {zero_integral}, |Psi(b)| = {boundary} (tolerance {tolerance})")]
    Admissibility {
        wavelet: String,
        zero_integral: f64,
        boundary: f64,
        tolerance: f64,
    },

    #[error("data is not sorted ascending at index {index}")]
    Unsorted { index: usize },

    #[error("no feasible perturbation found in the parameter box")]
    NoFeasibleSpec,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
