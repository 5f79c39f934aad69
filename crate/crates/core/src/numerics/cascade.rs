//! Cascade evaluation of scaling functions and wavelets from a discrete filter.
//!
//! Values at the integers come from iterating the two-scale relation
//! `phi(x) = sqrt(2) * sum_k h_k phi(2x - k)` starting from the box function;
//! the iteration preserves `sum phi(k) = 1` and converges to the fixed point.
//! The same relation then fills in dyadic points one level at a time, and
//! the wavelet follows from the quadrature-mirror filter
//! `g_k = (-1)^k h_{N-1-k}`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

pub const MIN_DEPTH: u32 = 6;
pub const MAX_DEPTH: u32 = 16;
pub const DEFAULT_DEPTH: u32 = 10;

const FILTER_SUM_TOLERANCE: f64 = 1e-12;

/// Samples of a function on a uniform dyadic grid over its support, with a
/// piecewise-linear interpolant between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTable {
    support_lo: f64,
    support_hi: f64,
    depth: u32,
    values: Vec<f64>,
    // prefix[i] = integral of the interpolant from support_lo to abscissa(i)
    prefix: Vec<f64>,
}

impl CascadeTable {
    fn new(support_lo: f64, support_hi: f64, depth: u32, values: Vec<f64>) -> Self {
        let h = (-(depth as f64)).exp2();
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        prefix.push(acc);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            prefix.push(acc);
        }
        Self {
            support_lo,
            support_hi,
            depth,
            values,
            prefix,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Grid spacing, `2^-depth`.
    pub fn spacing(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.support_lo + i as f64 * self.spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.abscissa(i), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    // (cell index, fractional position) for x strictly inside the support
    fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.support_lo) * (self.depth as f64).exp2();
        let i = (t.floor() as usize).min(self.values.len() - 2);
        (i, t - i as f64)
    }

    /// Linear interpolation of the samples; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if !(x >= self.support_lo && x <= self.support_hi) {
            return 0.0;
        }
        let (i, frac) = self.locate(x);
        if frac == 0.0 {
            return self.values[i];
        }
        if frac == 1.0 {
            return self.values[i + 1];
        }
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Exact integral of the interpolant from the left support edge to `x`.
    pub fn integral_to(&self, x: f64) -> f64 {
        if x <= self.support_lo {
            return 0.0;
        }
        if x >= self.support_hi {
            return self.prefix[self.prefix.len() - 1];
        }
        let (i, frac) = self.locate(x);
        let v0 = self.values[i];
        let vx = v0 + frac * (self.values[i + 1] - v0);
        self.prefix[i] + 0.5 * frac * self.spacing() * (v0 + vx)
    }

    /// Integral of the interpolant over the whole support.
    pub fn total_integral(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }
}

/// Scaling function and wavelet tables produced by [`cascade`].
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub scaling: CascadeTable,
    pub wavelet: CascadeTable,
}

/// Runs the cascade for `scaling_filter` down to grid spacing `2^-depth`.
pub fn cascade(scaling_filter: &[f64], depth: u32) -> Result<Cascade> {
    let n = scaling_filter.len();
    let sum: f64 = scaling_filter.iter().sum();
    if n < 2 || (sum - SQRT_2).abs() > FILTER_SUM_TOLERANCE {
        return Err(Error::InvalidFilter { sum });
    }
    if !(MIN_DEPTH..=MAX_DEPTH).contains(&depth) {
        return Err(Error::Parameter(format!(
            "cascade depth must lie in [{MIN_DEPTH}, {MAX_DEPTH}], got {depth}"
        )));
    }
    let h = scaling_filter;
    let support_hi = (n - 1) as f64;

    let mut level = integer_values(h);
    let mut levels = vec![level.clone()];
    for j in 1..=depth {
        level = refine(h, &level, j);
        levels.push(level.clone());
    }

    // g_k = (-1)^k h_{N-1-k}
    let g: Vec<f64> = (0..n)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * h[n - 1 - k]
        })
        .collect();
    let coarse = &levels[depth as usize - 1];
    let half = 1usize << (depth - 1);
    let len = (n - 1) * (1usize << depth) + 1;
    let wavelet: Vec<f64> = (0..len)
        .map(|i| {
            let acc: f64 = g
                .iter()
                .enumerate()
                .filter_map(|(k, gk)| {
                    let shift = k * half;
                    (i >= shift)
                        .then(|| coarse.get(i - shift))
                        .flatten()
                        .map(|phi| gk * phi)
                })
                .sum();
            SQRT_2 * acc
        })
        .collect();

    Ok(Cascade {
        scaling: CascadeTable::new(0.0, support_hi, depth, levels.pop().unwrap_or_default()),
        wavelet: CascadeTable::new(0.0, support_hi, depth, wavelet),
    })
}

fn integer_values(h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let mut phi = vec![0.0; n];
    phi[0] = 1.0;
    for _ in 0..5000 {
        let mut next: Vec<f64> = (0..n)
            .map(|k| {
                let acc: f64 = h
                    .iter()
                    .enumerate()
                    .filter_map(|(j, hj)| {
                        let idx = 2 * k as isize - j as isize;
                        (0..n as isize).contains(&idx).then(|| hj * phi[idx as usize])
                    })
                    .sum();
                SQRT_2 * acc
            })
            .collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change = next
            .iter()
            .zip(&phi)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        phi = next;
        if change < 1e-17 {
            break;
        }
    }
    if n > 2 {
        // phi(0) = sqrt(2) h_0 phi(0) forces zero unless sqrt(2) h_0 = 1 (Haar)
        phi[0] = 0.0;
        phi[n - 1] = 0.0;
    }
    phi
}

fn refine(h: &[f64], coarse: &[f64], level: u32) -> Vec<f64> {
    let n = h.len();
    let half = 1usize << (level - 1);
    let len = (n - 1) * (1usize << level) + 1;
    (0..len)
        .map(|i| {
            if i % 2 == 0 {
                return coarse[i / 2];
            }
            let acc: f64 = h
                .iter()
                .enumerate()
                .filter_map(|(k, hk)| {
                    let shift = k * half;
                    (i >= shift)
                        .then(|| coarse.get(i - shift))
                        .flatten()
                        .map(|phi| hk * phi)
                })
                .sum();
            SQRT_2 * acc
        })
        .collect()
}
