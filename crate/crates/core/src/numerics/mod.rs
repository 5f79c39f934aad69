//! Shared numerical kernels: adaptive quadrature, monotone root finding and
//! the cascade algorithm for discrete-filter wavelets.

mod cascade;
mod quadrature;
mod roots;

pub use cascade::{cascade, Cascade, CascadeTable, DEFAULT_DEPTH, MAX_DEPTH, MIN_DEPTH};
pub use quadrature::{integrate, integrate_best_effort, integrate_piecewise, QuadratureResult};
pub use roots::find_root_monotone;

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Maximizes `f` on `[lo, hi]` by golden-section search; returns `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linspace_endpoints_are_exact() {
        let g = linspace(-1.0, 0.3, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 0.3);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(fx, 2.0, epsilon = 1e-12);
    }
}
