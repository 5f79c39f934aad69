use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 400;

/// Finds the leftmost point where a nondecreasing `g` reaches zero on `[lo, hi]`.
///
/// The bracket `[a, b]` keeps `g(a) < 0 <= g(b)` throughout, so the result is
/// `inf {x : g(x) >= 0}` up to a bracket width of `tol * (hi - lo)`, which is
/// the generalized inverse when `g` is a CDF minus a level. Secant steps
/// alternate with bisection; after a secant step the opposite side is probed
/// half a tolerance away, which ends the search as soon as the secant estimate
/// lands within tolerance.
pub fn find_root_monotone<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::Parameter(format!(
            "root finder needs lo <= hi and tol > 0 (got [{lo}, {hi}], tol {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga > 0.0 || gb < 0.0 || ga.is_nan() || gb.is_nan() {
        return Err(Error::Bracket {
            lo,
            hi,
            g_lo: ga,
            g_hi: gb,
        });
    }
    if ga >= 0.0 {
        return Ok(a);
    }

    let width_tol = tol * (hi - lo);
    let mut secant = true;
    for _ in 0..MAX_ITERATIONS {
        if b - a <= width_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let mut x = if secant && gb > ga {
            a - ga * (b - a) / (gb - ga)
        } else {
            mid
        };
        if !(x > a && x < b) {
            x = mid;
        }
        let gx = g(x);
        let moved_right_end = gx >= 0.0;
        if moved_right_end {
            b = x;
            gb = gx;
        } else {
            a = x;
            ga = gx;
        }

        if secant && b - a > width_tol {
            let probe = if moved_right_end {
                b - 0.5 * width_tol
            } else {
                a + 0.5 * width_tol
            };
            if probe > a && probe < b {
                let gp = g(probe);
                if gp >= 0.0 {
                    b = probe;
                    gb = gp;
                } else {
                    a = probe;
                    ga = gp;
                }
            }
        }
        secant = !secant;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_root() {
        let x = find_root_monotone(|x| x - 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn flat_slope_converges_by_bisection() {
        let x = find_root_monotone(|x: f64| x * x * x, -1.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn flat_segment_returns_leftmost_point() {
        // g == 0 on [0.3, 0.6]
        let g = |x: f64| {
            if x < 0.3 {
                x - 0.3
            } else if x <= 0.6 {
                0.0
            } else {
                x - 0.6
            }
        };
        let x = find_root_monotone(g, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-11);
    }

    #[test]
    fn step_function_returns_jump_location() {
        let x = find_root_monotone(|x: f64| if x < 0.25 { -1.0 } else { 1.0 }, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(x, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn zero_at_left_end_returns_left_end() {
        assert_eq!(find_root_monotone(|x| x, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(matches!(
            find_root_monotone(|x| x + 1.0, 0.0, 1.0, 1e-12),
            Err(Error::Bracket { .. })
        ));
        assert!(matches!(
            find_root_monotone(|x| x - 2.0, 0.0, 1.0, 1e-12),
            Err(Error::Bracket { .. })
        ));
    }
}
