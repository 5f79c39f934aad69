//! Box-constrained Nelder-Mead in two dimensions.
//!
//! Trial points are clamped into the box, so every evaluated point is inside.

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub lower: Point,
    pub upper: Point,
    /// Offset of the two initial vertices from the start point.
    pub initial_step: f64,
    /// Stop once the spread of simplex values is at most this...
    pub f_tol: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub x_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub point: Point,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    fn clamp(&self, p: Point) -> Point {
        [
            p[0].clamp(self.lower[0], self.upper[0]),
            p[1].clamp(self.lower[1], self.upper[1]),
        ]
    }

    fn initial_vertex(&self, start: Point, axis: usize) -> Point {
        let mut p = start;
        p[axis] = if start[axis] + self.initial_step <= self.upper[axis] {
            start[axis] + self.initial_step
        } else {
            start[axis] - self.initial_step
        };
        self.clamp(p)
    }

    /// Minimizes `f` from `start`, whose value is already known, using at most
    /// `max_evaluations` further calls. The best point seen is returned.
    pub fn minimize<F>(&self, mut f: F, start: Point, start_value: f64, max_evaluations: usize) -> Minimum
    where
        F: FnMut(Point) -> f64,
    {
        let mut evaluations = 0;
        let mut best = (start, start_value);
        let mut eval = |p: Point, evaluations: &mut usize, best: &mut (Point, f64)| -> Option<f64> {
            if *evaluations >= max_evaluations {
                return None;
            }
            *evaluations += 1;
            let v = f(p);
            if v < best.1 {
                *best = (p, v);
            }
            Some(v)
        };

        let mut simplex: Vec<(Point, f64)> = vec![(start, start_value)];
        for axis in 0..2 {
            let p = self.initial_vertex(start, axis);
            match eval(p, &mut evaluations, &mut best) {
                Some(v) => simplex.push((p, v)),
                None => return finish(best, evaluations, false),
            }
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[2].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(p, _)| (p[0] - simplex[0].0[0]).hypot(p[1] - simplex[0].0[1]))
                .fold(0.0, f64::max);
            if spread.is_finite() && spread <= self.f_tol && size <= self.x_tol {
                return finish(best, evaluations, true);
            }

            let worst = simplex[2];
            let centroid = [
                0.5 * (simplex[0].0[0] + simplex[1].0[0]),
                0.5 * (simplex[0].0[1] + simplex[1].0[1]),
            ];
            let toward = |scale: f64, from: Point| -> Point {
                self.clamp([
                    centroid[0] + scale * (from[0] - centroid[0]),
                    centroid[1] + scale * (from[1] - centroid[1]),
                ])
            };

            let reflected = toward(-REFLECTION, worst.0);
            let Some(fr) = eval(reflected, &mut evaluations, &mut best) else {
                return finish(best, evaluations, false);
            };

            if fr < simplex[0].1 {
                let expanded = toward(-REFLECTION * EXPANSION, worst.0);
                let Some(fe) = eval(expanded, &mut evaluations, &mut best) else {
                    return finish(best, evaluations, false);
                };
                simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[1].1 {
                simplex[2] = (reflected, fr);
                continue;
            }

            let (contracted, threshold) = if fr < worst.1 {
                (toward(-REFLECTION * CONTRACTION, worst.0), fr)
            } else {
                (toward(CONTRACTION, worst.0), worst.1)
            };
            let Some(fc) = eval(contracted, &mut evaluations, &mut best) else {
                return finish(best, evaluations, false);
            };
            if fc < threshold {
                simplex[2] = (contracted, fc);
                continue;
            }

            let anchor = simplex[0].0;
            for vertex in simplex.iter_mut().skip(1) {
                let p = self.clamp([
                    anchor[0] + SHRINK * (vertex.0[0] - anchor[0]),
                    anchor[1] + SHRINK * (vertex.0[1] - anchor[1]),
                ]);
                let Some(v) = eval(p, &mut evaluations, &mut best) else {
                    return finish(best, evaluations, false);
                };
                *vertex = (p, v);
            }
        }
    }
}

fn finish(best: (Point, f64), evaluations: usize, converged: bool) -> Minimum {
    Minimum {
        point: best.0,
        value: best.1,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn solver() -> NelderMead {
        NelderMead {
            lower: [-5.0, -5.0],
            upper: [5.0, 5.0],
            initial_step: 1.0,
            f_tol: 1e-14,
            x_tol: 1e-8,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let f = |p: Point| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 2.0).powi(2);
        let m = solver().minimize(f, [0.0, 0.0], f([0.0, 0.0]), 1000);
        assert!(m.converged);
        assert_abs_diff_eq!(m.point[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(m.point[1], -2.0, epsilon = 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let f = |p: Point| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let m = solver().minimize(f, [-1.0, 1.0], f([-1.0, 1.0]), 5000);
        assert_abs_diff_eq!(m.point[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.point[1], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn stays_in_box() {
        let f = |p: Point| p[0] + p[1];
        let m = solver().minimize(f, [0.0, 0.0], 0.0, 500);
        assert_abs_diff_eq!(m.point[0], -5.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.point[1], -5.0, epsilon = 1e-6);
    }

    #[test]
    fn respects_budget_and_never_worsens() {
        let f = |p: Point| (p[0] - 1.0).powi(2) + (p[1] - 1.0).powi(2);
        let short = solver().minimize(f, [4.0, 4.0], f([4.0, 4.0]), 7);
        assert_eq!(short.evaluations, 7);
        assert!(!short.converged);
        let long = solver().minimize(f, [4.0, 4.0], f([4.0, 4.0]), 70);
        assert!(long.value <= short.value);
    }

    #[test]
    fn infinite_values_are_avoided() {
        let f = |p: Point| if p[0] < 0.0 { f64::INFINITY } else { (p[0] - 0.5).powi(2) + p[1] * p[1] };
        let m = solver().minimize(f, [2.0, 2.0], f([2.0, 2.0]), 2000);
        assert_abs_diff_eq!(m.point[0], 0.5, epsilon = 1e-3);
    }
}
