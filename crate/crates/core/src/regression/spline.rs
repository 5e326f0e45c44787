//! Interpolants `x(y)` through lane points, parameterized by image row.

use crate::extraction::LanePoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SplineError {
    #[error("{found} distinct rows, need at least {needed}")]
    TooFewKnots { found: usize, needed: usize },
}

/// Sorts by decreasing y and keeps the more confident point of any shared row.
fn distinct_rows<T: Scalar>(points: &[LanePoint<T>]) -> Vec<LanePoint<T>> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.y.partial_cmp(&a.y).unwrap());
    let mut out: Vec<LanePoint<T>> = Vec::with_capacity(sorted.len());
    for p in sorted {
        match out.last_mut() {
            Some(last) if last.y == p.y => {
                if p.confidence > last.confidence {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

/// C1 piecewise-quadratic interpolant. Knots run bottom to top (decreasing
/// y); segment `i` is `x_i + d_i (y - y_i) + a_i (y - y_i)^2` with `d_0` the
/// first secant and `d_{i+1} = 2 s_i - d_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpline<T> {
    knots: Vec<LanePoint<T>>,
    slopes: Vec<T>,
    curvatures: Vec<T>,
}

pub fn build_spline<T: Scalar>(points: &[LanePoint<T>]) -> Result<QuadraticSpline<T>, SplineError> {
    QuadraticSpline::new(points)
}

impl<T: Scalar> QuadraticSpline<T> {
    pub fn new(points: &[LanePoint<T>]) -> Result<Self, SplineError> {
        let knots = distinct_rows(points);
        if knots.len() < 3 {
            return Err(SplineError::TooFewKnots {
                found: knots.len(),
                needed: 3,
            });
        }
        let two = T::lit(2.0);
        let mut slopes = Vec::with_capacity(knots.len());
        let mut curvatures = Vec::with_capacity(knots.len() - 1);
        let secant = |i: usize| (knots[i + 1].x - knots[i].x) / (knots[i + 1].y - knots[i].y);
        let mut d = secant(0);
        for i in 0..knots.len() - 1 {
            let h = knots[i + 1].y - knots[i].y;
            let s = secant(i);
            slopes.push(d);
            curvatures.push((s - d) / h);
            d = two * s - d;
        }
        slopes.push(d);
        Ok(QuadraticSpline {
            knots,
            slopes,
            curvatures,
        })
    }

    /// Knots ordered by decreasing y.
    pub fn knots(&self) -> &[LanePoint<T>] {
        &self.knots
    }

    /// Lowest and highest knot rows.
    pub fn y_range(&self) -> (T, T) {
        (self.knots.last().unwrap().y, self.knots[0].y)
    }

    /// Segment index for `y` inside the knot range.
    fn segment(&self, y: T) -> usize {
        // knots are decreasing in y; a knot row starts its own segment
        let idx = self.knots.partition_point(|k| k.y >= y);
        idx.saturating_sub(1).min(self.knots.len() - 2)
    }

    pub fn eval(&self, y: T) -> T {
        let (lo, hi) = self.y_range();
        if y > hi {
            let k = &self.knots[0];
            return k.x + self.slopes[0] * (y - k.y);
        }
        if y <= lo {
            let n = self.knots.len() - 1;
            let k = &self.knots[n];
            return k.x + self.slopes[n] * (y - k.y);
        }
        let i = self.segment(y);
        let t = y - self.knots[i].y;
        self.knots[i].x + t * (self.slopes[i] + t * self.curvatures[i])
    }

    /// dx/dy at `y`.
    pub fn derivative(&self, y: T) -> T {
        let (lo, hi) = self.y_range();
        if y > hi {
            return self.slopes[0];
        }
        if y < lo {
            return *self.slopes.last().unwrap();
        }
        let i = self.segment(y);
        let t = y - self.knots[i].y;
        self.slopes[i] + T::lit(2.0) * self.curvatures[i] * t
    }

    /// Derivative at knot `i` approached from segment `seg`.
    pub fn knot_derivative_from(&self, seg: usize, i: usize) -> T {
        let t = self.knots[i].y - self.knots[seg].y;
        self.slopes[seg] + T::lit(2.0) * self.curvatures[seg] * t
    }
}

/// Natural cubic spline `x(y)`, extended linearly outside the knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline<T> {
    /// Knot rows, increasing.
    ys: Vec<T>,
    xs: Vec<T>,
    /// Second derivatives at the knots.
    m: Vec<T>,
}

impl<T: Scalar> CubicSpline<T> {
    /// Requires at least two distinct rows.
    pub fn new(points: &[LanePoint<T>]) -> Result<Self, SplineError> {
        let mut knots = distinct_rows(points);
        if knots.len() < 2 {
            return Err(SplineError::TooFewKnots {
                found: knots.len(),
                needed: 2,
            });
        }
        knots.reverse();
        let ys: Vec<T> = knots.iter().map(|k| k.y).collect();
        let xs: Vec<T> = knots.iter().map(|k| k.x).collect();
        let n = ys.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let two = T::lit(2.0);
            let six = T::lit(6.0);
            let h: Vec<T> = ys.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag = vec![T::zero(); n];
            let mut rhs = vec![T::zero(); n];
            for i in 1..n - 1 {
                diag[i] = two * (h[i - 1] + h[i]);
                rhs[i] = six * ((xs[i + 1] - xs[i]) / h[i] - (xs[i] - xs[i - 1]) / h[i - 1]);
            }
            for i in 2..n - 1 {
                let w = h[i - 1] / diag[i - 1];
                diag[i] = diag[i] - w * h[i - 1];
                rhs[i] = rhs[i] - w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let upper = if i + 1 < n - 1 {
                    h[i] * m[i + 1]
                } else {
                    T::zero()
                };
                m[i] = (rhs[i] - upper) / diag[i];
            }
        }
        Ok(CubicSpline { ys, xs, m })
    }

    pub fn y_range(&self) -> (T, T) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    /// Knots as `(x, y)`, increasing y.
    pub fn knots(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn end_slope(&self, i: usize, at_end: bool) -> T {
        let h = self.ys[i + 1] - self.ys[i];
        let six = T::lit(6.0);
        let s = (self.xs[i + 1] - self.xs[i]) / h;
        if at_end {
            s + h * (self.m[i] + T::lit(2.0) * self.m[i + 1]) / six
        } else {
            s - h * (T::lit(2.0) * self.m[i] + self.m[i + 1]) / six
        }
    }

    pub fn eval(&self, y: T) -> T {
        let n = self.ys.len();
        let (lo, hi) = self.y_range();
        if y < lo {
            return self.xs[0] + self.end_slope(0, false) * (y - lo);
        }
        if y > hi {
            return self.xs[n - 1] + self.end_slope(n - 2, true) * (y - hi);
        }
        let i = self
            .ys
            .partition_point(|&k| k <= y)
            .saturating_sub(1)
            .min(n - 2);
        let h = self.ys[i + 1] - self.ys[i];
        let a = (self.ys[i + 1] - y) / h;
        let b = (y - self.ys[i]) / h;
        let six = T::lit(6.0);
        a * self.xs[i]
            + b * self.xs[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(v: &[(f64, f64)]) -> Vec<LanePoint<f64>> {
        v.iter().map(|&(x, y)| LanePoint::new(x, y, 1.0)).collect()
    }

    /// Solves a 3x3 system by Cramer's rule.
    fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
        let det = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(a);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let mut m = a;
            for r in 0..3 {
                m[r][c] = b[r];
            }
            *o = det(m) / d;
        }
        out
    }

    #[test]
    fn three_knot_interpolant_matches_hermite_oracle() {
        // knots (x, y): (0,200), (10,150), (40,100)
        let s = build_spline(&kp(&[(0., 200.), (10., 150.), (40., 100.)])).unwrap();
        // Oracle: each piece x = c0 + c1 y + c2 y^2 through its two knots with the
        // incoming derivative prescribed; the first piece's derivative is the secant.
        let d0 = (10.0 - 0.0) / (150.0 - 200.0);
        let p0 = solve3(
            [
                [1., 200., 200. * 200.],
                [1., 150., 150. * 150.],
                [0., 1., 2. * 200.],
            ],
            [0., 10., d0],
        );
        let d1 = p0[1] + 2.0 * p0[2] * 150.0;
        let p1 = solve3(
            [
                [1., 150., 150. * 150.],
                [1., 100., 100. * 100.],
                [0., 1., 2. * 150.],
            ],
            [10., 40., d1],
        );
        let q = |p: [f64; 3], y: f64| p[0] + p[1] * y + p[2] * y * y;
        for y in [175.0, 160.0, 125.0, 110.0] {
            let expect = if y >= 150.0 { q(p0, y) } else { q(p1, y) };
            assert!(
                (s.eval(y) - expect).abs() < 1e-9,
                "y={y}: {} vs {expect}",
                s.eval(y)
            );
        }
        assert!((s.eval(125.0) - 20.0).abs() < 1e-9);
        for k in [(0., 200.), (10., 150.), (40., 100.)] {
            assert_eq!(s.eval(k.1), k.0);
        }
    }

    #[test]
    fn collinear_knots_stay_on_the_line() {
        let s = build_spline(&kp(&[(10., 280.), (13., 270.), (16., 260.), (19., 250.)])).unwrap();
        for y in (200..300).map(f64::from) {
            assert!((s.eval(y) - (10.0 + 0.3 * (280.0 - y))).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_extrapolation_beyond_knots() {
        let s = build_spline(&kp(&[(0., 200.), (10., 150.), (40., 100.)])).unwrap();
        let top_slope = s.derivative(100.0);
        assert!((s.eval(90.0) - (40.0 - 10.0 * top_slope)).abs() < 1e-9);
        assert!((s.eval(210.0) - (0.0 - 0.2 * 10.0)).abs() < 1e-9);
    }

    #[test]
    fn shared_rows_keep_the_stronger_point() {
        let p = vec![
            LanePoint::new(1.0, 10.0, 0.2),
            LanePoint::new(2.0, 10.0, 0.9),
            LanePoint::new(3.0, 5.0, 1.0),
        ];
        assert_eq!(
            build_spline(&p),
            Err(SplineError::TooFewKnots {
                found: 2,
                needed: 3
            })
        );
        let mut p = p;
        p.push(LanePoint::new(4.0, 0.0, 1.0));
        let s = build_spline(&p).unwrap();
        assert_eq!(s.eval(10.0), 2.0);
    }

    #[test]
    fn cubic_interpolates_and_is_natural() {
        let pts = kp(&[(0., 0.), (1., 1.), (4., 2.), (9., 3.), (16., 4.)]);
        let c = CubicSpline::new(&pts).unwrap();
        for p in &pts {
            assert!((c.eval(p.y) - p.x).abs() < 1e-12);
        }
        let line = CubicSpline::new(&kp(&[(0., 0.), (2., 1.)])).unwrap();
        assert_eq!(line.eval(0.5), 1.0);
        assert_eq!(line.eval(3.0), 6.0);
        assert!(CubicSpline::new(&kp(&[(0., 0.)])).is_err());
    }

    #[test]
    fn cubic_reproduces_lines_exactly() {
        let pts: Vec<_> = (0..6)
            .map(|i| LanePoint::new(3.0 + 0.5 * i as f64 * 20.0, 7.0 + 20.0 * i as f64, 1.0))
            .collect();
        let c = CubicSpline::new(&pts).unwrap();
        for y in [7.0, 15.0, 50.0, 99.5, 107.0] {
            assert!((c.eval(y) - (3.0 + 0.5 * (y - 7.0))).abs() < 1e-9);
        }
    }
}
