//! Straight/curved classification of extracted lane markings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::LanePoint;
use crate::regression::{CubicSpline, LineModel, QuadraticSpline};
use crate::scalar::Scalar;

/// Squared correlation of x and y: `Cov(X,Y)^2 / (Var(X) Var(Y))`.
///
/// Moments are accumulated relative to the first point, which keeps the
/// result exact for collinear points on the pixel lattice. Zero variance in
/// either coordinate (and fewer than two points) yields 1.
pub fn r_squared<T: Scalar>(points: &[LanePoint<T>]) -> T {
    if points.len() < 2 {
        return T::one();
    }
    let (x0, y0) = (points[0].x, points[0].y);
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for p in points {
        let (dx, dy) = (p.x - x0, p.y - y0);
        sx = sx + dx;
        sy = sy + dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    let m = T::from_count(points.len());
    let var_x = m * sxx - sx * sx;
    let var_y = m * syy - sy * sy;
    if var_x <= T::zero() || var_y <= T::zero() {
        return T::one();
    }
    let cov = m * sxy - sx * sy;
    (cov * cov / (var_x * var_y)).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    TooFewPoints,
    StraightCandidate,
    CurvedCandidate,
}

/// Compares r^2 of the whole marking with r^2 after dropping its `n`
/// topmost points (smallest y). Curves need at least `3n` points.
pub fn classify<T: Scalar>(points: &[LanePoint<T>], n: usize) -> Classification {
    if points.len() < n {
        return Classification::TooFewPoints;
    }
    if points.len() < 3 * n {
        return Classification::StraightCandidate;
    }
    let mut truncated = points.to_vec();
    truncated.sort_by(|a, b| b.y.partial_cmp(&a.y).unwrap());
    truncated.truncate(points.len() - n);
    // absorbs roundoff on collinear sets that are not lattice-exact
    let margin = T::epsilon() * T::lit(64.0);
    if r_squared(points) < r_squared(&truncated) - margin {
        Classification::CurvedCandidate
    } else {
        Classification::StraightCandidate
    }
}

/// A curve candidate is confirmed when at least `k` of the last `window`
/// frames, counting the current one, flagged it. `history` runs oldest to newest.
pub fn corroborate_curve(current: bool, history: &[bool], k: usize, window: usize) -> bool {
    if !current {
        return false;
    }
    let previous = window.saturating_sub(1);
    let start = history.len().saturating_sub(previous);
    1 + history[start..].iter().filter(|&&f| f).count() >= k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Minimum points for a straight lane; curves need `3n`.
    pub n: usize,
    /// Curve votes required ...
    pub k: usize,
    /// ... within this many recent frames.
    pub window: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            n: 3,
            k: 2,
            window: 3,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.window == 0 || self.k > self.window {
            return Err(Error::Config(format!(
                "classifier needs n > 0 and 0 < k <= window (n={}, k={}, window={})",
                self.n, self.k, self.window
            )));
        }
        Ok(())
    }
}

/// Image half a lane marking belongs to, judged at the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Bottom-row x against the image centre; the centre itself is Right.
    pub fn of_bottom_x(x: f64, width: usize) -> Side {
        if x < width as f64 / 2.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Geometry of a finished lane marking as a function `x(y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LaneShape<T> {
    Straight(LineModel<T>),
    Curved(QuadraticSpline<T>),
    /// Natural cubic through per-row maxima; produced by the baseline decoder.
    Cubic(CubicSpline<T>),
}

impl<T: Scalar> LaneShape<T> {
    pub fn x_at(&self, y: T) -> T {
        match self {
            LaneShape::Straight(l) => l.x_at(y),
            LaneShape::Curved(s) => s.eval(y),
            LaneShape::Cubic(s) => s.eval(y),
        }
    }

    pub fn is_curved(&self) -> bool {
        matches!(self, LaneShape::Curved(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LaneShape::Straight(LineModel::Sloped { .. }) => "straight",
            LaneShape::Straight(LineModel::Vertical { .. }) => "vertical",
            LaneShape::Curved(_) => "curved",
            LaneShape::Cubic(_) => "cubic",
        }
    }

    /// Inclusive row range drawn for a frame of the given height. Straight
    /// and quadratic lanes span the frame; the cubic covers its knots only.
    pub fn row_range(&self, height: usize) -> Option<(usize, usize)> {
        let last = height.checked_sub(1)?;
        match self {
            LaneShape::Cubic(s) => {
                let (lo, hi) = s.y_range();
                let lo = lo.as_f64().ceil().max(0.0) as usize;
                let hi = (hi.as_f64().floor().max(0.0) as usize).min(last);
                (lo <= hi).then_some((lo, hi))
            }
            _ => Some((0, last)),
        }
    }

    /// `(x, y)` at every row of [`Self::row_range`], bottom to top.
    pub fn polyline(&self, height: usize) -> Vec<(f64, f64)> {
        match self.row_range(height) {
            Some((lo, hi)) => (lo..=hi)
                .rev()
                .map(|y| (self.x_at(T::from_count(y)).as_f64(), y as f64))
                .collect(),
            None => Vec::new(),
        }
    }
}

/// A lane marking detected in one channel of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneMarking<T> {
    /// Extracted points, decreasing y.
    pub points: Vec<LanePoint<T>>,
    pub shape: LaneShape<T>,
    pub channel_id: usize,
    /// Set when the source channel is one the detector marks as a potential active lane.
    pub active_hint: bool,
    /// Raw classifier verdict before corroboration.
    pub curve_candidate: bool,
}

impl<T: Scalar> LaneMarking<T> {
    /// Root-mean-square confidence of the points.
    pub fn rms_confidence(&self) -> T {
        rms_confidence(&self.points)
    }
}

pub fn rms_confidence<T: Scalar>(points: &[LanePoint<T>]) -> T {
    if points.is_empty() {
        return T::zero();
    }
    (points
        .iter()
        .map(|p| p.confidence * p.confidence)
        .sum::<T>()
        / T::from_count(points.len()))
    .sqrt()
}
