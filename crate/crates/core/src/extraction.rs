//! Lane point extraction from a single probability-map channel.
//!
//! A channel is scanned bottom to top. The first salient cell (confidence
//! above the adaptive threshold) seeds the lane; each following point is the
//! strongest salient cell in a window of `h / 20` rows above the last point
//! and `w / 2` columns centred on it. The window that reaches row 0 is the
//! last one searched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Channel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanePoint<T> {
    pub x: T,
    pub y: T,
    pub confidence: T,
}

impl<T: Scalar> LanePoint<T> {
    pub fn new(x: T, y: T, confidence: T) -> Self {
        LanePoint { x, y, confidence }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Fraction of the channel maximum used as the salience threshold.
    pub alpha: f32,
    /// Absolute confidence floor.
    pub tau_min: f32,
    /// Window height is `h / row_step_divisor` rows.
    pub row_step_divisor: usize,
    /// Window width is `w / col_span_divisor` columns, centred on the last point.
    pub col_span_divisor: usize,
    /// Empty windows tolerated before a re-seed is attempted.
    pub reseed_gap_windows: usize,
    pub max_reseeds: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            alpha: 0.5,
            tau_min: 0.1,
            row_step_divisor: 20,
            col_span_divisor: 2,
            reseed_gap_windows: 3,
            max_reseeds: 1,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.tau_min) {
            return Err(Error::Config(format!(
                "tau_min {} not in [0, 1)",
                self.tau_min
            )));
        }
        if self.row_step_divisor == 0 || self.col_span_divisor == 0 {
            return Err(Error::Config("window divisors must be positive".into()));
        }
        Ok(())
    }

    pub fn window_rows(&self, height: usize) -> usize {
        (height / self.row_step_divisor).max(1)
    }

    /// Columns searched on each side of the last accepted point.
    pub fn half_span(&self, width: usize) -> usize {
        (width / self.col_span_divisor) / 2
    }
}

/// `max(tau_min, alpha * max confidence)`.
pub fn adaptive_threshold(channel: &Channel, cfg: &ExtractionConfig) -> f32 {
    cfg.tau_min.max(cfg.alpha * channel.max())
}

/// Strongest salient cell of the first row (scanning upward from `from_y`)
/// that has one. Ties go to the smaller x.
fn find_seed(channel: &Channel, threshold: f32, from_y: usize) -> Option<(usize, usize)> {
    (0..=from_y).rev().find_map(|y| {
        let mut best: Option<(usize, f32)> = None;
        for (x, &c) in channel.row(y).iter().enumerate() {
            if c > threshold && best.is_none_or(|(_, b)| c > b) {
                best = Some((x, c));
            }
        }
        best.map(|(x, _)| (x, y))
    })
}

/// Strongest salient cell in rows `top..=bottom`, columns `left..=right`.
/// Ties go to the smaller y, then the smaller x.
fn window_peak(
    channel: &Channel,
    threshold: f32,
    (top, bottom): (usize, usize),
    (left, right): (usize, usize),
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f32)> = None;
    for y in top..=bottom {
        let row = &channel.row(y)[left..=right];
        for (i, &c) in row.iter().enumerate() {
            if c > threshold && best.is_none_or(|(_, _, b)| c > b) {
                best = Some((left + i, y, c));
            }
        }
    }
    best.map(|(x, y, _)| (x, y))
}

pub fn extract_lane_points<T: Scalar>(
    channel: &Channel,
    cfg: &ExtractionConfig,
) -> Vec<LanePoint<T>> {
    let (w, h) = (channel.width(), channel.height());
    let threshold = adaptive_threshold(channel, cfg);
    let Some(seed) = find_seed(channel, threshold, h - 1) else {
        return Vec::new();
    };

    let win_h = cfg.window_rows(h);
    let half = cfg.half_span(w);
    let point = |(x, y): (usize, usize)| {
        LanePoint::new(
            T::from_count(x),
            T::from_count(y),
            T::lit(f64::from(channel.get(x, y))),
        )
    };

    let mut points = vec![point(seed)];
    let (mut cx, mut cursor) = seed;
    let mut empty_windows = 0;
    let mut reseeds_left = cfg.max_reseeds;

    while cursor > 0 {
        let top = cursor.saturating_sub(win_h);
        let cols = (cx.saturating_sub(half), (cx + half).min(w - 1));
        match window_peak(channel, threshold, (top, cursor - 1), cols) {
            Some(found) => {
                points.push(point(found));
                if top == 0 {
                    break;
                }
                (cx, cursor) = found;
                empty_windows = 0;
            }
            None => {
                empty_windows += 1;
                cursor = top;
                if empty_windows > cfg.reseed_gap_windows {
                    if reseeds_left == 0 || cursor == 0 {
                        break;
                    }
                    let Some(found) = find_seed(channel, threshold, cursor - 1) else {
                        break;
                    };
                    reseeds_left -= 1;
                    points.push(point(found));
                    (cx, cursor) = found;
                    empty_windows = 0;
                }
            }
        }
    }
    points
}
