//! Reference decoder: the per-row maximum every twenty rows, joined by a
//! natural cubic spline.

use serde::{Deserialize, Serialize};

use crate::extraction::LanePoint;
use crate::io::ProbMapFrame;
use crate::lane_model::{LaneMarking, LaneShape};
use crate::regression::CubicSpline;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Row maxima must exceed this confidence.
    pub threshold: f32,
    pub row_step: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            threshold: 0.3,
            row_step: 20,
        }
    }
}

pub fn baseline_decode<T: Scalar>(
    frame: &ProbMapFrame,
    cfg: &BaselineConfig,
    active_channels: &[usize],
) -> Vec<LaneMarking<T>> {
    let h = frame.height();
    let mut lanes = Vec::new();
    for (ci, channel) in frame.channels().iter().enumerate() {
        let mut points = Vec::new();
        for y in (0..h).rev().step_by(cfg.row_step.max(1)) {
            let (x, c) = channel.row(y).iter().enumerate().fold(
                (0, f32::NEG_INFINITY),
                |(bx, bc), (x, &c)| if c > bc { (x, c) } else { (bx, bc) },
            );
            if c > cfg.threshold {
                points.push(LanePoint::new(
                    T::from_count(x),
                    T::from_count(y),
                    T::lit(f64::from(c)),
                ));
            }
        }
        let Ok(spline) = CubicSpline::new(&points) else {
            continue;
        };
        lanes.push(LaneMarking {
            points,
            shape: LaneShape::Cubic(spline),
            channel_id: ci,
            active_hint: active_channels.contains(&ci),
            curve_candidate: false,
        });
    }
    lanes
}
