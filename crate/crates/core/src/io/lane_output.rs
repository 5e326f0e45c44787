//! Per-frame lane output records (pretty-printed JSON with a fixed field order).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::LanePoint;
use crate::lane_model::{LaneShape, Side};
use crate::regression::{CubicSpline, LineModel, QuadraticSpline};
use crate::scalar::Scalar;

pub const LANE_OUTPUT_FORMAT: &str = "lanepost-lanes/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LaneModelRecord {
    Straight {
        beta0: f64,
        beta1: f64,
    },
    Vertical {
        x: f64,
    },
    /// Knots as `[x, y]`, bottom to top.
    Curved {
        knots: Vec<[f64; 2]>,
    },
    /// Knots as `[x, y]`, top to bottom.
    Cubic {
        knots: Vec<[f64; 2]>,
    },
}

impl LaneModelRecord {
    pub fn from_shape<T: Scalar>(shape: &LaneShape<T>) -> Self {
        match shape {
            LaneShape::Straight(LineModel::Sloped { beta0, beta1 }) => LaneModelRecord::Straight {
                beta0: beta0.as_f64(),
                beta1: beta1.as_f64(),
            },
            LaneShape::Straight(LineModel::Vertical { x }) => {
                LaneModelRecord::Vertical { x: x.as_f64() }
            }
            LaneShape::Curved(s) => LaneModelRecord::Curved {
                knots: s
                    .knots()
                    .iter()
                    .map(|k| [k.x.as_f64(), k.y.as_f64()])
                    .collect(),
            },
            LaneShape::Cubic(s) => LaneModelRecord::Cubic {
                knots: s.knots().map(|(x, y)| [x.as_f64(), y.as_f64()]).collect(),
            },
        }
    }

    pub fn to_shape<T: Scalar>(&self) -> Result<LaneShape<T>> {
        let knots = |k: &[[f64; 2]]| -> Vec<LanePoint<T>> {
            k.iter()
                .map(|&[x, y]| LanePoint::new(T::lit(x), T::lit(y), T::one()))
                .collect()
        };
        Ok(match self {
            LaneModelRecord::Straight { beta0, beta1 } => LaneShape::Straight(LineModel::Sloped {
                beta0: T::lit(*beta0),
                beta1: T::lit(*beta1),
            }),
            LaneModelRecord::Vertical { x } => {
                LaneShape::Straight(LineModel::Vertical { x: T::lit(*x) })
            }
            LaneModelRecord::Curved { knots: k } => LaneShape::Curved(
                QuadraticSpline::new(&knots(k)).map_err(|e| Error::LaneOutput(e.to_string()))?,
            ),
            LaneModelRecord::Cubic { knots: k } => LaneShape::Cubic(
                CubicSpline::new(&knots(k)).map_err(|e| Error::LaneOutput(e.to_string()))?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneRecord {
    pub side: Option<Side>,
    pub channel: Option<usize>,
    /// Carried over from an earlier frame rather than detected in this one.
    pub remembered: bool,
    pub model: LaneModelRecord,
    /// `[x, y]` at the requested rows.
    pub samples: Vec<[f64; 2]>,
}

impl LaneRecord {
    pub fn new<T: Scalar>(shape: &LaneShape<T>, rows: &[f64]) -> Self {
        LaneRecord {
            side: None,
            channel: None,
            remembered: false,
            model: LaneModelRecord::from_shape(shape),
            samples: rows
                .iter()
                .map(|&y| [shape.x_at(T::lit(y)).as_f64(), y])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLaneOutput {
    pub format: String,
    pub frame_id: u64,
    pub width: usize,
    pub height: usize,
    /// Active-lane pair: at most one left and one right record.
    pub active: Vec<LaneRecord>,
    /// Every lane finalized in this frame.
    pub detected: Vec<LaneRecord>,
}

impl FrameLaneOutput {
    pub fn new(frame_id: u64, width: usize, height: usize) -> Self {
        FrameLaneOutput {
            format: LANE_OUTPUT_FORMAT.to_string(),
            frame_id,
            width,
            height,
            active: Vec::new(),
            detected: Vec::new(),
        }
    }

    pub fn active_side(&self, side: Side) -> Option<&LaneRecord> {
        self.active.iter().find(|r| r.side == Some(side))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("lane output serializes");
        s.push('\n');
        s
    }
}

/// Rows `h - 1, h - 1 - step, ...` down to 0.
pub fn sample_rows(height: usize, step: usize) -> Vec<f64> {
    (0..height)
        .rev()
        .step_by(step.max(1))
        .map(|y| y as f64)
        .collect()
}

pub fn write_lane_output(output: &FrameLaneOutput, path: &Path) -> Result<()> {
    std::fs::write(path, output.to_json()).map_err(|e| Error::io(path, e))
}

pub fn read_lane_output(path: &Path) -> Result<FrameLaneOutput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let out: FrameLaneOutput = serde_json::from_str(&text)
        .map_err(|e| Error::LaneOutput(format!("{}: {e}", path.display())))?;
    if out.format != LANE_OUTPUT_FORMAT {
        return Err(Error::LaneOutput(format!(
            "unknown format {:?}",
            out.format
        )));
    }
    Ok(out)
}
