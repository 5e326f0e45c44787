//! IoU accuracy of active-lane predictions against ground truth.
//!
//! Lanes are drawn as strips (16 px predicted, 30 px ground truth at an
//! 800 px frame width, scaled with the frame width). A ground-truth active
//! lane is a true positive at threshold `t` when the prediction on its side
//! overlaps it with IoU strictly above `t`.

mod baseline;
mod raster;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_decode, BaselineConfig};
pub use raster::{mask_iou, point_segment_distance, rasterize_polyline, Mask};

use crate::error::{Error, Result};
use crate::io::{GroundTruthFrame, Polyline};
use crate::lane_model::Side;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Frame width at which the line widths below apply.
    pub eval_width: f64,
    pub gt_line_width: f64,
    pub pred_line_width: f64,
    pub thresholds: Vec<f64>,
}

/// 0.30, 0.31, ..., 0.50.
pub fn default_thresholds() -> Vec<f64> {
    (30..=50).map(|i| f64::from(i) / 100.0).collect()
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            eval_width: 800.0,
            gt_line_width: 30.0,
            pred_line_width: 16.0,
            thresholds: default_thresholds(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() || self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "thresholds must be non-empty and strictly ascending".into(),
            ));
        }
        if !(self.eval_width > 0.0 && self.gt_line_width > 0.0 && self.pred_line_width > 0.0) {
            return Err(Error::Config("evaluation widths must be positive".into()));
        }
        Ok(())
    }

    pub fn line_widths(&self, frame_width: usize) -> (f64, f64) {
        let scale = frame_width as f64 / self.eval_width;
        (self.pred_line_width * scale, self.gt_line_width * scale)
    }
}

/// IoU of a predicted lane against a ground-truth lane on a
/// `frame_w x frame_h` canvas.
pub fn lane_iou(
    pred: &[(f64, f64)],
    gt: &[(f64, f64)],
    cfg: &EvalConfig,
    frame_w: usize,
    frame_h: usize,
) -> Result<f64> {
    let (pw, gw) = cfg.line_widths(frame_w);
    let a = rasterize_polyline(pred, pw, frame_w, frame_h)?;
    let b = rasterize_polyline(gt, gw, frame_w, frame_h)?;
    Ok(mask_iou(&a, &b))
}

/// Active-lane prediction for one frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FramePrediction {
    pub frame_id: u64,
    pub width: usize,
    pub height: usize,
    pub left: Option<Polyline>,
    pub right: Option<Polyline>,
}

impl FramePrediction {
    pub fn side(&self, side: Side) -> Option<&Polyline> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub n_tp: usize,
    pub n_gt: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideEval {
    pub side: Side,
    pub predicted: bool,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEval {
    pub frame_id: u64,
    pub lanes: Vec<SideEval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ThresholdRow>,
    pub frames: Vec<FrameEval>,
}

impl EvalReport {
    pub fn n_gt(&self) -> usize {
        self.rows.first().map_or(0, |r| r.n_gt)
    }

    /// Accuracy at the first configured threshold within 1e-9 of `t`.
    pub fn accuracy_at(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.threshold - t).abs() < 1e-9)
            .map(|r| r.accuracy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,n_tp,n_gt,accuracy\n");
        for r in &self.rows {
            writeln!(
                out,
                "{:.2},{},{},{:.6}",
                r.threshold, r.n_tp, r.n_gt, r.accuracy
            )
            .unwrap();
        }
        out
    }

    /// One line per threshold: `threshold n_tp n_gt accuracy`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            writeln!(
                out,
                "iou>{:.2}  tp={:<5} gt={:<5} accuracy={:.4}",
                r.threshold, r.n_tp, r.n_gt, r.accuracy
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Scores predictions against ground truth. Every ground-truth frame must
/// have a prediction with the same frame id; ground-truth frames without
/// lanes are skipped.
pub fn evaluate(
    preds: &[FramePrediction],
    gts: &[GroundTruthFrame],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    let mut by_id: HashMap<u64, &FramePrediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.frame_id, p).is_some() {
            return Err(Error::FrameMismatch(format!(
                "duplicate prediction for frame {}",
                p.frame_id
            )));
        }
    }
    let mut frames = Vec::new();
    for gt in gts {
        let pred = by_id.get(&gt.frame_id).ok_or_else(|| {
            Error::FrameMismatch(format!(
                "no prediction for ground-truth frame {}",
                gt.frame_id
            ))
        })?;
        if gt.lanes.is_empty() {
            continue;
        }
        let (left, right) = gt.active_lanes(pred.width);
        let mut lanes = Vec::new();
        for (side, gt_lane) in [(Side::Left, left), (Side::Right, right)] {
            let Some(gt_lane) = gt_lane else { continue };
            let (predicted, iou) = match pred.side(side) {
                Some(p) if p.len() >= 2 => {
                    (true, lane_iou(p, gt_lane, cfg, pred.width, pred.height)?)
                }
                _ => (false, 0.0),
            };
            lanes.push(SideEval {
                side,
                predicted,
                iou,
            });
        }
        frames.push(FrameEval {
            frame_id: gt.frame_id,
            lanes,
        });
    }
    let n_gt: usize = frames.iter().map(|f| f.lanes.len()).sum();
    let rows = cfg
        .thresholds
        .iter()
        .map(|&t| {
            let n_tp = frames
                .iter()
                .flat_map(|f| &f.lanes)
                .filter(|l| l.predicted && l.iou > t)
                .count();
            ThresholdRow {
                threshold: t,
                n_tp,
                n_gt,
                accuracy: if n_gt == 0 {
                    0.0
                } else {
                    n_tp as f64 / n_gt as f64
                },
            }
        })
        .collect();
    Ok(EvalReport { rows, frames })
}
