//! Ground-truth lane polylines in the per-frame text dialect (one lane per
//! line, whitespace separated `x y` pairs) and the h-samples JSON dialect.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Ordered `(x, y)` pixel coordinates.
pub type Polyline = Vec<(f64, f64)>;

/// x value marking "no lane at this row" in the h-samples dialect.
pub const HSAMPLES_SENTINEL: f64 = -2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundTruthFormat {
    LinesTxt,
    HSamplesJson,
}

impl GroundTruthFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => GroundTruthFormat::HSamplesJson,
            _ => GroundTruthFormat::LinesTxt,
        }
    }
}

/// Indices into [`GroundTruthFrame::lanes`] of the markings bounding the active lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActivePair {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub frame_id: u64,
    /// Each polyline runs bottom to top (strictly decreasing y).
    pub lanes: Vec<Polyline>,
    pub active_pair: Option<ActivePair>,
}

impl GroundTruthFrame {
    pub fn new(
        frame_id: u64,
        lanes: Vec<Polyline>,
        active_pair: Option<ActivePair>,
    ) -> Result<Self> {
        let lanes = lanes
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                normalize_polyline(l).map_err(|m| Error::GroundTruth(format!("lane {i}: {m}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(pair) = active_pair.filter(|_| !lanes.is_empty()) {
            for idx in [pair.left, pair.right].into_iter().flatten() {
                if idx >= lanes.len() {
                    return Err(Error::GroundTruth(format!(
                        "active lane index {idx} out of range ({} lanes)",
                        lanes.len()
                    )));
                }
            }
        }
        let active_pair = if lanes.is_empty() { None } else { active_pair };
        Ok(GroundTruthFrame {
            frame_id,
            lanes,
            active_pair,
        })
    }

    pub fn with_frame_id(mut self, frame_id: u64) -> Self {
        self.frame_id = frame_id;
        self
    }

    /// Active lane polylines. When the file carries no explicit pair, the
    /// nearest lane on each side of the image centre at the bottom row is used.
    pub fn active_lanes(&self, frame_width: usize) -> (Option<&Polyline>, Option<&Polyline>) {
        let pair = self
            .active_pair
            .unwrap_or_else(|| infer_active_pair(&self.lanes, frame_width as f64 / 2.0));
        (
            pair.left.map(|i| &self.lanes[i]),
            pair.right.map(|i| &self.lanes[i]),
        )
    }
}

fn infer_active_pair(lanes: &[Polyline], centre: f64) -> ActivePair {
    let mut pair = ActivePair::default();
    let mut best_left = f64::NEG_INFINITY;
    let mut best_right = f64::INFINITY;
    for (i, lane) in lanes.iter().enumerate() {
        let x = lane[0].0;
        if x < centre {
            if x > best_left {
                best_left = x;
                pair.left = Some(i);
            }
        } else if x < best_right {
            best_right = x;
            pair.right = Some(i);
        }
    }
    pair
}

fn normalize_polyline(mut points: Polyline) -> std::result::Result<Polyline, String> {
    if points.len() < 2 {
        return Err(format!("{} valid points, need at least 2", points.len()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    let decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    let increasing = points.windows(2).all(|w| w[1].1 > w[0].1);
    if increasing {
        points.reverse();
    } else if !decreasing {
        return Err("y is not strictly monotonic".into());
    }
    Ok(points)
}

fn parse_index(tok: &str) -> Result<Option<usize>> {
    if tok == "-" {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| Error::GroundTruth(format!("bad active lane index {tok:?}")))
}

/// Parses the lines dialect. A comment line `# active <left> <right>` (with
/// `-` for an absent side) records the active pair; other `#` lines are ignored.
pub fn parse_lines_txt(text: &str) -> Result<GroundTruthFrame> {
    let mut lanes = Vec::new();
    let mut active = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let toks: Vec<&str> = comment.split_whitespace().collect();
            if toks.first() == Some(&"active") {
                if toks.len() != 3 {
                    return Err(Error::GroundTruth(format!(
                        "line {}: expected `# active <left> <right>`",
                        lineno + 1
                    )));
                }
                active = Some(ActivePair {
                    left: parse_index(toks[1])?,
                    right: parse_index(toks[2])?,
                });
            }
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::GroundTruth(format!("line {}: {e}", lineno + 1)))?;
        if values.len() % 2 != 0 {
            return Err(Error::GroundTruth(format!(
                "line {}: odd number of coordinates",
                lineno + 1
            )));
        }
        lanes.push(values.chunks_exact(2).map(|p| (p[0], p[1])).collect());
    }
    GroundTruthFrame::new(0, lanes, active)
}

#[derive(Deserialize)]
struct HSamplesRecord {
    lanes: Vec<Vec<f64>>,
    h_samples: Vec<f64>,
    #[serde(default)]
    frame_id: Option<u64>,
    #[serde(default)]
    active_pair: Option<[Option<usize>; 2]>,
}

pub fn parse_hsamples_json(text: &str) -> Result<GroundTruthFrame> {
    let rec: HSamplesRecord =
        serde_json::from_str(text).map_err(|e| Error::GroundTruth(e.to_string()))?;
    let mut lanes = Vec::with_capacity(rec.lanes.len());
    for (i, xs) in rec.lanes.iter().enumerate() {
        if xs.len() != rec.h_samples.len() {
            return Err(Error::GroundTruth(format!(
                "lane {i} has {} x values for {} h_samples",
                xs.len(),
                rec.h_samples.len()
            )));
        }
        lanes.push(
            xs.iter()
                .zip(&rec.h_samples)
                .filter(|(x, _)| **x != HSAMPLES_SENTINEL)
                .map(|(&x, &y)| (x, y))
                .collect(),
        );
    }
    let active = rec
        .active_pair
        .map(|[left, right]| ActivePair { left, right });
    GroundTruthFrame::new(rec.frame_id.unwrap_or(0), lanes, active)
}

pub fn load_ground_truth(path: &Path, format: GroundTruthFormat) -> Result<GroundTruthFrame> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = match format {
        GroundTruthFormat::LinesTxt => parse_lines_txt(&text),
        GroundTruthFormat::HSamplesJson => parse_hsamples_json(&text),
    };
    parsed.map_err(|e| Error::GroundTruth(format!("{}: {e}", path.display())))
}

pub fn format_lines_txt(gt: &GroundTruthFrame) -> String {
    let mut out = String::new();
    if let Some(pair) = gt.active_pair {
        let side = |s: Option<usize>| s.map_or_else(|| "-".to_string(), |i| i.to_string());
        writeln!(out, "# active {} {}", side(pair.left), side(pair.right)).unwrap();
    }
    for lane in &gt.lanes {
        let line: Vec<String> = lane.iter().map(|(x, y)| format!("{x} {y}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn write_lines_txt(gt: &GroundTruthFrame, path: &Path) -> Result<()> {
    std::fs::write(path, format_lines_txt(gt)).map_err(|e| Error::io(path, e))
}
