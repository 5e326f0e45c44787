//! Per-frame orchestration: extract, classify, construct, track, select.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    baseline_decode, evaluate, BaselineConfig, EvalConfig, EvalReport, FramePrediction,
};
use crate::extraction::{extract_lane_points, ExtractionConfig};
use crate::io::{
    read_lane_output, sample_rows, write_lane_output, FrameLaneOutput, GroundTruthFrame,
    LaneRecord, Manifest, ProbMapFrame,
};
use crate::lane_model::{
    classify, rms_confidence, Classification, ClassifierConfig, LaneShape, Side,
};
use crate::regression::{build_spline, fit_straight, FitError, LineModel, RegressionConfig};
use crate::scalar::Scalar;
use crate::tracker::{LaneStats, Observation, Tracker, TrackerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Roneld,
    Baseline,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roneld" => Ok(Mode::Roneld),
            "baseline" => Ok(Mode::Baseline),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?} (roneld or baseline)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Channels the detector marks as potential active-lane markings.
    pub active_channels: Vec<usize>,
    /// Row spacing of the samples written to lane output files.
    pub output_row_step: usize,
    pub extraction: ExtractionConfig,
    pub classifier: ClassifierConfig,
    pub regression: RegressionConfig,
    pub tracker: TrackerConfig,
    pub eval: EvalConfig,
    pub baseline: BaselineConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Roneld,
            active_channels: vec![1, 2],
            output_row_step: 1,
            extraction: ExtractionConfig::default(),
            classifier: ClassifierConfig::default(),
            regression: RegressionConfig::default(),
            tracker: TrackerConfig::default(),
            eval: EvalConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.extraction.validate()?;
        self.classifier.validate()?;
        self.regression.validate()?;
        self.tracker.validate()?;
        self.eval.validate()?;
        if self.output_row_step == 0 || self.baseline.row_step == 0 {
            return Err(Error::Config("row steps must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text` (may be empty), then applies `key.path=value`
    /// overrides. Values are read as TOML, falling back to a bare string.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            set_path(&mut table, key.trim(), parse_value(value.trim()))?;
        }
        let cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Config(format!("empty key in {key:?}")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key:?}: {p:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Wall time of each stage of one frame, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub extract_us: f64,
    pub classify_us: f64,
    pub construct_us: f64,
    pub track_us: f64,
    pub select_us: f64,
    pub total_us: f64,
}

/// An active-lane marking as output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveLane<T> {
    pub side: Side,
    pub shape: LaneShape<T>,
    pub channel_id: usize,
    /// Not detected in this frame; output from tracker memory.
    pub remembered: bool,
    /// `(x, y)` at every image row the shape covers, bottom to top.
    pub polyline: Vec<(f64, f64)>,
}

/// A lane finalized in the current frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedLane<T> {
    pub shape: LaneShape<T>,
    pub channel_id: usize,
    pub curve_candidate: bool,
    pub lane_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult<T> {
    pub frame_id: u64,
    pub width: usize,
    pub height: usize,
    pub left: Option<ActiveLane<T>>,
    pub right: Option<ActiveLane<T>>,
    pub detected: Vec<DetectedLane<T>>,
    pub timings: StageTimings,
}

impl<T: Scalar> FrameResult<T> {
    pub fn active(&self, side: Side) -> Option<&ActiveLane<T>> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    pub fn prediction(&self) -> FramePrediction {
        FramePrediction {
            frame_id: self.frame_id,
            width: self.width,
            height: self.height,
            left: self.left.as_ref().map(|l| l.polyline.clone()),
            right: self.right.as_ref().map(|l| l.polyline.clone()),
        }
    }

    pub fn lane_output(&self, row_step: usize) -> FrameLaneOutput {
        let rows = sample_rows(self.height, row_step);
        let mut out = FrameLaneOutput::new(self.frame_id, self.width, self.height);
        for lane in [&self.left, &self.right].into_iter().flatten() {
            let rows: Vec<f64> = match lane.shape.row_range(self.height) {
                Some((lo, hi)) => rows
                    .iter()
                    .copied()
                    .filter(|&y| y >= lo as f64 && y <= hi as f64)
                    .collect(),
                None => Vec::new(),
            };
            let mut r = LaneRecord::new(&lane.shape, &rows);
            r.side = Some(lane.side);
            r.channel = Some(lane.channel_id);
            r.remembered = lane.remembered;
            out.active.push(r);
        }
        for d in &self.detected {
            let mut r = LaneRecord::new(&d.shape, &rows);
            r.channel = Some(d.channel_id);
            out.detected.push(r);
        }
        out
    }
}

fn micros(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e6
}

/// One video stream: configuration plus tracker state.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    cfg: PipelineConfig,
    tracker: Tracker<T>,
    dims: Option<(usize, usize)>,
}

impl<T: Scalar> Pipeline<T> {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let tracker = Tracker::new(cfg.tracker.clone(), cfg.classifier.clone());
        Ok(Pipeline {
            cfg,
            tracker,
            dims: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn tracker(&self) -> &Tracker<T> {
        &self.tracker
    }

    /// Forgets all tracked lanes, as at the start of a new clip.
    pub fn reset(&mut self) {
        self.tracker.reset();
        self.dims = None;
    }

    pub fn process_frame(&mut self, frame: &ProbMapFrame) -> Result<FrameResult<T>> {
        let dims = (frame.width(), frame.height());
        match self.dims {
            Some(d) if d != dims => {
                return Err(Error::DimensionMismatch(format!(
                    "frame {} is {}x{}, stream is {}x{}",
                    frame.frame_id, dims.0, dims.1, d.0, d.1
                )))
            }
            _ => self.dims = Some(dims),
        }
        match self.cfg.mode {
            Mode::Roneld => Ok(self.process_roneld(frame)),
            Mode::Baseline => Ok(self.process_baseline(frame)),
        }
    }

    fn process_roneld(&mut self, frame: &ProbMapFrame) -> FrameResult<T> {
        let (w, h) = (frame.width(), frame.height());
        let start = Instant::now();
        let mut timings = StageTimings::default();

        let t = Instant::now();
        let extracted: Vec<_> = frame
            .channels()
            .iter()
            .map(|c| extract_lane_points::<T>(c, &self.cfg.extraction))
            .collect();
        timings.extract_us = micros(t);

        let t = Instant::now();
        let classes: Vec<Classification> = extracted
            .iter()
            .map(|p| classify(p, self.cfg.classifier.n))
            .collect();
        timings.classify_us = micros(t);

        let t = Instant::now();
        let mut observations = Vec::new();
        for (ci, (points, class)) in extracted.iter().zip(&classes).enumerate() {
            if *class == Classification::TooFewPoints {
                continue;
            }
            let straight = match fit_straight(points, &self.cfg.regression) {
                Ok(fit) => Some(LaneShape::Straight(fit.line())),
                Err(FitError::Vertical { x }) => {
                    Some(LaneShape::Straight(LineModel::Vertical { x }))
                }
                Err(_) => None,
            };
            let curved = match class {
                Classification::CurvedCandidate => build_spline(points).ok().map(LaneShape::Curved),
                _ => None,
            };
            if straight.is_none() && curved.is_none() {
                continue;
            }
            observations.push(Observation {
                straight,
                curved,
                stats: LaneStats {
                    rms_confidence: rms_confidence(points),
                    point_count: points.len(),
                },
                active_hint: self.cfg.active_channels.contains(&ci),
                channel_id: ci,
            });
        }
        timings.construct_us = micros(t);

        let t = Instant::now();
        let finalized = self.tracker.step(&observations, w, h);
        timings.track_us = micros(t);

        let t = Instant::now();
        let (left, right) = self.tracker.select_active();
        let to_active = |l: &crate::tracker::TrackedLane<T>, side| ActiveLane {
            side,
            shape: l.params.clone(),
            channel_id: l.channel_id,
            remembered: l.miss_count > 0,
            polyline: l.params.polyline(h),
        };
        let left = left.map(|l| to_active(l, Side::Left));
        let right = right.map(|l| to_active(l, Side::Right));
        timings.select_us = micros(t);
        timings.total_us = micros(start);

        let detected = finalized
            .into_iter()
            .map(|f| {
                let obs = &observations[f.observation];
                DetectedLane {
                    shape: f.shape,
                    channel_id: obs.channel_id,
                    curve_candidate: obs.is_curve_candidate(),
                    lane_id: Some(f.lane_id),
                }
            })
            .collect();
        FrameResult {
            frame_id: frame.frame_id,
            width: w,
            height: h,
            left,
            right,
            detected,
            timings,
        }
    }

    fn process_baseline(&mut self, frame: &ProbMapFrame) -> FrameResult<T> {
        let (w, h) = (frame.width(), frame.height());
        let start = Instant::now();
        let mut timings = StageTimings::default();
        let t = Instant::now();
        let markings = baseline_decode::<T>(frame, &self.cfg.baseline, &self.cfg.active_channels);
        timings.construct_us = micros(t);

        let t = Instant::now();
        // Same ranking as a tracker that has only ever seen this frame.
        let bottom = T::from_count(h.saturating_sub(1));
        let mut best: HashMap<Side, (T, usize)> = HashMap::new();
        for (i, m) in markings.iter().enumerate() {
            let psi = if m.active_hint {
                self.cfg.tracker.psi_active
            } else {
                self.cfg.tracker.psi_inactive
            };
            let weight = T::lit(psi) * m.rms_confidence() * T::from_count(m.points.len());
            let side = Side::of_bottom_x(m.shape.x_at(bottom).as_f64(), w);
            if best.get(&side).is_none_or(|&(bw, _)| weight > bw) {
                best.insert(side, (weight, i));
            }
        }
        let pick = |side| {
            best.get(&side).map(|&(_, i)| {
                let m = &markings[i];
                ActiveLane {
                    side,
                    shape: m.shape.clone(),
                    channel_id: m.channel_id,
                    remembered: false,
                    polyline: m.shape.polyline(h),
                }
            })
        };
        let (left, right) = (pick(Side::Left), pick(Side::Right));
        timings.select_us = micros(t);
        timings.total_us = micros(start);
        let detected = markings
            .into_iter()
            .map(|m| DetectedLane {
                shape: m.shape,
                channel_id: m.channel_id,
                curve_candidate: false,
                lane_id: None,
            })
            .collect();
        FrameResult {
            frame_id: frame.frame_id,
            width: w,
            height: h,
            left,
            right,
            detected,
            timings,
        }
    }
}

/// Per-frame processing time statistics in milliseconds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimingSummary {
    pub frames: usize,
    pub mean_ms: f64,
    /// Population variance across frames.
    pub variance_ms2: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
    pub stage_mean_us: StageTimings,
}

impl TimingSummary {
    pub fn from_timings(timings: &[StageTimings]) -> Self {
        if timings.is_empty() {
            return TimingSummary::default();
        }
        let n = timings.len() as f64;
        let mut ms: Vec<f64> = timings.iter().map(|t| t.total_us / 1000.0).collect();
        let mean = ms.iter().sum::<f64>() / n;
        let variance = ms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        ms.sort_by(f64::total_cmp);
        let pct = |p: f64| ms[((p * n).ceil() as usize).clamp(1, ms.len()) - 1];
        let avg = |f: fn(&StageTimings) -> f64| timings.iter().map(f).sum::<f64>() / n;
        TimingSummary {
            frames: timings.len(),
            mean_ms: mean,
            variance_ms2: variance,
            p50_ms: pct(0.5),
            p99_ms: pct(0.99),
            max_ms: ms[ms.len() - 1],
            stage_mean_us: StageTimings {
                extract_us: avg(|t| t.extract_us),
                classify_us: avg(|t| t.classify_us),
                construct_us: avg(|t| t.construct_us),
                track_us: avg(|t| t.track_us),
                select_us: avg(|t| t.select_us),
                total_us: avg(|t| t.total_us),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    /// Also write a PNG per frame with the lanes drawn over the probability map.
    pub overlay: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub clips: usize,
    pub frames: usize,
    pub lane_files: Vec<PathBuf>,
    pub timing: TimingSummary,
    pub eval: Option<EvalReport>,
}

/// Results of running the pipeline over in-memory clips.
pub struct ClipRun<T> {
    pub results: Vec<Vec<FrameResult<T>>>,
}

impl<T: Scalar> ClipRun<T> {
    pub fn predictions(&self) -> Vec<FramePrediction> {
        self.results
            .iter()
            .flatten()
            .map(FrameResult::prediction)
            .collect()
    }

    pub fn timings(&self) -> Vec<StageTimings> {
        self.results.iter().flatten().map(|r| r.timings).collect()
    }
}

/// Runs one stream per clip over preloaded frames, resetting the tracker
/// between clips.
pub fn run_clips<T: Scalar>(
    clips: &[Vec<ProbMapFrame>],
    cfg: &PipelineConfig,
) -> Result<ClipRun<T>> {
    let mut pipeline = Pipeline::<T>::new(cfg.clone())?;
    let mut results = Vec::with_capacity(clips.len());
    for clip in clips {
        pipeline.reset();
        results.push(
            clip.iter()
                .map(|f| pipeline.process_frame(f))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(ClipRun { results })
}

fn file_stem(clip: &str, frame_id: u64) -> String {
    let clip: String = clip
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if clip.is_empty() {
        format!("{frame_id:06}")
    } else {
        format!("{clip}_{frame_id:06}")
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Processes every frame of a manifest. Writes `lanes/*.json`,
/// `timing.json`, optionally `overlay/*.png`, and `eval.json` / `eval.csv`
/// when every frame has ground truth.
pub fn run_dataset<T: Scalar>(
    manifest_path: &Path,
    cfg: &PipelineConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<RunSummary> {
    let manifest = Manifest::load(manifest_path)?;
    let mut pipeline = Pipeline::<T>::new(cfg.clone())?;
    let lanes_dir = out_dir.join("lanes");
    let overlay_dir = out_dir.join("overlay");
    create_dir(&lanes_dir)?;
    if opts.overlay {
        create_dir(&overlay_dir)?;
    }
    let mut timings = Vec::new();
    let mut preds = Vec::new();
    let mut gts: Vec<GroundTruthFrame> = Vec::new();
    let mut all_gt = true;
    let mut lane_files = Vec::new();
    for clip in &manifest.clips {
        pipeline.reset();
        for entry in &clip.frames {
            let frame = entry.load_frame()?;
            let result = pipeline.process_frame(&frame)?;
            let stem = file_stem(&clip.name, frame.frame_id);
            let path = lanes_dir.join(format!("{stem}.json"));
            write_lane_output(&result.lane_output(cfg.output_row_step), &path)?;
            lane_files.push(path);
            if opts.overlay {
                let png = overlay_dir.join(format!("{stem}.png"));
                render_overlay(&frame, &result, &cfg.eval)
                    .save(&png)
                    .map_err(|e| Error::Image {
                        path: png.clone(),
                        message: e.to_string(),
                    })?;
            }
            timings.push(result.timings);
            preds.push(result.prediction());
            match entry.load_ground_truth()? {
                Some(gt) => gts.push(gt),
                None => all_gt = false,
            }
        }
    }
    let timing = TimingSummary::from_timings(&timings);
    let timing_path = out_dir.join("timing.json");
    std::fs::write(
        &timing_path,
        serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n",
    )
    .map_err(|e| Error::io(&timing_path, e))?;
    let eval = if all_gt && !gts.is_empty() {
        let report = evaluate(&preds, &gts, &cfg.eval)?;
        write_report(&report, out_dir)?;
        Some(report)
    } else {
        None
    };
    Ok(RunSummary {
        clips: manifest.clips.len(),
        frames: preds.len(),
        lane_files,
        timing,
        eval,
    })
}

pub fn write_report(report: &EvalReport, out_dir: &Path) -> Result<()> {
    let json = out_dir.join("eval.json");
    std::fs::write(&json, report.to_json()).map_err(|e| Error::io(&json, e))?;
    let csv = out_dir.join("eval.csv");
    std::fs::write(&csv, report.to_csv()).map_err(|e| Error::io(&csv, e))
}

/// Reads lane output files from `pred_dir` as active-lane predictions.
pub fn load_predictions(pred_dir: &Path) -> Result<Vec<FramePrediction>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(pred_dir)
        .map_err(|e| Error::io(pred_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let out = read_lane_output(p)?;
            let poly = |side| {
                out.active_side(side)
                    .map(|r| r.samples.iter().map(|&[x, y]| (x, y)).collect::<Vec<_>>())
            };
            Ok(FramePrediction {
                frame_id: out.frame_id,
                width: out.width,
                height: out.height,
                left: poly(Side::Left),
                right: poly(Side::Right),
            })
        })
        .collect()
}

/// Scores a directory of lane output files against a manifest's ground truth.
pub fn evaluate_dir(manifest_path: &Path, pred_dir: &Path, cfg: &EvalConfig) -> Result<EvalReport> {
    let manifest = Manifest::load(manifest_path)?;
    let mut gts = Vec::new();
    for entry in manifest.clips.iter().flat_map(|c| &c.frames) {
        let gt = entry.load_ground_truth()?.ok_or_else(|| {
            Error::FrameMismatch(format!(
                "frame {} has no ground truth in the manifest",
                entry.frame_id
            ))
        })?;
        gts.push(gt);
    }
    evaluate(&load_predictions(pred_dir)?, &gts, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub repeats: usize,
    pub warmup: usize,
    pub timing: TimingSummary,
}

/// Times `process_frame` over preloaded frames. One warmup pass precedes
/// `repeats` measured passes; file I/O is excluded.
pub fn bench_frames<T: Scalar>(
    clips: &[Vec<ProbMapFrame>],
    cfg: &PipelineConfig,
    repeats: usize,
) -> Result<BenchReport> {
    let warmup = 1;
    run_clips::<T>(clips, cfg)?;
    let mut timings = Vec::new();
    for _ in 0..repeats.max(1) {
        timings.extend(run_clips::<T>(clips, cfg)?.timings());
    }
    Ok(BenchReport {
        repeats: repeats.max(1),
        warmup,
        timing: TimingSummary::from_timings(&timings),
    })
}

pub fn bench<T: Scalar>(
    manifest_path: &Path,
    cfg: &PipelineConfig,
    repeats: usize,
) -> Result<BenchReport> {
    let manifest = Manifest::load(manifest_path)?;
    let clips = manifest
        .clips
        .iter()
        .map(|c| {
            c.frames
                .iter()
                .map(|e| e.load_frame())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    bench_frames::<T>(&clips, cfg, repeats)
}

/// Probability-map maximum as a gray background, active lanes in red (left)
/// and green (right), other detections in blue.
pub fn render_overlay<T: Scalar>(
    frame: &ProbMapFrame,
    result: &FrameResult<T>,
    eval: &EvalConfig,
) -> image::RgbImage {
    let (w, h) = (frame.width(), frame.height());
    let mut img = image::RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = frame
            .channels()
            .iter()
            .map(|c| c.get(x as usize, y as usize))
            .fold(0.0f32, f32::max);
        let g = (v * 255.0).round() as u8;
        image::Rgb([g, g, g])
    });
    let half = (eval.line_widths(w).0 / 4.0).max(1.0).round() as i64;
    let mut draw = |poly: &[(f64, f64)], color: [u8; 3]| {
        for &(x, y) in poly {
            let (cx, cy) = (x.round() as i64, y.round() as i64);
            for px in cx - half..=cx + half {
                if px >= 0 && (px as usize) < w && cy >= 0 && (cy as usize) < h {
                    img.put_pixel(px as u32, cy as u32, image::Rgb(color));
                }
            }
        }
    };
    for d in &result.detected {
        draw(&d.shape.polyline(h), [60, 120, 255]);
    }
    if let Some(l) = &result.left {
        draw(&l.polyline, [255, 40, 40]);
    }
    if let Some(r) = &result.right {
        draw(&r.polyline, [40, 220, 40]);
    }
    img
}
