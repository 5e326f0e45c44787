//! Synthetic probability-map sequences with analytic ground truth.
//!
//! Each lane is drawn into its own channel as a Gaussian ridge along the
//! lane's centre line. Salt noise, dashed markings and whole-channel dropout
//! model the usual failure modes of real detector output.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{
    save_raw, write_lines_txt, ActivePair, Channel, Clip, GroundTruthFrame, Manifest,
    ManifestEntry, ProbMapFrame,
};
use crate::lane_model::Side;

/// Deterministic random stream for scenario rendering.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LaneCurve {
    /// `y = beta0 + beta1 x`, parameters drifting linearly per frame.
    Straight {
        beta0: f64,
        beta1: f64,
        #[serde(default)]
        beta0_drift: f64,
        #[serde(default)]
        beta1_drift: f64,
    },
    /// `x = x_bottom + slope t + quad t^2` with `t = (h - 1) - y`.
    Curved {
        x_bottom: f64,
        slope: f64,
        quad: f64,
        #[serde(default)]
        x_drift: f64,
    },
}

impl LaneCurve {
    /// Straight lane through `(x_bottom, h - 1)` and `(x_top, 0)`, shifting
    /// sideways by `x_drift` pixels per frame.
    pub fn straight_through(x_bottom: f64, x_top: f64, height: usize, x_drift: f64) -> Self {
        let bottom = (height - 1) as f64;
        let beta1 = -bottom / (x_top - x_bottom);
        let beta0 = bottom - beta1 * x_bottom;
        LaneCurve::Straight {
            beta0,
            beta1,
            beta0_drift: -x_drift * beta1,
            beta1_drift: 0.0,
        }
    }

    /// Centre-line x at row `y` in frame `frame` of a clip with `height` rows.
    pub fn x_at(&self, y: f64, frame: usize, height: usize) -> f64 {
        let f = frame as f64;
        match *self {
            LaneCurve::Straight {
                beta0,
                beta1,
                beta0_drift,
                beta1_drift,
            } => (y - (beta0 + beta0_drift * f)) / (beta1 + beta1_drift * f),
            LaneCurve::Curved {
                x_bottom,
                slope,
                quad,
                x_drift,
            } => {
                let t = (height - 1) as f64 - y;
                x_bottom + x_drift * f + slope * t + quad * t * t
            }
        }
    }
}

/// Painted segments of `duty * period` rows every `period` rows, measured
/// from the bottom row and advancing `phase_drift` rows per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dash {
    pub period: f64,
    pub duty: f64,
    #[serde(default)]
    pub phase_drift: f64,
}

impl Dash {
    fn painted(&self, t: f64, frame: usize) -> bool {
        let phase = (t + self.phase_drift * frame as f64).rem_euclid(self.period);
        phase < self.duty * self.period
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLane {
    pub channel: usize,
    /// Set for the two markings bounding the active lane.
    #[serde(default)]
    pub active: Option<Side>,
    pub curve: LaneCurve,
    #[serde(default)]
    pub dash: Option<Dash>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Probability that any one cell receives a salt pixel.
    pub density: f64,
    /// Confidence of a salt pixel.
    pub amplitude: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropout {
    pub frame: usize,
    /// Index into [`ScenarioSpec::lanes`]; that lane's channel is zeroed.
    pub lane: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    #[serde(default)]
    pub first_frame_id: u64,
    pub lanes: Vec<ScenarioLane>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub dropout: Vec<Dropout>,
    pub blur_sigma: f64,
    pub peak_confidence: f32,
}

impl ScenarioSpec {
    /// 20 frames at 800x288 with four channels: left and right active
    /// markings in channels 1 and 2, and a curved outer-right marking in
    /// channel 3.
    pub fn clean() -> Self {
        let (w, h) = (800, 288);
        ScenarioSpec {
            frames: 20,
            width: w,
            height: h,
            channels: 4,
            first_frame_id: 0,
            lanes: vec![
                ScenarioLane {
                    channel: 1,
                    active: Some(Side::Left),
                    curve: LaneCurve::straight_through(250.0, 370.0, h, 0.3),
                    dash: None,
                },
                ScenarioLane {
                    channel: 2,
                    active: Some(Side::Right),
                    curve: LaneCurve::straight_through(550.0, 430.0, h, 0.3),
                    dash: None,
                },
                ScenarioLane {
                    channel: 3,
                    active: None,
                    curve: LaneCurve::Curved {
                        x_bottom: 720.0,
                        slope: -0.3,
                        quad: -0.0015,
                        x_drift: 0.3,
                    },
                    dash: None,
                },
            ],
            noise: NoiseSpec::default(),
            dropout: Vec::new(),
            blur_sigma: 2.0,
            peak_confidence: 0.9,
        }
    }

    /// [`ScenarioSpec::clean`] with salt noise (density 0.002, amplitude
    /// 0.4), a dashed right marking and the left marking's channel dropped
    /// on five frames.
    pub fn degraded() -> Self {
        let mut spec = ScenarioSpec::clean();
        spec.noise = NoiseSpec {
            density: 0.002,
            amplitude: 0.4,
        };
        spec.lanes[1].dash = Some(Dash {
            period: 48.0,
            duty: 0.5,
            phase_drift: 7.0,
        });
        spec.dropout = [3, 7, 11, 14, 18]
            .iter()
            .map(|&frame| Dropout { frame, lane: 0 })
            .collect();
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.width == 0 || self.height < 2 || self.channels == 0 {
            return Err(Error::Config(
                "scenario needs frames, width, channels > 0 and height >= 2".into(),
            ));
        }
        if let Some(l) = self.lanes.iter().find(|l| l.channel >= self.channels) {
            return Err(Error::Config(format!(
                "lane channel {} out of range",
                l.channel
            )));
        }
        if let Some(d) = self
            .dropout
            .iter()
            .find(|d| d.frame >= self.frames || d.lane >= self.lanes.len())
        {
            return Err(Error::Config(format!(
                "dropout {d:?} references a missing frame or lane"
            )));
        }
        if !(0.0..=1.0).contains(&self.noise.density)
            || !(0.0..=1.0).contains(&self.noise.amplitude)
        {
            return Err(Error::Config(
                "noise density and amplitude must lie in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.peak_confidence) || self.blur_sigma < 0.0 {
            return Err(Error::Config(
                "peak confidence must lie in [0, 1], blur non-negative".into(),
            ));
        }
        for l in &self.lanes {
            if let Some(d) = &l.dash {
                if d.period.is_nan() || d.period <= 0.0 || !(0.0..=1.0).contains(&d.duty) {
                    return Err(Error::Config(
                        "dash needs period > 0 and duty in [0, 1]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn render_ridge(&self, channel: &mut Channel, lane: &ScenarioLane, frame: usize) {
        let (w, h) = (self.width, self.height);
        let sigma = self.blur_sigma;
        let reach = if sigma > 0.0 {
            (4.0 * sigma).ceil() as i64
        } else {
            0
        };
        for y in 0..h {
            let t = (h - 1 - y) as f64;
            if lane.dash.as_ref().is_some_and(|d| !d.painted(t, frame)) {
                continue;
            }
            let xc = lane.curve.x_at(y as f64, frame, h);
            let centre = xc.round() as i64;
            for x in centre - reach..=centre + reach {
                if x < 0 || x >= w as i64 {
                    continue;
                }
                let d = x as f64 - xc;
                let v = if sigma > 0.0 {
                    f64::from(self.peak_confidence) * (-d * d / (2.0 * sigma * sigma)).exp()
                } else {
                    f64::from(self.peak_confidence)
                } as f32;
                let (x, y) = (x as usize, y);
                if v > channel.get(x, y) {
                    channel.set(x, y, v);
                }
            }
        }
    }

    fn ground_truth(&self, frame: usize) -> GroundTruthFrame {
        let h = self.height;
        let lanes = self
            .lanes
            .iter()
            .map(|l| {
                (0..h)
                    .rev()
                    .map(|y| (l.curve.x_at(y as f64, frame, h), y as f64))
                    .collect()
            })
            .collect();
        let find = |side| self.lanes.iter().position(|l| l.active == Some(side));
        let pair = ActivePair {
            left: find(Side::Left),
            right: find(Side::Right),
        };
        let pair = (pair.left.is_some() || pair.right.is_some()).then_some(pair);
        GroundTruthFrame::new(self.first_frame_id + frame as u64, lanes, pair)
            .expect("analytic lanes are monotonic in y")
    }
}

/// Renders every frame of a scenario with its ground truth.
pub fn render_scenario(
    spec: &ScenarioSpec,
    seed: u64,
) -> Result<(Vec<ProbMapFrame>, Vec<GroundTruthFrame>)> {
    spec.validate()?;
    let mut rng = seeded_rng(seed);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut gts = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let mut channels = vec![Channel::zeros(spec.width, spec.height); spec.channels];
        for lane in &spec.lanes {
            spec.render_ridge(&mut channels[lane.channel], lane, f);
        }
        if spec.noise.density > 0.0 {
            for c in channels.iter_mut() {
                for y in 0..spec.height {
                    for x in 0..spec.width {
                        if rng.random::<f64>() < spec.noise.density
                            && spec.noise.amplitude > c.get(x, y)
                        {
                            c.set(x, y, spec.noise.amplitude);
                        }
                    }
                }
            }
        }
        for d in spec.dropout.iter().filter(|d| d.frame == f) {
            channels[spec.lanes[d.lane].channel].fill(0.0);
        }
        frames.push(ProbMapFrame::new(spec.first_frame_id + f as u64, channels)?);
        gts.push(spec.ground_truth(f));
    }
    Ok((frames, gts))
}

/// A rendered clip ready to be written to disk.
pub struct RenderedClip {
    pub name: String,
    pub frames: Vec<ProbMapFrame>,
    pub ground_truth: Vec<GroundTruthFrame>,
}

/// Writes raw frames, lines-format ground truth and a manifest under
/// `out_dir`; returns the manifest path.
pub fn write_dataset(clips: &[RenderedClip], out_dir: &Path) -> Result<PathBuf> {
    let frames_dir = out_dir.join("frames");
    let gt_dir = out_dir.join("gt");
    for d in [&frames_dir, &gt_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut manifest = Manifest::default();
    for clip in clips {
        let mut entries = Vec::with_capacity(clip.frames.len());
        for (frame, gt) in clip.frames.iter().zip(&clip.ground_truth) {
            let stem = format!("{}_{:06}", sanitize(&clip.name), frame.frame_id);
            let raw = frames_dir.join(format!("{stem}.rnld"));
            let txt = gt_dir.join(format!("{stem}.lines.txt"));
            save_raw(frame, &raw)?;
            write_lines_txt(gt, &txt)?;
            entries.push(ManifestEntry {
                frame_id: frame.frame_id,
                channels: vec![raw],
                ground_truth: Some(txt),
            });
        }
        manifest.clips.push(Clip {
            name: clip.name.clone(),
            frames: entries,
        });
    }
    let path = out_dir.join("manifest.txt");
    std::fs::write(&path, manifest.format(out_dir)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "clip".into()
    } else {
        s
    }
}
