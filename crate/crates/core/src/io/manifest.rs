//! Frame manifests.
//!
//! ```text
//! # comment
//! clip highway-03
//! 0 frames/0000.rnld gt=gt/0000.txt
//! 1 frames/0001_c0.png frames/0001_c1.png
//! ```
//!
//! Each frame line is a frame id followed by channel paths (one raw file, or
//! one gray image per channel) and an optional `gt=` ground-truth file.
//! `clip <name>` starts a new clip; frames before any clip line belong to an
//! unnamed clip. Relative paths resolve against the manifest's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::ground_truth::{load_ground_truth, GroundTruthFormat, GroundTruthFrame};
use crate::io::probmap::{load_gray8_frame, load_probmap, ProbMapFormat, ProbMapFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub frame_id: u64,
    pub channels: Vec<PathBuf>,
    pub ground_truth: Option<PathBuf>,
}

impl ManifestEntry {
    pub fn load_frame(&self) -> Result<ProbMapFrame> {
        let first = &self.channels[0];
        match ProbMapFormat::from_path(first) {
            ProbMapFormat::RawF32 => {
                if self.channels.len() != 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "frame {}: raw frames take exactly one file",
                        self.frame_id
                    )));
                }
                Ok(load_probmap(first, ProbMapFormat::RawF32)?.with_frame_id(self.frame_id))
            }
            ProbMapFormat::Gray8Image => load_gray8_frame(self.frame_id, &self.channels),
        }
    }

    pub fn load_ground_truth(&self) -> Result<Option<GroundTruthFrame>> {
        self.ground_truth
            .as_ref()
            .map(|p| {
                load_ground_truth(p, GroundTruthFormat::from_path(p))
                    .map(|g| g.with_frame_id(self.frame_id))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub name: String,
    pub frames: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub clips: Vec<Clip>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut clips: Vec<Clip> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Manifest {
                line: i + 1,
                message,
            };
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap();
            if head == "clip" {
                let name = toks.collect::<Vec<_>>().join(" ");
                clips.push(Clip {
                    name,
                    frames: Vec::new(),
                });
                continue;
            }
            let frame_id: u64 = head
                .parse()
                .map_err(|_| err(format!("expected frame id, found {head:?}")))?;
            let mut channels = Vec::new();
            let mut ground_truth = None;
            for tok in toks {
                if let Some(gt) = tok.strip_prefix("gt=") {
                    ground_truth = Some(base_dir.join(gt));
                } else {
                    channels.push(base_dir.join(tok));
                }
            }
            if channels.is_empty() {
                return Err(err(format!("frame {frame_id} lists no channel files")));
            }
            if clips.is_empty() {
                clips.push(Clip {
                    name: String::new(),
                    frames: Vec::new(),
                });
            }
            clips.last_mut().unwrap().frames.push(ManifestEntry {
                frame_id,
                channels,
                ground_truth,
            });
        }
        clips.retain(|c| !c.frames.is_empty());
        Ok(Manifest { clips })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Manifest::parse(&text, base)
    }

    /// Serializes with paths made relative to `base_dir` where possible.
    pub fn format(&self, base_dir: &Path) -> String {
        let rel = |p: &Path| -> String {
            p.strip_prefix(base_dir)
                .unwrap_or(p)
                .to_string_lossy()
                .into_owned()
        };
        let mut out = String::new();
        for clip in &self.clips {
            writeln!(out, "clip {}", clip.name).unwrap();
            for f in &clip.frames {
                write!(out, "{}", f.frame_id).unwrap();
                for c in &f.channels {
                    write!(out, " {}", rel(c)).unwrap();
                }
                if let Some(gt) = &f.ground_truth {
                    write!(out, " gt={}", rel(gt)).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn frame_count(&self) -> usize {
        self.clips.iter().map(|c| c.frames.len()).sum()
    }
}
