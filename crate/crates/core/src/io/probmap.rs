//! Probability-map frames and their on-disk encodings.
//!
//! The raw encoding is a 16-byte header (`RNLD`, then little-endian `u32`
//! width, height and channel count) followed by channel-planar, row-major
//! little-endian `f32` confidences.

use std::path::Path;

use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 4] = b"RNLD";
pub const RAW_HEADER_LEN: usize = 16;

/// File formats accepted by [`load_probmap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMapFormat {
    RawF32,
    /// Single-channel 8-bit image; values map to `v / 255`.
    Gray8Image,
}

impl ProbMapFormat {
    /// Guesses the format from a file extension. Anything that is not a
    /// known image extension is treated as raw.
    pub fn from_path(path: &Path) -> Self {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("png") => ProbMapFormat::Gray8Image,
            _ => ProbMapFormat::RawF32,
        }
    }
}

/// One confidence grid, row-major, `width * height` values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Channel {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ValueOutOfRange { index, value });
        }
        Ok(Channel {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Channel {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Sets a value, clamping into `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        self.data[y * self.width + x] = value.clamp(0.0, 1.0);
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }

    pub fn fill(&mut self, value: f32) {
        self.data.fill(value.clamp(0.0, 1.0));
    }
}

/// Multi-channel probability map for one video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMapFrame {
    pub frame_id: u64,
    width: usize,
    height: usize,
    channels: Vec<Channel>,
}

impl ProbMapFrame {
    pub fn new(frame_id: u64, channels: Vec<Channel>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::DimensionMismatch("frame has no channels".into()))?;
        let (width, height) = (first.width, first.height);
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch("zero-sized channel".into()));
        }
        for (i, c) in channels.iter().enumerate() {
            if c.width != width || c.height != height {
                return Err(Error::DimensionMismatch(format!(
                    "channel {} is {}x{}, channel 0 is {}x{}",
                    i, c.width, c.height, width, height
                )));
            }
        }
        Ok(ProbMapFrame {
            frame_id,
            width,
            height,
            channels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [Channel] {
        &mut self.channels
    }

    pub fn with_frame_id(mut self, frame_id: u64) -> Self {
        self.frame_id = frame_id;
        self
    }
}

pub fn encode_raw(frame: &ProbMapFrame) -> Vec<u8> {
    let n = frame.width * frame.height * frame.channels.len();
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 4 * n);
    out.extend_from_slice(RAW_MAGIC);
    for v in [frame.width, frame.height, frame.channels.len()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for c in &frame.channels {
        for v in &c.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_raw(bytes: &[u8]) -> Result<ProbMapFrame> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "{} bytes is shorter than the 16-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != RAW_MAGIC {
        return Err(Error::MalformedHeader("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    let (width, height, channels) = (word(1), word(2), word(3));
    if width == 0 || height == 0 || channels == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}x{channels}"
        )));
    }
    let plane = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let expected = plane
        .checked_mul(channels)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let payload = &bytes[RAW_HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let channels = values
        .chunks_exact(plane)
        .enumerate()
        .map(|(ci, chunk)| {
            Channel::new(width, height, chunk.to_vec()).map_err(|e| match e {
                Error::ValueOutOfRange { index, value } => Error::ValueOutOfRange {
                    index: ci * plane + index,
                    value,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ProbMapFrame::new(0, channels)
}

/// Builds a channel from 8-bit gray levels.
pub fn channel_from_gray8(width: usize, height: usize, pixels: &[u8]) -> Result<Channel> {
    let data = pixels.iter().map(|&v| f32::from(v) / 255.0).collect();
    Channel::new(width, height, data)
}

fn load_gray8_channel(path: &Path) -> Result<Channel> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    channel_from_gray8(w as usize, h as usize, luma.as_raw())
}

/// Loads a frame from one file. Gray8 images yield a single channel; use
/// [`load_gray8_frame`] to assemble several.
pub fn load_probmap(path: &Path, format: ProbMapFormat) -> Result<ProbMapFrame> {
    match format {
        ProbMapFormat::RawF32 => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_raw(&bytes)
        }
        ProbMapFormat::Gray8Image => ProbMapFrame::new(0, vec![load_gray8_channel(path)?]),
    }
}

/// Assembles a multi-channel frame from an ordered list of gray images.
pub fn load_gray8_frame<P: AsRef<Path>>(frame_id: u64, paths: &[P]) -> Result<ProbMapFrame> {
    let channels = paths
        .iter()
        .map(|p| load_gray8_channel(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    ProbMapFrame::new(frame_id, channels)
}

pub fn save_raw(frame: &ProbMapFrame, path: &Path) -> Result<()> {
    std::fs::write(path, encode_raw(frame)).map_err(|e| Error::io(path, e))
}
