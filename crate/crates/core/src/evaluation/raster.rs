use crate::error::{Error, Result};

/// Binary mask over a `width x height` canvas. Pixel `(x, y)` is the unit
/// square centred on integer coordinates `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Distance from `p` to segment `a`-`b`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Marks every pixel whose centre lies within `line_width / 2` of the
/// polyline (round caps and joins).
pub fn rasterize_polyline(
    points: &[(f64, f64)],
    line_width: f64,
    width: usize,
    height: usize,
) -> Result<Mask> {
    if points.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "polyline needs at least 2 points, got {}",
            points.len()
        )));
    }
    let mut mask = Mask::new(width, height);
    if width == 0 || height == 0 {
        return Ok(mask);
    }
    let r = line_width / 2.0;
    let (wmax, hmax) = ((width - 1) as f64, (height - 1) as f64);
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let x_lo = (a.0.min(b.0) - r).ceil().max(0.0);
        let x_hi = (a.0.max(b.0) + r).floor().min(wmax);
        let y_lo = (a.1.min(b.1) - r).ceil().max(0.0);
        let y_hi = (a.1.max(b.1) + r).floor().min(hmax);
        if x_lo > x_hi || y_lo > y_hi {
            continue;
        }
        for y in y_lo as usize..=y_hi as usize {
            let row = &mut mask.bits[y * width..(y + 1) * width];
            for (x, cell) in row
                .iter_mut()
                .enumerate()
                .take(x_hi as usize + 1)
                .skip(x_lo as usize)
            {
                if !*cell && point_segment_distance((x as f64, y as f64), a, b) <= r {
                    *cell = true;
                }
            }
        }
    }
    Ok(mask)
}

/// `|A ∩ B| / |A ∪ B|`, zero when both are empty.
pub fn mask_iou(a: &Mask, b: &Mask) -> f64 {
    assert_eq!(
        (a.width, a.height),
        (b.width, b.height),
        "mask sizes differ"
    );
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.bits.iter().zip(&b.bits) {
        inter += usize::from(p && q);
        union += usize::from(p || q);
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}
