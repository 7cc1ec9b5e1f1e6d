//! Orthographic point rasterization and space-time slices, written as 8-bit PGM.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor3::Vec3;

/// Intensity of the farthest particle; the nearest gets 255.
const FAR_INTENSITY: f64 = 55.0;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("row {row} outside image height {height}")]
    RowOutOfRange { row: usize, height: usize },
    #[error("no frames to slice")]
    NoFrames,
    #[error("invalid view: {0}")]
    InvalidView(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed PGM: {0}")]
    Pgm(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Camera looking along `axis` toward decreasing coordinates. The image
/// covers `[min, max]` on the two remaining axes; vertical image axis points
/// down in the second remaining axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct View {
    pub axis: Axis,
    pub width: usize,
    pub height: usize,
    pub min: Vec3,
    pub max: Vec3,
    /// Splat 3×3 pixels instead of 1.
    #[serde(default)]
    pub splat3: bool,
}

impl View {
    pub fn new(axis: Axis, width: usize, height: usize, min: Vec3, max: Vec3) -> Self {
        View { axis, width, height, min, max, splat3: false }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidView("image must be at least 1×1".into()));
        }
        if !(0..3).all(|a| self.max[a] > self.min[a]) {
            return Err(RenderError::InvalidView("view box must have positive extent".into()));
        }
        Ok(())
    }

    /// Horizontal, vertical and depth axes.
    pub fn axes(&self) -> (usize, usize, usize) {
        match self.axis {
            Axis::X => (2, 1, 0),
            Axis::Y => (0, 2, 1),
            Axis::Z => (0, 1, 2),
        }
    }

    /// Pixel containing `p`, or `None` when it projects outside the image.
    pub fn project(&self, p: Vec3) -> Option<(usize, usize)> {
        let (h, v, _) = self.axes();
        let u = (p[h] - self.min[h]) / (self.max[h] - self.min[h]);
        let w = (self.max[v] - p[v]) / (self.max[v] - self.min[v]);
        let col = (u * self.width as f64).floor();
        let row = (w * self.height as f64).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return None;
        }
        Some((col as usize, row as usize))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage { width, height, pixels: vec![0; width * height] }
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn lit_pixels(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > 0).count()
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self, RenderError> {
        let mut fields = Vec::with_capacity(4);
        let mut i = 0;
        while fields.len() < 4 {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if start == i {
                return Err(RenderError::Pgm("truncated header".into()));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
        }
        if fields[0] != "P5" {
            return Err(RenderError::Pgm(format!("magic {:?}", fields[0])));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| RenderError::Pgm(format!("bad number {s:?}")));
        let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval != 255 {
            return Err(RenderError::Pgm(format!("maxval {maxval} unsupported")));
        }
        let data = &bytes[(i + 1).min(bytes.len())..];
        if data.len() != width * height {
            return Err(RenderError::Pgm(format!("expected {} pixel bytes, found {}", width * height, data.len())));
        }
        Ok(GrayImage { width, height, pixels: data.to_vec() })
    }

    pub fn write_pgm(&self, path: &Path) -> Result<(), RenderError> {
        fs::write(path, self.to_pgm())?;
        Ok(())
    }

    pub fn read_pgm(path: &Path) -> Result<Self, RenderError> {
        Self::from_pgm(&fs::read(path)?)
    }
}

/// Projects `frame` into `view`. Each pixel keeps the nearest particle, with
/// brightness falling linearly from 255 at the near face of the view box to
/// 55 at the far face. Unlit pixels are 0.
pub fn rasterize_frame(frame: &[Vec3], view: &View) -> GrayImage {
    let mut img = GrayImage::new(view.width, view.height);
    let mut depth = vec![f64::INFINITY; view.width * view.height];
    let (_, _, d) = view.axes();
    let span = view.max[d] - view.min[d];
    let radius: isize = if view.splat3 { 1 } else { 0 };
    for &p in frame {
        let Some((col, row)) = view.project(p) else { continue };
        // Distance from the camera, which sits beyond `max` on the depth axis.
        let dist = ((view.max[d] - p[d]) / span).clamp(0.0, 1.0);
        let intensity = (255.0 - dist * (255.0 - FAR_INTENSITY)).round() as u8;
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                let (r, c) = (row as isize + dr, col as isize + dc);
                if r < 0 || c < 0 || r >= view.height as isize || c >= view.width as isize {
                    continue;
                }
                let k = r as usize * view.width + c as usize;
                if dist < depth[k] {
                    depth[k] = dist;
                    img.pixels[k] = intensity;
                }
            }
        }
    }
    img
}

/// Row `t` of the output is image row `row` of frame `t`.
pub fn spacetime_slice<F: AsRef<[Vec3]>>(frames: &[F], view: &View, row: usize) -> Result<GrayImage, RenderError> {
    if frames.is_empty() {
        return Err(RenderError::NoFrames);
    }
    if row >= view.height {
        return Err(RenderError::RowOutOfRange { row, height: view.height });
    }
    let mut out = GrayImage::new(view.width, frames.len());
    for (t, f) in frames.iter().enumerate() {
        let img = rasterize_frame(f.as_ref(), view);
        out.pixels[t * view.width..(t + 1) * view.width].copy_from_slice(img.row(row));
    }
    Ok(out)
}
