//! Escape-depth images of the sets `K_n`, connected-component counts of
//! their pixel masks, and binary grayscale export.

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::model::Model;
use crate::numerics::{NumericError, Rect};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("depth {needed} exceeds the {resolved} levels resolved by the model")]
    DepthTooLarge { needed: usize, resolved: usize },
    #[error("palette needs {needed} escape shades, got {got}")]
    Palette { needed: usize, got: usize },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A rectangle of the plane sampled at pixel centers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn new(x: (f64, f64), y: (f64, f64), width: usize, height: usize) -> Result<Window, RasterError> {
        let w = Window { x_min: x.0, x_max: x.1, y_min: y.0, y_max: y.1, width, height };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(RasterError::InvalidWindow("bounds must be finite".into()));
        }
        if !(self.x_min < self.x_max) {
            return Err(RasterError::InvalidWindow(format!("x_min {} must be below x_max {}", self.x_min, self.x_max)));
        }
        if !(self.y_min < self.y_max) {
            return Err(RasterError::InvalidWindow(format!("y_min {} must be below y_max {}", self.y_min, self.y_max)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RasterError::InvalidWindow("width and height must be positive".into()));
        }
        Ok(())
    }

    /// Center of column `i`: `((x_max + x_min) + (x_max - x_min)(2i + 1 - W)/W)/2`.
    /// The symmetric form makes mirrored pixels land on exactly negated
    /// coordinates.
    pub fn x_at(&self, i: usize, prec: u32) -> Float {
        center(self.x_min, self.x_max, 2 * i as i64 + 1 - self.width as i64, self.width, prec)
    }

    /// Center of row `j`, counted from the top.
    pub fn y_at(&self, j: usize, prec: u32) -> Float {
        center(self.y_min, self.y_max, self.height as i64 - 1 - 2 * j as i64, self.height, prec)
    }

    /// Row whose center lies exactly on the real axis, if any.
    pub fn real_row(&self) -> Option<usize> {
        (0..self.height).find(|&j| self.y_at(j, 128).is_zero())
    }
}

fn center(lo: f64, hi: f64, k: i64, n: usize, prec: u32) -> Float {
    let wide = prec.max(64) + 64;
    let sum = Float::with_val(wide, lo) + hi;
    let span = Float::with_val(wide, hi) - lo;
    let off = Float::with_val(wide, span * k) / n as u64;
    Float::with_val(prec, (sum + off) / 2u32)
}

/// Per-pixel number of sets `K_0, …, K_N` containing the pixel center, so
/// `N + 1` marks survival. Row-major, top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthGrid {
    pub window: Window,
    pub max_depth: usize,
    pub depths: Vec<u16>,
}

impl DepthGrid {
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.depths[j * self.window.width + i]
    }

    /// Pixel mask of `K_n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        self.depths.iter().map(|&d| d as usize > n).collect()
    }

    pub fn survived(&self) -> u16 {
        (self.max_depth + 1) as u16
    }
}

/// Escape depths over the window at the model's precision. Rows are split
/// across worker threads; each owns a disjoint slice of the output.
pub fn render_depth_grid(model: &Model, window: &Window, max_depth: usize) -> Result<DepthGrid, RasterError> {
    window.validate()?;
    if max_depth > model.horizon() {
        return Err(RasterError::DepthTooLarge { needed: max_depth, resolved: model.horizon() });
    }
    let prec = model.prec();
    let xs: Vec<Float> = (0..window.width).map(|i| window.x_at(i, prec)).collect();
    let mut depths = vec![0u16; window.width * window.height];
    depths.par_chunks_mut(window.width).enumerate().try_for_each(|(j, row)| -> Result<(), RasterError> {
        let y = window.y_at(j, prec);
        for (cell, x) in row.iter_mut().zip(&xs) {
            let z = Rect::new(x.clone(), y.clone());
            *cell = model.escape_depth(&z, max_depth)?.levels_survived() as u16;
        }
        Ok(())
    })?;
    Ok(DepthGrid { window: window.clone(), max_depth, depths })
}

/// Labels of the 4-connected components of a mask (0 for background,
/// components numbered from 1 in scan order) and their count.
pub fn label_components(mask: &[bool], width: usize, height: usize) -> (Vec<u32>, usize) {
    assert_eq!(mask.len(), width * height);
    let mut labels = vec![0u32; mask.len()];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (i, j) = (p % width, p / width);
            let mut visit = |q: usize| {
                if mask[q] && labels[q] == 0 {
                    labels[q] = count;
                    stack.push(q);
                }
            };
            if i > 0 {
                visit(p - 1);
            }
            if i + 1 < width {
                visit(p + 1);
            }
            if j > 0 {
                visit(p - width);
            }
            if j + 1 < height {
                visit(p + width);
            }
        }
    }
    (labels, count as usize)
}

/// Number of 4-connected components of the mask of `K_n`. Only meaningful
/// when the resolution separates the components; an empty mask gives 0.
pub fn count_components(grid: &DepthGrid, n: usize) -> usize {
    label_components(&grid.mask(n), grid.window.width, grid.window.height).1
}

/// Gray level for each depth: `escaped[d]` for points in exactly `d` sets,
/// `survived` for points in all of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Palette {
    pub escaped: Vec<u8>,
    pub survived: u8,
}

impl Palette {
    /// Black outside the disk, bands lightening with depth, a dark interior.
    pub fn default_for(max_depth: usize) -> Palette {
        let mut escaped = vec![0u8];
        for d in 1..=max_depth {
            let span = (max_depth.max(2) - 1) as f64;
            escaped.push((96.0 + 128.0 * (d - 1) as f64 / span).round() as u8);
        }
        Palette { escaped, survived: 32 }
    }

    fn shade(&self, depth: u16, max_depth: usize) -> u8 {
        if depth as usize > max_depth {
            self.survived
        } else {
            self.escaped[depth as usize]
        }
    }
}

/// Binary grayscale image: header `P5 <width> <height> 255` and a newline,
/// then one byte per pixel, top row first.
pub fn write_image(grid: &DepthGrid, palette: &Palette) -> Result<Vec<u8>, RasterError> {
    if palette.escaped.len() < grid.max_depth + 1 {
        return Err(RasterError::Palette { needed: grid.max_depth + 1, got: palette.escaped.len() });
    }
    let header = format!("P5 {} {} 255\n", grid.window.width, grid.window.height);
    let mut out = Vec::with_capacity(header.len() + grid.depths.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(grid.depths.iter().map(|&d| palette.shade(d, grid.max_depth)));
    Ok(out)
}
