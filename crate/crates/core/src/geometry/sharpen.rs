//! Removal of "flying pixels": disparities sitting on blurry depth edges are
//! replaced by the value of the nearest pixel that is not on an edge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::DisparityMap;
use crate::raster::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpenConfig {
    /// Pixels whose Sobel gradient magnitude exceeds this are flying.
    pub sobel_threshold: f32,
}

impl Default for SharpenConfig {
    fn default() -> Self {
        SharpenConfig {
            sobel_threshold: 3.0,
        }
    }
}

impl SharpenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sobel_threshold.is_finite() && self.sobel_threshold > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "sobel threshold must be positive, got {}",
                self.sobel_threshold
            )))
        }
    }
}

/// Gradient magnitude `sqrt(Gx² + Gy²)` of the 3×3 Sobel pair with replicate
/// borders. Invalid pixels contribute their stored value (0).
pub fn sobel_response(map: &DisparityMap) -> Grid<f32> {
    let (w, h) = map.dims();
    let v = map.values();
    let at = |x: isize, y: isize| -> f64 {
        let xx = x.clamp(0, w as isize - 1) as usize;
        let yy = y.clamp(0, h as isize - 1) as usize;
        v[yy * w + xx] as f64
    };
    Grid::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
        let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        (gx * gx + gy * gy).sqrt() as f32
    })
}

/// Single-pass sharpening. The flying set is computed once from the input;
/// each flying pixel takes the value of the Euclidean-nearest non-flying pixel,
/// ties going to the smaller row-major index. Non-flying pixels are copied
/// through unchanged.
pub fn sharpen_disparity(map: &DisparityMap, cfg: &SharpenConfig) -> Result<DisparityMap> {
    cfg.validate()?;
    let (w, h) = map.dims();
    let threshold = cfg.sobel_threshold;
    let flying: Vec<bool> = sobel_response(map)
        .data()
        .iter()
        .map(|&r| r > threshold)
        .collect();
    if flying.iter().all(|&f| f) {
        return Err(Error::Degenerate(
            "every pixel exceeds the sharpening threshold".into(),
        ));
    }

    let src = map.values();
    let src_valid = map.validity();
    let mut out = src.to_vec();
    let mut valid = src_valid.to_vec();
    out.par_chunks_mut(w)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, row_valid))| {
            for x in 0..w {
                if flying[y * w + x] {
                    let j = nearest_non_flying(&flying, w, h, x, y);
                    row[x] = src[j];
                    row_valid[x] = src_valid[j];
                }
            }
        });
    DisparityMap::with_validity(w, h, out, valid)
}

/// Expanding Chebyshev-ring search. Ring `r` only holds pixels with squared
/// distance `>= r²`, so the search stops once `r²` exceeds the best found.
fn nearest_non_flying(flying: &[bool], w: usize, h: usize, px: usize, py: usize) -> usize {
    let mut best: Option<(usize, usize)> = None;
    let consider = |x: usize, y: usize, best: &mut Option<(usize, usize)>| {
        let idx = y * w + x;
        if flying[idx] {
            return;
        }
        let dx = x.abs_diff(px);
        let dy = y.abs_diff(py);
        let cand = (dx * dx + dy * dy, idx);
        if best.map_or(true, |b| cand < b) {
            *best = Some(cand);
        }
    };
    let max_r = w.max(h);
    for r in 1..=max_r {
        if let Some((d2, _)) = best {
            if r * r > d2 {
                break;
            }
        }
        let x_lo = px.saturating_sub(r);
        let x_hi = (px + r).min(w - 1);
        if py >= r {
            for x in x_lo..=x_hi {
                consider(x, py - r, &mut best);
            }
        }
        if py + r < h {
            for x in x_lo..=x_hi {
                consider(x, py + r, &mut best);
            }
        }
        let y_lo = py.saturating_sub(r - 1);
        let y_hi = (py + r - 1).min(h - 1);
        for y in y_lo..=y_hi {
            if px >= r {
                consider(px - r, y, &mut best);
            }
            if px + r < w {
                consider(px + r, y, &mut best);
            }
        }
    }
    best.expect("at least one non-flying pixel").1
}
