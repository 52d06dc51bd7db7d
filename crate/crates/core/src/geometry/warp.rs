//! Forward warping of the left view into a synthesized right view.
//!
//! Every left pixel is pushed `D` pixels to the left along its row. When
//! several sources land on one target the nearer surface (greater disparity)
//! wins; targets nothing lands on are holes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{DisparityMap, Image};
use crate::raster::{Grid, Mask};

/// Contributions more than this many pixels of disparity behind the nearest
/// contribution at a target are treated as occluded (linear mode).
pub const OCCLUSION_MARGIN: f64 = 1.0;

/// Targets whose surviving splat weight is below this are holes.
pub const MIN_SPLAT_WEIGHT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpMode {
    /// Round the target column; greatest disparity wins, then greatest
    /// source column.
    Nearest,
    /// Two-tap splat with a disparity z-buffer and occlusion margin.
    #[default]
    Linear,
}

#[derive(Clone, Debug)]
pub struct WarpResult {
    /// Warped colours; hole pixels are black.
    pub right: Image,
    pub holes: Mask,
    /// Accepted splat weight per target pixel.
    pub coverage: Grid<f32>,
    /// Disparity of the surface visible at each right pixel (invalid at holes).
    pub right_disparity: DisparityMap,
}

struct RowOut {
    rgb: Vec<f32>,
    weight: Vec<f32>,
    disparity: Vec<f32>,
    hole: Vec<bool>,
}

pub fn forward_warp(left: &Image, disparity: &DisparityMap, mode: WarpMode) -> Result<WarpResult> {
    Error::check_dims("disparity", disparity.dims(), left.dims())?;
    let (w, h) = left.dims();
    let rows: Vec<RowOut> = (0..h)
        .into_par_iter()
        .map(|y| {
            let rgb = &left.data()[y * w * 3..(y + 1) * w * 3];
            let d = &disparity.values()[y * w..(y + 1) * w];
            let valid = &disparity.validity()[y * w..(y + 1) * w];
            match mode {
                WarpMode::Nearest => warp_row_nearest(rgb, d, valid),
                WarpMode::Linear => warp_row_linear(rgb, d, valid),
            }
        })
        .collect();

    let mut rgb = Vec::with_capacity(w * h * 3);
    let mut weight = Vec::with_capacity(w * h);
    let mut disp = Vec::with_capacity(w * h);
    let mut hole = Vec::with_capacity(w * h);
    for r in rows {
        rgb.extend(r.rgb);
        weight.extend(r.weight);
        disp.extend(r.disparity);
        hole.extend(r.hole);
    }
    let disp_valid: Vec<bool> = hole.iter().map(|&hh| !hh).collect();
    Ok(WarpResult {
        right: Image::from_raw_clamped(w, h, rgb),
        holes: Grid::from_vec(w, h, hole)?,
        coverage: Grid::from_vec(w, h, weight)?,
        right_disparity: DisparityMap::with_validity(w, h, disp, disp_valid)?,
    })
}

fn warp_row_nearest(rgb: &[f32], d: &[f32], valid: &[bool]) -> RowOut {
    let w = d.len();
    // (disparity, source column) of the current winner
    let mut winner: Vec<Option<(f32, usize)>> = vec![None; w];
    for x in 0..w {
        if !valid[x] {
            continue;
        }
        let t = (x as f64 - d[x] as f64).round();
        if t < 0.0 || t >= w as f64 {
            continue;
        }
        let slot = &mut winner[t as usize];
        // sources arrive in increasing x, so >= hands ties to the larger x
        if slot.map_or(true, |(bd, _)| d[x] >= bd) {
            *slot = Some((d[x], x));
        }
    }
    let mut out = RowOut {
        rgb: vec![0.0; w * 3],
        weight: vec![0.0; w],
        disparity: vec![0.0; w],
        hole: vec![true; w],
    };
    for (t, win) in winner.iter().enumerate() {
        if let Some((dv, sx)) = *win {
            out.rgb[t * 3..t * 3 + 3].copy_from_slice(&rgb[sx * 3..sx * 3 + 3]);
            out.weight[t] = 1.0;
            out.disparity[t] = dv;
            out.hole[t] = false;
        }
    }
    out
}

fn warp_row_linear(rgb: &[f32], d: &[f32], valid: &[bool]) -> RowOut {
    let w = d.len();
    let splats = |x: usize| -> [(isize, f64); 2] {
        let t = x as f64 - d[x] as f64;
        let base = t.floor();
        let frac = t - base;
        [(base as isize, 1.0 - frac), (base as isize + 1, frac)]
    };
    let in_row = |t: isize, wt: f64| wt > 0.0 && t >= 0 && (t as usize) < w;

    let mut nearest = vec![f64::NEG_INFINITY; w];
    for x in (0..w).filter(|&x| valid[x]) {
        for (t, wt) in splats(x) {
            if in_row(t, wt) {
                let slot = &mut nearest[t as usize];
                *slot = slot.max(d[x] as f64);
            }
        }
    }

    let mut acc_w = vec![0f64; w];
    let mut acc_c = vec![[0f64; 3]; w];
    let mut acc_d = vec![0f64; w];
    for x in (0..w).filter(|&x| valid[x]) {
        let dx = d[x] as f64;
        for (t, wt) in splats(x) {
            if !in_row(t, wt) {
                continue;
            }
            let t = t as usize;
            if dx < nearest[t] - OCCLUSION_MARGIN {
                continue;
            }
            acc_w[t] += wt;
            acc_d[t] += wt * dx;
            for c in 0..3 {
                acc_c[t][c] += wt * rgb[x * 3 + c] as f64;
            }
        }
    }

    let mut out = RowOut {
        rgb: vec![0.0; w * 3],
        weight: vec![0.0; w],
        disparity: vec![0.0; w],
        hole: vec![true; w],
    };
    for t in 0..w {
        out.weight[t] = acc_w[t] as f32;
        if acc_w[t] >= MIN_SPLAT_WEIGHT {
            for c in 0..3 {
                out.rgb[t * 3 + c] = (acc_c[t][c] / acc_w[t]) as f32;
            }
            out.disparity[t] = (acc_d[t] / acc_w[t]) as f32;
            out.hole[t] = false;
        }
    }
    out
}

/// Per-pixel weights over integer disparity planes `0..planes`, stored
/// sparsely (zero weights are dropped).
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWeights {
    width: usize,
    height: usize,
    planes: usize,
    offsets: Vec<usize>,
    entries: Vec<(u16, f32)>,
}

impl PlaneWeights {
    /// `data` holds `planes` weights per pixel, pixels in row-major order.
    pub fn from_dense(width: usize, height: usize, planes: usize, data: &[f32]) -> Result<Self> {
        if planes == 0 || planes > u16::MAX as usize + 1 {
            return Err(Error::InvalidValue(format!(
                "unsupported plane count {planes}"
            )));
        }
        if data.len() != width * height * planes {
            return Err(Error::InvalidValue(format!(
                "plane weights length {} does not match {width}x{height}x{planes}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidValue(format!(
                "plane weights must be finite and non-negative, found {bad}"
            )));
        }
        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for px in data.chunks_exact(planes) {
            for (k, &wt) in px.iter().enumerate() {
                if wt > 0.0 {
                    entries.push((k as u16, wt));
                }
            }
            offsets.push(entries.len());
        }
        Ok(PlaneWeights {
            width,
            height,
            planes,
            offsets,
            entries,
        })
    }

    /// One-hot encoding at `round(d)` clamped to `[0, planes - 1]`. Invalid
    /// pixels carry no weight.
    pub fn one_hot(map: &DisparityMap, planes: usize) -> Self {
        assert!(planes >= 1 && planes <= u16::MAX as usize + 1);
        let mut offsets = Vec::with_capacity(map.values().len() + 1);
        let mut entries = Vec::with_capacity(map.values().len());
        offsets.push(0);
        for (&d, &ok) in map.values().iter().zip(map.validity()) {
            if ok {
                let k = (d.round() as usize).min(planes - 1);
                entries.push((k as u16, 1.0));
            }
            offsets.push(entries.len());
        }
        PlaneWeights {
            width: map.width(),
            height: map.height(),
            planes,
            offsets,
            entries,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    fn pixel(&self, i: usize) -> &[(u16, f32)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }
}

#[derive(Clone, Debug)]
pub struct PlaneWarpResult {
    pub right: Image,
    pub holes: Mask,
    /// Weighted mean plane index landing on each right pixel.
    pub right_disparity: DisparityMap,
}

/// Shifts each plane's weighted image and weight map left by its disparity
/// and normalises: `Σ_k shift_k(w_k ⊙ I) / Σ_k shift_k(w_k)`. There is no
/// z-buffering; collisions are averaged by weight.
pub fn warp_disparity_plane_stack(left: &Image, weights: &PlaneWeights) -> Result<PlaneWarpResult> {
    Error::check_dims("plane weights", weights.dims(), left.dims())?;
    let (w, h) = left.dims();
    let rows: Vec<RowOut> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut num = vec![[0f64; 3]; w];
            let mut den = vec![0f64; w];
            let mut dsum = vec![0f64; w];
            for x in 0..w {
                let px = left.pixel(x, y);
                for &(k, wt) in weights.pixel(y * w + x) {
                    let Some(t) = x.checked_sub(k as usize) else {
                        continue;
                    };
                    let wt = wt as f64;
                    den[t] += wt;
                    dsum[t] += wt * k as f64;
                    for c in 0..3 {
                        num[t][c] += wt * px[c] as f64;
                    }
                }
            }
            let mut out = RowOut {
                rgb: vec![0.0; w * 3],
                weight: den.iter().map(|&v| v as f32).collect(),
                disparity: vec![0.0; w],
                hole: vec![true; w],
            };
            for t in 0..w {
                if den[t] > 0.0 {
                    for c in 0..3 {
                        out.rgb[t * 3 + c] = (num[t][c] / den[t]) as f32;
                    }
                    out.disparity[t] = (dsum[t] / den[t]) as f32;
                    out.hole[t] = false;
                }
            }
            out
        })
        .collect();

    let mut rgb = Vec::with_capacity(w * h * 3);
    let mut disp = Vec::with_capacity(w * h);
    let mut hole = Vec::with_capacity(w * h);
    for r in rows {
        rgb.extend(r.rgb);
        disp.extend(r.disparity);
        hole.extend(r.hole);
    }
    let valid = hole.iter().map(|&hh| !hh).collect();
    Ok(PlaneWarpResult {
        right: Image::from_raw_clamped(w, h, rgb),
        holes: Grid::from_vec(w, h, hole)?,
        right_disparity: DisparityMap::with_validity(w, h, disp, valid)?,
    })
}
