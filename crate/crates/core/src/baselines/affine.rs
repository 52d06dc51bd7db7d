use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{DisparityMap, Image};
use crate::raster::Grid;
use crate::synthesis::{StereoTuple, TupleMeta};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineWarpParams {
    pub s_top: f32,
    pub s_bottom: f32,
    pub d_max: f32,
}

impl AffineWarpParams {
    /// With equal probability either the top or the bottom shift is drawn
    /// from `U[0, d_max]` and the other from `U[0, first]`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, d_max: f32) -> Self {
        let top_first = rng.random_bool(0.5);
        let a = rng.random::<f32>() * d_max;
        let b = rng.random::<f32>() * a;
        let (s_top, s_bottom) = if top_first { (a, b) } else { (b, a) };
        AffineWarpParams {
            s_top,
            s_bottom,
            d_max,
        }
    }

    pub fn shift(&self, y: usize, height: usize) -> f32 {
        if height <= 1 {
            return self.s_top;
        }
        let t = y as f64 / (height - 1) as f64;
        (self.s_top as f64 + (self.s_bottom as f64 - self.s_top as f64) * t) as f32
    }

    /// Columns removed from the right edge, where the shifted lookup would
    /// leave the image.
    pub fn crop_columns(&self) -> usize {
        self.s_top.max(self.s_bottom).ceil() as usize
    }
}

/// Resamples `left` with the per-row shear described by `params` and crops
/// the unsampled columns from every raster.
pub fn apply_affine(left: &Image, params: &AffineWarpParams) -> Result<StereoTuple> {
    let (w, h) = left.dims();
    if !(params.d_max > 0.0) || params.d_max.ceil() as usize >= w {
        return Err(Error::InvalidValue(format!(
            "affine d_max {} must be positive and below the image width {w}",
            params.d_max
        )));
    }
    let valid = |s: f32| (0.0..=params.d_max).contains(&s);
    if !valid(params.s_top) || !valid(params.s_bottom) {
        return Err(Error::InvalidValue(format!(
            "affine shifts out of range: {params:?}"
        )));
    }
    let out_w = w - params.crop_columns();
    let mut right = Vec::with_capacity(out_w * h * 3);
    let mut disp = Vec::with_capacity(out_w * h);
    for y in 0..h {
        let s = params.shift(y, h);
        for x in 0..out_w {
            let sx = x as f32 + s;
            let x0 = (sx.floor() as usize).min(w - 1);
            let x1 = (x0 + 1).min(w - 1);
            let f = sx - x0 as f32;
            let (p0, p1) = (left.pixel(x0, y), left.pixel(x1, y));
            right.extend((0..3).map(|c| p0[c] + (p1[c] - p0[c]) * f));
            disp.push(s);
        }
    }
    let mut meta = TupleMeta::new("affine", 0);
    meta.scale = Some(params.s_top.max(params.s_bottom));
    Ok(StereoTuple {
        left: left.crop(0, 0, out_w, h),
        right: Image::from_raw_clamped(out_w, h, right),
        disparity: DisparityMap::new(out_w, h, disp)?,
        hole_mask: Grid::new(out_w, h, false),
        meta,
    })
}

pub fn affine_warp_pair<R: Rng + ?Sized>(
    left: &Image,
    rng: &mut R,
    d_max: f32,
) -> Result<StereoTuple> {
    if !(d_max > 0.0) || d_max.ceil() as usize >= left.width() {
        return Err(Error::InvalidValue(format!(
            "affine d_max {d_max} must be positive and below the image width {}",
            left.width()
        )));
    }
    apply_affine(left, &AffineWarpParams::sample(rng, d_max))
}
