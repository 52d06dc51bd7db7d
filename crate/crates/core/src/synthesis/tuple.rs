use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    augment_right, crop_or_resize, fill_holes, reinhard_transfer, AugmentConfig, CropPolicy,
};
use crate::error::{Error, Result};
use crate::geometry::{
    depth_to_disparity, forward_warp, sample_scale, sharpen_disparity, DisparityMode, ScaleSampler,
    SharpenConfig, WarpMode,
};
use crate::imgio::{DepthMap, DisparityMap, Image};
use crate::raster::Mask;
use crate::rng::{stream_rng, SYNTHESIS_STREAM};

/// Provenance recorded beside every tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleMeta {
    pub generator: String,
    pub seed: u64,
    /// Depth-to-disparity scale `s`, for generators that draw one.
    pub scale: Option<f32>,
    pub sources: Vec<String>,
    /// Horizontal resize factor applied by the crop policy.
    pub resize_factor: f32,
    pub crop_offset: Option<(usize, usize)>,
}

impl TupleMeta {
    pub fn new(generator: &str, seed: u64) -> Self {
        TupleMeta {
            generator: generator.to_string(),
            seed,
            scale: None,
            sources: Vec::new(),
            resize_factor: 1.0,
            crop_offset: None,
        }
    }
}

/// `(left, right, disparity)` with the right view's hole mask. Disparity is
/// aligned to the left image; the hole mask to the right image.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoTuple {
    pub left: Image,
    pub right: Image,
    pub disparity: DisparityMap,
    pub hole_mask: Mask,
    pub meta: TupleMeta,
}

impl StereoTuple {
    pub fn dims(&self) -> (usize, usize) {
        self.left.dims()
    }

    /// Shared dimensions; valid disparities finite and non-negative (the
    /// latter is enforced by `DisparityMap` itself).
    pub fn validate(&self) -> Result<()> {
        let dims = self.left.dims();
        Error::check_dims("right image", self.right.dims(), dims)?;
        Error::check_dims("disparity", self.disparity.dims(), dims)?;
        Error::check_dims("hole mask", self.hole_mask.dims(), dims)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub scale: ScaleSampler,
    pub disparity_mode: DisparityMode,
    /// `None` disables depth sharpening.
    pub sharpen: Option<SharpenConfig>,
    pub warp_mode: WarpMode,
    /// Colour-match the hole-filling background to the left image.
    pub color_transfer: bool,
    /// `None` disables augmentation of the right view.
    pub augment: Option<AugmentConfig>,
    /// `None` emits tuples at input resolution.
    pub crop: Option<CropPolicy>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            scale: ScaleSampler::default(),
            disparity_mode: DisparityMode::default(),
            sharpen: Some(SharpenConfig::default()),
            warp_mode: WarpMode::default(),
            color_transfer: true,
            augment: Some(AugmentConfig::default()),
            crop: Some(CropPolicy::default()),
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        self.scale.validate()?;
        if let Some(s) = &self.sharpen {
            s.validate()?;
        }
        if let Some(a) = &self.augment {
            a.validate()?;
        }
        if let Some(c) = &self.crop {
            c.validate()?;
        }
        Ok(())
    }
}

/// Augments the right view and applies the crop policy, as configured.
pub fn finalize_tuple<R: Rng + ?Sized>(
    mut tuple: StereoTuple,
    rng: &mut R,
    cfg: &SynthesisConfig,
) -> Result<StereoTuple> {
    if let Some(aug) = &cfg.augment {
        tuple.right = augment_right(&tuple.right, rng, aug);
    }
    match &cfg.crop {
        Some(policy) => crop_or_resize(tuple, rng, policy),
        None => Ok(tuple),
    }
}

/// Full pipeline: scale draw, depth to disparity, sharpening, forward warp,
/// hole filling from the colour-matched background, augmentation and crop.
/// The emitted disparity is the sharpened map (after any resize and crop).
/// Output is a pure function of the inputs, `seed` and `cfg`.
pub fn synthesize_tuple(
    left: &Image,
    depth: &DepthMap,
    background: &Image,
    seed: u64,
    cfg: &SynthesisConfig,
) -> Result<StereoTuple> {
    cfg.validate()?;
    Error::check_dims("depth", depth.dims(), left.dims())?;
    let mut rng = stream_rng(seed, SYNTHESIS_STREAM);
    let s = sample_scale(&mut rng, &cfg.scale);
    let disparity = depth_to_disparity(depth, s, cfg.disparity_mode)?;
    let disparity = match &cfg.sharpen {
        Some(sc) => sharpen_disparity(&disparity, sc)?,
        None => disparity,
    };
    let warp = forward_warp(left, &disparity, cfg.warp_mode)?;
    let (w, h) = left.dims();
    let background = background.fit_cover(w, h);
    let background = if cfg.color_transfer {
        reinhard_transfer(&background, left)
    } else {
        background
    };
    let right = fill_holes(&warp, &background)?;

    let mut meta = TupleMeta::new("mono", seed);
    meta.scale = Some(s);
    let tuple = StereoTuple {
        left: left.clone(),
        right,
        disparity,
        hole_mask: warp.holes,
        meta,
    };
    finalize_tuple(tuple, &mut rng, cfg)
}
