//! Flat key/value settings file, layered as defaults < file < flags.

use std::path::Path;

use anyhow::{Context, Result};
use monostereo::geometry::{DisparityMode, ScaleSampler, SharpenConfig, WarpMode};
use monostereo::pipeline::{Generator, GeneratorConfig};
use monostereo::synthesis::{AugmentConfig, CropPolicy};
use serde::{Deserialize, Serialize};

/// Every key is optional; absent keys leave the lower layer untouched.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub generator: Option<Generator>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub png_disparity: Option<bool>,

    pub d_min: Option<f32>,
    pub d_max: Option<f32>,
    pub disparity_mode: Option<DisparityMode>,
    pub sharpen: Option<bool>,
    pub sobel_threshold: Option<f32>,
    pub warp_mode: Option<WarpMode>,
    pub color_transfer: Option<bool>,

    pub augment: Option<bool>,
    pub noise_std: Option<f32>,
    pub contrast_jitter: Option<f32>,
    pub brightness_jitter: Option<f32>,
    pub saturation_jitter: Option<f32>,
    pub hue_jitter: Option<f32>,
    pub blur_probability: Option<f32>,
    pub blur_sigma_min: Option<f32>,
    pub blur_sigma_max: Option<f32>,

    pub crop: Option<bool>,
    pub crop_width: Option<usize>,
    pub crop_height: Option<usize>,
    pub oversize_factor: Option<f32>,

    pub affine_d_max: Option<f32>,
    pub shapes_base_d_max: Option<f32>,
    pub shapes_max_patches: Option<usize>,
    pub shapes_color_transfer: Option<bool>,
    pub superpixel_foreground_prob: Option<f64>,
    pub superpixel_offset_max: Option<f64>,
    pub superpixel_clip_max: Option<f32>,
    pub superpixel_warp_mode: Option<WarpMode>,
    pub superpixel_color_transfer: Option<bool>,
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if $src.is_some() {
            $dst = $src;
        }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Settings) -> Settings {
        take!(self.generator, top.generator);
        take!(self.seed, top.seed);
        take!(self.workers, top.workers);
        take!(self.png_disparity, top.png_disparity);
        take!(self.d_min, top.d_min);
        take!(self.d_max, top.d_max);
        take!(self.disparity_mode, top.disparity_mode);
        take!(self.sharpen, top.sharpen);
        take!(self.sobel_threshold, top.sobel_threshold);
        take!(self.warp_mode, top.warp_mode);
        take!(self.color_transfer, top.color_transfer);
        take!(self.augment, top.augment);
        take!(self.noise_std, top.noise_std);
        take!(self.contrast_jitter, top.contrast_jitter);
        take!(self.brightness_jitter, top.brightness_jitter);
        take!(self.saturation_jitter, top.saturation_jitter);
        take!(self.hue_jitter, top.hue_jitter);
        take!(self.blur_probability, top.blur_probability);
        take!(self.blur_sigma_min, top.blur_sigma_min);
        take!(self.blur_sigma_max, top.blur_sigma_max);
        take!(self.crop, top.crop);
        take!(self.crop_width, top.crop_width);
        take!(self.crop_height, top.crop_height);
        take!(self.oversize_factor, top.oversize_factor);
        take!(self.affine_d_max, top.affine_d_max);
        take!(self.shapes_base_d_max, top.shapes_base_d_max);
        take!(self.shapes_max_patches, top.shapes_max_patches);
        take!(self.shapes_color_transfer, top.shapes_color_transfer);
        take!(
            self.superpixel_foreground_prob,
            top.superpixel_foreground_prob
        );
        take!(self.superpixel_offset_max, top.superpixel_offset_max);
        take!(self.superpixel_clip_max, top.superpixel_clip_max);
        take!(self.superpixel_warp_mode, top.superpixel_warp_mode);
        take!(
            self.superpixel_color_transfer,
            top.superpixel_color_transfer
        );
        self
    }

    /// Applies the set keys on top of `base`.
    pub fn apply(&self, base: &GeneratorConfig) -> GeneratorConfig {
        let mut c = base.clone();
        let s = &mut c.synthesis;
        s.scale = ScaleSampler {
            d_min: self.d_min.unwrap_or(s.scale.d_min),
            d_max: self.d_max.unwrap_or(s.scale.d_max),
        };
        if let Some(m) = self.disparity_mode {
            s.disparity_mode = m;
        }
        if self.sharpen == Some(false) {
            s.sharpen = None;
        } else if self.sharpen == Some(true) || self.sobel_threshold.is_some() {
            let mut sc = s.sharpen.unwrap_or_default();
            if let Some(t) = self.sobel_threshold {
                sc.sobel_threshold = t;
            }
            s.sharpen = Some(sc);
        }
        if let Some(m) = self.warp_mode {
            s.warp_mode = m;
        }
        if let Some(b) = self.color_transfer {
            s.color_transfer = b;
        }

        let aug_keys = [
            self.noise_std,
            self.contrast_jitter,
            self.brightness_jitter,
            self.saturation_jitter,
            self.hue_jitter,
            self.blur_probability,
            self.blur_sigma_min,
            self.blur_sigma_max,
        ];
        if self.augment == Some(false) {
            s.augment = None;
        } else if self.augment == Some(true) || aug_keys.iter().any(Option::is_some) {
            let mut a = s.augment.unwrap_or_else(AugmentConfig::default);
            a.noise_std = self.noise_std.unwrap_or(a.noise_std);
            a.contrast_jitter = self.contrast_jitter.unwrap_or(a.contrast_jitter);
            a.brightness_jitter = self.brightness_jitter.unwrap_or(a.brightness_jitter);
            a.saturation_jitter = self.saturation_jitter.unwrap_or(a.saturation_jitter);
            a.hue_jitter = self.hue_jitter.unwrap_or(a.hue_jitter);
            a.blur_probability = self.blur_probability.unwrap_or(a.blur_probability);
            a.blur_sigma_range = [
                self.blur_sigma_min.unwrap_or(a.blur_sigma_range[0]),
                self.blur_sigma_max.unwrap_or(a.blur_sigma_range[1]),
            ];
            s.augment = Some(a);
        }

        if self.crop == Some(false) {
            s.crop = None;
        } else if self.crop == Some(true)
            || self.crop_width.is_some()
            || self.crop_height.is_some()
            || self.oversize_factor.is_some()
        {
            let mut p = s.crop.unwrap_or_else(CropPolicy::default);
            p.crop_width = self.crop_width.unwrap_or(p.crop_width);
            p.crop_height = self.crop_height.unwrap_or(p.crop_height);
            p.oversize_factor = self.oversize_factor.unwrap_or(p.oversize_factor);
            s.crop = Some(p);
        }

        c.affine_d_max = self.affine_d_max.unwrap_or(c.affine_d_max);
        c.shapes.base_d_max = self.shapes_base_d_max.unwrap_or(c.shapes.base_d_max);
        c.shapes.max_patches = self.shapes_max_patches.unwrap_or(c.shapes.max_patches);
        c.shapes.color_transfer = self
            .shapes_color_transfer
            .unwrap_or(c.shapes.color_transfer);
        let sp = &mut c.superpixels;
        sp.foreground_prob = self
            .superpixel_foreground_prob
            .unwrap_or(sp.foreground_prob);
        sp.offset_max = self.superpixel_offset_max.unwrap_or(sp.offset_max);
        sp.clip_max = self.superpixel_clip_max.unwrap_or(sp.clip_max);
        sp.warp_mode = self.superpixel_warp_mode.unwrap_or(sp.warp_mode);
        sp.color_transfer = self.superpixel_color_transfer.unwrap_or(sp.color_transfer);
        c
    }

    /// Every key filled in from a resolved configuration, so that the
    /// written file reproduces the run on its own.
    pub fn resolved(
        generator: Generator,
        seed: u64,
        workers: usize,
        png_disparity: bool,
        c: &GeneratorConfig,
    ) -> Settings {
        let s = &c.synthesis;
        let a = s.augment.unwrap_or_else(AugmentConfig::disabled);
        let p = s.crop.unwrap_or_default();
        Settings {
            generator: Some(generator),
            seed: Some(seed),
            workers: Some(workers),
            png_disparity: Some(png_disparity),
            d_min: Some(s.scale.d_min),
            d_max: Some(s.scale.d_max),
            disparity_mode: Some(s.disparity_mode),
            sharpen: Some(s.sharpen.is_some()),
            sobel_threshold: Some(
                s.sharpen
                    .unwrap_or_else(SharpenConfig::default)
                    .sobel_threshold,
            ),
            warp_mode: Some(s.warp_mode),
            color_transfer: Some(s.color_transfer),
            augment: Some(s.augment.is_some()),
            noise_std: Some(a.noise_std),
            contrast_jitter: Some(a.contrast_jitter),
            brightness_jitter: Some(a.brightness_jitter),
            saturation_jitter: Some(a.saturation_jitter),
            hue_jitter: Some(a.hue_jitter),
            blur_probability: Some(a.blur_probability),
            blur_sigma_min: Some(a.blur_sigma_range[0]),
            blur_sigma_max: Some(a.blur_sigma_range[1]),
            crop: Some(s.crop.is_some()),
            crop_width: Some(p.crop_width),
            crop_height: Some(p.crop_height),
            oversize_factor: Some(p.oversize_factor),
            affine_d_max: Some(c.affine_d_max),
            shapes_base_d_max: Some(c.shapes.base_d_max),
            shapes_max_patches: Some(c.shapes.max_patches),
            shapes_color_transfer: Some(c.shapes.color_transfer),
            superpixel_foreground_prob: Some(c.superpixels.foreground_prob),
            superpixel_offset_max: Some(c.superpixels.offset_max),
            superpixel_clip_max: Some(c.superpixels.clip_max),
            superpixel_warp_mode: Some(c.superpixels.warp_mode),
            superpixel_color_transfer: Some(c.superpixels.color_transfer),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat settings serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_settings_keep_defaults() {
        let base = GeneratorConfig::default();
        assert_eq!(Settings::default().apply(&base), base);
    }

    #[test]
    fn resolved_settings_reproduce_the_config() {
        let mut c = GeneratorConfig::default();
        c.synthesis.augment = None;
        c.synthesis.scale = ScaleSampler {
            d_min: 10.0,
            d_max: 20.0,
        };
        c.affine_d_max = 33.0;
        let s = Settings::resolved(Generator::Affine, 5, 3, true, &c);
        let text = s.to_toml();
        let back: Settings = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.apply(&GeneratorConfig::default()), c);
    }

    #[test]
    fn later_layers_win() {
        let file = Settings {
            seed: Some(1),
            d_max: Some(100.0),
            ..Default::default()
        };
        let flags = Settings {
            seed: Some(2),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.seed, Some(2));
        assert_eq!(merged.d_max, Some(100.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Settings>("bogus = 1").is_err());
        let s: Settings =
            toml::from_str("generator = \"svsm\"\nwarp_mode = \"nearest\"\naugment = false")
                .unwrap();
        assert_eq!(s.generator, Some(Generator::Svsm));
        let c = s.apply(&GeneratorConfig::default());
        assert_eq!(c.synthesis.warp_mode, WarpMode::Nearest);
        assert!(c.synthesis.augment.is_none());
    }
}
