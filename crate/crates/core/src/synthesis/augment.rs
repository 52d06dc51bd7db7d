//! Photometric augmentation of the synthesized right view.
//!
//! Fixed order: brightness (additive), contrast (about the image's mean
//! luma), saturation (about each pixel's luma), hue rotation, Gaussian
//! noise, optional Gaussian blur. The result is clipped to `[0, 1]` once at
//! the end.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::lab::{invert3, mul};
use crate::imgio::Image;
use crate::raster;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub noise_std: f32,
    pub contrast_jitter: f32,
    pub brightness_jitter: f32,
    pub saturation_jitter: f32,
    /// Half-width of the hue rotation, in turns.
    pub hue_jitter: f32,
    pub blur_probability: f32,
    pub blur_sigma_range: [f32; 2],
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            noise_std: 0.05,
            contrast_jitter: 0.2,
            brightness_jitter: 0.2,
            saturation_jitter: 0.2,
            hue_jitter: 0.01,
            blur_probability: 0.5,
            blur_sigma_range: [0.0, 1.0],
        }
    }
}

impl AugmentConfig {
    /// Every knob at its neutral value.
    pub fn disabled() -> Self {
        AugmentConfig {
            noise_std: 0.0,
            contrast_jitter: 0.0,
            brightness_jitter: 0.0,
            saturation_jitter: 0.0,
            hue_jitter: 0.0,
            blur_probability: 0.0,
            blur_sigma_range: [0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let halves = [
            self.noise_std,
            self.contrast_jitter,
            self.brightness_jitter,
            self.saturation_jitter,
            self.hue_jitter,
        ];
        let [lo, hi] = self.blur_sigma_range;
        if halves.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || !(0.0..=1.0).contains(&self.blur_probability)
            || !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi)
        {
            return Err(Error::Config(format!(
                "invalid augmentation config {self:?}"
            )));
        }
        Ok(())
    }
}

/// Per-image draws. Sampling always consumes the same number of values
/// from the RNG regardless of the configured ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentParams {
    pub brightness: f32,
    pub contrast: f32,
    pub saturation: f32,
    pub hue_turns: f32,
    pub blur_sigma: Option<f32>,
}

fn symmetric<R: Rng + ?Sized>(rng: &mut R, half: f32) -> f32 {
    let u: f64 = rng.random();
    (half as f64 * (2.0 * u - 1.0)) as f32
}

impl AugmentParams {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, cfg: &AugmentConfig) -> Self {
        let brightness = symmetric(rng, cfg.brightness_jitter);
        let contrast = 1.0 + symmetric(rng, cfg.contrast_jitter);
        let saturation = 1.0 + symmetric(rng, cfg.saturation_jitter);
        let hue_turns = symmetric(rng, cfg.hue_jitter);
        let coin: f64 = rng.random();
        let u: f64 = rng.random();
        let [lo, hi] = cfg.blur_sigma_range;
        let sigma = (lo as f64 + (hi - lo) as f64 * u) as f32;
        AugmentParams {
            brightness,
            contrast,
            saturation,
            hue_turns,
            blur_sigma: (coin < cfg.blur_probability as f64).then_some(sigma),
        }
    }
}

// Rec. 601 RGB -> YIQ
const RGB_TO_YIQ: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [0.595_716, -0.274_453, -0.321_263],
    [0.211_456, -0.522_591, 0.311_135],
];

fn hue_matrix(turns: f64) -> [[f64; 3]; 3] {
    let (s, c) = (TAU * turns).sin_cos();
    let rot = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
    let inv = invert3(&RGB_TO_YIQ);
    let mut out = [[0.0; 3]; 3];
    for col in 0..3 {
        let e = [0, 1, 2].map(|i| if i == col { 1.0 } else { 0.0 });
        let v = mul(&inv, mul(&rot, mul(&RGB_TO_YIQ, e)));
        for row in 0..3 {
            out[row][col] = v[row];
        }
    }
    out
}

pub fn augment_right<R: Rng + ?Sized>(img: &Image, rng: &mut R, cfg: &AugmentConfig) -> Image {
    let params = AugmentParams::sample(rng, cfg);
    let (w, h) = img.dims();
    let mut data: Vec<f32> = img.data().to_vec();

    if params.brightness != 0.0 {
        data.iter_mut().for_each(|v| *v += params.brightness);
    }
    if params.contrast != 1.0 {
        let n = (w * h).max(1) as f64;
        let mean = data
            .chunks_exact(3)
            .map(|p| Image::luma([p[0], p[1], p[2]]) as f64)
            .sum::<f64>()
            / n;
        let c = params.contrast as f64;
        data.iter_mut()
            .for_each(|v| *v = (mean + (*v as f64 - mean) * c) as f32);
    }
    if params.saturation != 1.0 {
        let s = params.saturation;
        for p in data.chunks_exact_mut(3) {
            let l = Image::luma([p[0], p[1], p[2]]);
            p.iter_mut().for_each(|v| *v = l + (*v - l) * s);
        }
    }
    if params.hue_turns != 0.0 {
        let m = hue_matrix(params.hue_turns as f64);
        for p in data.chunks_exact_mut(3) {
            let out = mul(&m, [p[0] as f64, p[1] as f64, p[2] as f64]);
            p.copy_from_slice(&out.map(|v| v as f32));
        }
    }
    if cfg.noise_std > 0.0 {
        let std = cfg.noise_std as f64;
        for v in data.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = (*v as f64 + std * z) as f32;
        }
    }
    if let Some(sigma) = params.blur_sigma {
        let radius = (3.0 * sigma as f64).ceil() as usize;
        data = raster::gaussian_blur(&data, w, h, 3, sigma as f64, radius);
    }
    Image::from_raw_clamped(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn textured(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| {
            [
                0.2 + 0.6 * ((x * 13 + y * 7) % 17) as f32 / 16.0,
                0.3 + 0.4 * (y as f32 / h as f32),
                0.5,
            ]
        })
    }

    #[test]
    fn defaults_match_published_magnitudes() {
        let c = AugmentConfig::default();
        assert_eq!(c.noise_std, 0.05);
        assert_eq!(
            (
                c.contrast_jitter,
                c.brightness_jitter,
                c.saturation_jitter,
                c.hue_jitter
            ),
            (0.2, 0.2, 0.2, 0.01)
        );
        assert_eq!(c.blur_probability, 0.5);
        assert_eq!(c.blur_sigma_range, [0.0, 1.0]);
    }

    #[test]
    fn same_seed_same_output() {
        let img = textured(24, 16);
        let cfg = AugmentConfig::default();
        let a = augment_right(&img, &mut ChaCha8Rng::seed_from_u64(9), &cfg);
        let b = augment_right(&img, &mut ChaCha8Rng::seed_from_u64(9), &cfg);
        assert_eq!(a, b);
        let c = augment_right(&img, &mut ChaCha8Rng::seed_from_u64(10), &cfg);
        assert_ne!(a, c);
    }

    #[test]
    fn disabled_is_identity() {
        let img = textured(24, 16);
        let out = augment_right(
            &img,
            &mut ChaCha8Rng::seed_from_u64(1),
            &AugmentConfig::disabled(),
        );
        assert_eq!(out, img);
    }

    #[test]
    fn noise_only_has_the_configured_std() {
        let img = Image::filled(400, 100, [0.5; 3]);
        let cfg = AugmentConfig {
            noise_std: 0.05,
            ..AugmentConfig::disabled()
        };
        let out = augment_right(&img, &mut ChaCha8Rng::seed_from_u64(2), &cfg);
        let resid: Vec<f64> = out
            .data()
            .iter()
            .filter(|&&v| v > 0.0 && v < 1.0)
            .map(|&v| v as f64 - 0.5)
            .collect();
        assert!(resid.len() >= 100_000);
        let n = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / n;
        let std = (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - 0.05).abs() < 0.05 * 0.05, "std {std}");
    }

    #[test]
    fn blur_rate_is_half() {
        let cfg = AugmentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let blurred = (0..n)
            .filter(|_| AugmentParams::sample(&mut rng, &cfg).blur_sigma.is_some())
            .count();
        let rate = blurred as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn parameters_stay_in_their_ranges() {
        let cfg = AugmentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5_000 {
            let p = AugmentParams::sample(&mut rng, &cfg);
            assert!(p.brightness.abs() <= 0.2);
            assert!((0.8..=1.2).contains(&p.contrast));
            assert!((0.8..=1.2).contains(&p.saturation));
            assert!(p.hue_turns.abs() <= 0.01);
            if let Some(s) = p.blur_sigma {
                assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn hue_rotation_keeps_gray_and_full_turn_is_identity() {
        let m = hue_matrix(0.3);
        let g = mul(&m, [0.4, 0.4, 0.4]);
        assert!(g.iter().all(|v| (v - 0.4).abs() < 1e-9));
        let id = hue_matrix(1.0);
        let v = mul(&id, [0.1, 0.5, 0.9]);
        assert!((v[0] - 0.1).abs() < 1e-9 && (v[2] - 0.9).abs() < 1e-9);
    }

    #[test]
    fn output_is_clipped() {
        let img = Image::filled(32, 32, [1.0, 0.0, 1.0]);
        let cfg = AugmentConfig {
            noise_std: 0.5,
            ..AugmentConfig::default()
        };
        let out = augment_right(&img, &mut ChaCha8Rng::seed_from_u64(5), &cfg);
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = AugmentConfig {
            blur_probability: 1.5,
            ..AugmentConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(AugmentConfig::default().validate().is_ok());
    }
}
