use rand::Rng;
use serde::{Deserialize, Serialize};

use super::felzenszwalb_segment;
use crate::error::Result;
use crate::geometry::{forward_warp, WarpMode};
use crate::imgio::{DisparityMap, Image};
use crate::synthesis::{fill_holes, reinhard_transfer, StereoTuple, TupleMeta};

/// Per-tuple draws: the disparity plane `a·x + b·y + c` and the
/// segmentation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpixelPlaneParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub felz_scale: f64,
    pub felz_sigma: f64,
    pub felz_min_size: usize,
}

impl SuperpixelPlaneParams {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        SuperpixelPlaneParams {
            a: u(-0.025, 0.025),
            b: u(0.3, 0.4),
            c: u(15.0, 20.0),
            felz_scale: u(50.0, 200.0),
            felz_sigma: u(0.0, 1.0),
            felz_min_size: u(75.0, 275.0).round() as usize,
        }
    }

    pub fn plane(&self, x: usize, y: usize) -> f64 {
        self.a * x as f64 + self.b * y as f64 + self.c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuperpixelConfig {
    pub foreground_prob: f64,
    /// Foreground offsets are drawn from `U[0, offset_max]`.
    pub offset_max: f64,
    /// Disparities are clipped to `[0, clip_max]`.
    pub clip_max: f32,
    pub warp_mode: WarpMode,
    pub color_transfer: bool,
}

impl Default for SuperpixelConfig {
    fn default() -> Self {
        SuperpixelConfig {
            foreground_prob: 0.6,
            offset_max: 64.0,
            clip_max: 192.0,
            warp_mode: WarpMode::default(),
            color_transfer: true,
        }
    }
}

/// Builds the superpixel disparity map. Returns the map and, per segment,
/// whether it was raised as a foreground object.
pub fn superpixel_disparity<R: Rng + ?Sized>(
    left: &Image,
    params: &SuperpixelPlaneParams,
    rng: &mut R,
    cfg: &SuperpixelConfig,
) -> Result<(DisparityMap, crate::raster::Grid<u32>, Vec<bool>)> {
    let (w, h) = left.dims();
    let seg = felzenszwalb_segment(
        left,
        params.felz_scale,
        params.felz_sigma,
        params.felz_min_size,
    );
    let mut sum = vec![0f64; seg.count];
    let mut n = vec![0usize; seg.count];
    for y in 0..h {
        for x in 0..w {
            let l = *seg.labels.get(x, y) as usize;
            sum[l] += params.plane(x, y);
            n[l] += 1;
        }
    }
    let mut foreground = vec![false; seg.count];
    let mut level = vec![0f64; seg.count];
    for l in 0..seg.count {
        foreground[l] = rng.random_bool(cfg.foreground_prob);
        let offset = rng.random::<f64>() * cfg.offset_max;
        level[l] = sum[l] / n[l] as f64 + offset;
    }
    let clip = cfg.clip_max as f64;
    let map = DisparityMap::from_fn(w, h, |x, y| {
        let l = *seg.labels.get(x, y) as usize;
        let d = if foreground[l] {
            level[l]
        } else {
            params.plane(x, y)
        };
        d.clamp(0.0, clip) as f32
    })?;
    Ok((map, seg.labels, foreground))
}

pub fn superpixel_pair<R: Rng + ?Sized>(
    left: &Image,
    background: &Image,
    rng: &mut R,
    cfg: &SuperpixelConfig,
) -> Result<StereoTuple> {
    let params = SuperpixelPlaneParams::sample(rng);
    let (disparity, _, _) = superpixel_disparity(left, &params, rng, cfg)?;
    let warp = forward_warp(left, &disparity, cfg.warp_mode)?;
    let (w, h) = left.dims();
    let bg = background.fit_cover(w, h);
    let bg = if cfg.color_transfer {
        reinhard_transfer(&bg, left)
    } else {
        bg
    };
    let right = fill_holes(&warp, &bg)?;
    Ok(StereoTuple {
        left: left.clone(),
        right,
        disparity,
        hole_mask: warp.holes,
        meta: TupleMeta::new("superpixels", 0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn img(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| {
            let q = ((x / 12) * 7 + (y / 9) * 3) % 5;
            [
                q as f32 / 4.0,
                ((x / 12) % 2) as f32,
                ((y / 9) % 3) as f32 / 2.0,
            ]
        })
    }

    fn fixed() -> SuperpixelPlaneParams {
        SuperpixelPlaneParams {
            a: 0.0,
            b: 0.35,
            c: 17.0,
            felz_scale: 100.0,
            felz_sigma: 0.0,
            felz_min_size: 20,
        }
    }

    #[test]
    fn background_only_is_the_plane() {
        let cfg = SuperpixelConfig {
            foreground_prob: 0.0,
            ..Default::default()
        };
        let (d, _, fg) = superpixel_disparity(
            &img(60, 100),
            &fixed(),
            &mut ChaCha8Rng::seed_from_u64(0),
            &cfg,
        )
        .unwrap();
        assert!(fg.iter().all(|f| !f));
        assert!((d.get(0, 0) - 17.0).abs() < 1e-5);
        assert!((d.get(59, 99) - (17.0 + 0.35 * 99.0)).abs() < 1e-4);
        for y in 0..100 {
            for x in 0..60 {
                assert_eq!(d.get(x, y), fixed().plane(x, y) as f32);
            }
        }
    }

    #[test]
    fn foreground_segments_sit_at_or_above_plane_mean() {
        let left = img(80, 60);
        let p = fixed();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, labels, fg) =
            superpixel_disparity(&left, &p, &mut rng, &SuperpixelConfig::default()).unwrap();
        let mut sum = vec![0f64; fg.len()];
        let mut n = vec![0usize; fg.len()];
        for y in 0..60 {
            for x in 0..80 {
                let l = *labels.get(x, y) as usize;
                sum[l] += p.plane(x, y);
                n[l] += 1;
            }
        }
        for y in 0..60 {
            for x in 0..80 {
                let l = *labels.get(x, y) as usize;
                if fg[l] {
                    let mean = (sum[l] / n[l] as f64) as f32;
                    assert!(d.get(x, y) >= mean - 1e-4 && d.get(x, y) <= mean + 64.0 + 1e-3);
                } else {
                    assert_eq!(d.get(x, y), p.plane(x, y) as f32);
                }
            }
        }
    }

    #[test]
    fn foreground_rate_and_clip() {
        let left = img(120, 90);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = SuperpixelConfig::default();
        let (mut chosen, mut total) = (0usize, 0usize);
        for _ in 0..60 {
            let p = SuperpixelPlaneParams {
                felz_min_size: 5,
                ..fixed()
            };
            let (d, _, fg) = superpixel_disparity(&left, &p, &mut rng, &cfg).unwrap();
            chosen += fg.iter().filter(|f| **f).count();
            total += fg.len();
            assert!(d.values().iter().all(|v| (0.0..=192.0).contains(v)));
        }
        let rate = chosen as f64 / total as f64;
        assert!(
            total > 1000 && (rate - 0.6).abs() < 0.05,
            "{rate} over {total}"
        );
    }

    #[test]
    fn sampled_parameters_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let p = SuperpixelPlaneParams::sample(&mut rng);
            assert!((-0.025..=0.025).contains(&p.a));
            assert!((0.3..=0.4).contains(&p.b));
            assert!((15.0..=20.0).contains(&p.c));
            assert!((50.0..=200.0).contains(&p.felz_scale));
            assert!((0.0..=1.0).contains(&p.felz_sigma));
            assert!((75..=275).contains(&p.felz_min_size));
        }
    }

    #[test]
    fn pair_is_valid_and_deterministic() {
        let left = img(90, 50);
        let bg = img(40, 40).flip_horizontal();
        let cfg = SuperpixelConfig::default();
        let a = superpixel_pair(&left, &bg, &mut ChaCha8Rng::seed_from_u64(1), &cfg).unwrap();
        let b = superpixel_pair(&left, &bg, &mut ChaCha8Rng::seed_from_u64(1), &cfg).unwrap();
        a.validate().unwrap();
        assert_eq!(a, b);
        assert!(a.disparity.all_valid());
    }
}
