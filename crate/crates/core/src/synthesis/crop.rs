use rand::Rng;
use serde::{Deserialize, Serialize};

use super::StereoTuple;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CropPolicy {
    pub crop_width: usize,
    pub crop_height: usize,
    /// Inputs larger than this multiple of the crop size in either dimension
    /// are downscaled before cropping.
    pub oversize_factor: f32,
}

impl Default for CropPolicy {
    fn default() -> Self {
        CropPolicy {
            crop_width: 608,
            crop_height: 320,
            oversize_factor: 2.0,
        }
    }
}

impl CropPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.crop_width == 0 || self.crop_height == 0 || !(self.oversize_factor >= 1.0) {
            return Err(Error::Config(format!("invalid crop policy {self:?}")));
        }
        Ok(())
    }

    /// Target size after the isotropic resize, or `None` when the input can
    /// be cropped directly.
    pub fn resized_dims(&self, width: usize, height: usize) -> Option<(usize, usize)> {
        let (cw, ch) = (self.crop_width as f64, self.crop_height as f64);
        let (w, h) = (width as f64, height as f64);
        let of = self.oversize_factor as f64;
        let small = w < cw || h < ch;
        let large = w > of * cw || h > of * ch;
        if !(small || large) {
            return None;
        }
        // the constraining dimension lands exactly on the crop size
        let r = (cw / w).max(ch / h);
        let nw = ((w * r).round() as usize).max(self.crop_width);
        let nh = ((h * r).round() as usize).max(self.crop_height);
        Some((nw, nh))
    }
}

/// Resizes (when required by the policy) then takes a uniformly placed
/// `crop_width × crop_height` window at the same offset in every raster.
/// Disparities are multiplied by the horizontal resize factor.
pub fn crop_or_resize<R: Rng + ?Sized>(
    tuple: StereoTuple,
    rng: &mut R,
    policy: &CropPolicy,
) -> Result<StereoTuple> {
    policy.validate()?;
    tuple.validate()?;
    let (w, h) = tuple.left.dims();
    let mut t = tuple;
    if let Some((nw, nh)) = policy.resized_dims(w, h) {
        t.left = t.left.resize(nw, nh);
        t.right = t.right.resize(nw, nh);
        t.disparity = t.disparity.resize_scaled(nw, nh);
        t.hole_mask = t.hole_mask.resize_nearest(nw, nh);
        t.meta.resize_factor = nw as f32 / w as f32;
    }
    let (w, h) = t.left.dims();
    let (cw, ch) = (policy.crop_width, policy.crop_height);
    let ox = rng.random_range(0..=w - cw);
    let oy = rng.random_range(0..=h - ch);
    if (ox, oy, cw, ch) != (0, 0, w, h) {
        t.left = t.left.crop(ox, oy, cw, ch);
        t.right = t.right.crop(ox, oy, cw, ch);
        t.disparity = t.disparity.crop(ox, oy, cw, ch);
        t.hole_mask = t.hole_mask.crop(ox, oy, cw, ch);
    }
    t.meta.crop_offset = Some((ox, oy));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::{DisparityMap, Image};
    use crate::raster::Grid;
    use crate::synthesis::TupleMeta;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tuple(w: usize, h: usize, d: f32) -> StereoTuple {
        let img = Image::from_fn(w, h, |x, y| {
            [(x % 7) as f32 / 7.0, (y % 5) as f32 / 5.0, 0.5]
        });
        StereoTuple {
            left: img.clone(),
            right: img,
            disparity: DisparityMap::constant(w, h, d).unwrap(),
            hole_mask: Grid::new(w, h, false),
            meta: TupleMeta::new("test", 0),
        }
    }

    #[test]
    fn exact_size_is_identity() {
        let t = tuple(608, 320, 4.0);
        let out = crop_or_resize(
            t.clone(),
            &mut ChaCha8Rng::seed_from_u64(0),
            &CropPolicy::default(),
        )
        .unwrap();
        assert_eq!(out.left, t.left);
        assert_eq!(out.disparity, t.disparity);
        assert_eq!(out.meta.resize_factor, 1.0);
    }

    #[test]
    fn half_width_input_doubles_disparity() {
        let policy = CropPolicy::default();
        assert_eq!(policy.resized_dims(304, 320), Some((608, 640)));
        let out = crop_or_resize(
            tuple(304, 320, 5.0),
            &mut ChaCha8Rng::seed_from_u64(1),
            &policy,
        )
        .unwrap();
        assert_eq!(out.left.dims(), (608, 320));
        assert_eq!(out.meta.resize_factor, 2.0);
        assert!(out
            .disparity
            .values()
            .iter()
            .all(|&v| (v - 10.0).abs() < 1e-4));
    }

    #[test]
    fn boundary_of_oversize_is_cropped_not_resized() {
        let policy = CropPolicy::default();
        assert_eq!(policy.resized_dims(1216, 640), None);
        assert!(policy.resized_dims(1217, 640).is_some());
        let mut seen_x = std::collections::HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let out = crop_or_resize(tuple(1216, 640, 1.0), &mut rng, &policy).unwrap();
            let (ox, oy) = out.meta.crop_offset.unwrap();
            assert!(ox <= 608 && oy <= 320);
            seen_x.insert(ox);
        }
        assert!(seen_x.len() > 40);
    }

    #[test]
    fn oversize_downscales_to_constraining_dimension() {
        let policy = CropPolicy::default();
        let (nw, nh) = policy.resized_dims(3000, 1000).unwrap();
        assert_eq!(nh, 320);
        assert_eq!(nw, 960);
    }

    #[test]
    fn rasters_share_offsets() {
        let mut t = tuple(700, 400, 2.0);
        t.disparity = DisparityMap::from_fn(700, 400, |x, y| (x + 1000 * y) as f32).unwrap();
        let out = crop_or_resize(
            t.clone(),
            &mut ChaCha8Rng::seed_from_u64(5),
            &CropPolicy::default(),
        )
        .unwrap();
        let (ox, oy) = out.meta.crop_offset.unwrap();
        assert_eq!(out.disparity.get(0, 0), t.disparity.get(ox, oy));
        assert_eq!(out.left.pixel(3, 2), t.left.pixel(ox + 3, oy + 2));
    }
}
