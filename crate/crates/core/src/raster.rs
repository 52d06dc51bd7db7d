//! Row-major rasters and the resampling kernels shared by every stage.

use crate::error::{Error, Result};

/// A dense `width × height` grid stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Per-pixel boolean raster (hole masks, evaluation masks, shape masks).
pub type Mask = Grid<bool>;

impl<T: Clone> Grid<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Grid {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidValue(format!(
                "grid data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Self {
        assert!(x0 + width <= self.width && y0 + height <= self.height);
        Grid::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y).clone())
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Nearest-neighbour resample using pixel-centre alignment.
    pub fn resize_nearest(&self, new_width: usize, new_height: usize) -> Self {
        let sx = self.width as f64 / new_width as f64;
        let sy = self.height as f64 / new_height as f64;
        Grid::from_fn(new_width, new_height, |x, y| {
            let ix = (((x as f64 + 0.5) * sx) as usize).min(self.width - 1);
            let iy = (((y as f64 + 0.5) * sy) as usize).min(self.height - 1);
            self.get(ix, iy).clone()
        })
    }
}

impl Mask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }
}

/// Bilinear resample of an interleaved `channels`-plane buffer.
///
/// Sample positions follow the pixel-centre convention
/// `src = (dst + 0.5) · (src_len / dst_len) − 0.5`, clamped at the borders.
pub fn resize_bilinear(
    src: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    new_width: usize,
    new_height: usize,
) -> Vec<f32> {
    assert_eq!(src.len(), width * height * channels);
    let sx = width as f64 / new_width as f64;
    let sy = height as f64 / new_height as f64;
    let taps = |dst: usize, scale: f64, len: usize| -> (usize, usize, f64) {
        let pos = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = pos.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, pos - i0 as f64)
    };
    let xtaps: Vec<_> = (0..new_width).map(|x| taps(x, sx, width)).collect();
    let mut out = Vec::with_capacity(new_width * new_height * channels);
    for y in 0..new_height {
        let (y0, y1, fy) = taps(y, sy, height);
        for &(x0, x1, fx) in &xtaps {
            for c in 0..channels {
                let at = |xx: usize, yy: usize| src[(yy * width + xx) * channels + c] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                out.push((top * (1.0 - fy) + bottom * fy) as f32);
            }
        }
    }
    out
}

/// Normalised 1-D Gaussian taps for `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut k: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicate borders. `sigma <= 0` or
/// `radius == 0` returns the input unchanged.
pub fn gaussian_blur(
    src: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    sigma: f64,
    radius: usize,
) -> Vec<f32> {
    if sigma <= 0.0 || radius == 0 || src.is_empty() {
        return src.to_vec();
    }
    let kernel = gaussian_kernel(sigma, radius);
    let r = radius as isize;
    let clamp = |v: isize, len: usize| v.clamp(0, len as isize - 1) as usize;

    let mut tmp = vec![0f32; src.len()];
    for y in 0..height {
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let xx = clamp(x as isize + k as isize - r, width);
                    acc += w * src[(y * width + xx) * channels + c] as f64;
                }
                tmp[(y * width + x) * channels + c] = acc as f32;
            }
        }
    }
    let mut out = vec![0f32; src.len()];
    for y in 0..height {
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let yy = clamp(y as isize + k as isize - r, height);
                    acc += w * tmp[(yy * width + x) * channels + c] as f64;
                }
                out[(y * width + x) * channels + c] = acc as f32;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_constant_stays_constant() {
        let src = vec![0.25f32; 7 * 5];
        let out = resize_bilinear(&src, 7, 5, 1, 13, 9);
        assert!(out.iter().all(|&v| (v - 0.25).abs() < 1e-7));
    }

    #[test]
    fn bilinear_same_size_is_identity() {
        let src: Vec<f32> = (0..12).map(|v| v as f32).collect();
        assert_eq!(resize_bilinear(&src, 4, 3, 1, 4, 3), src);
    }

    #[test]
    fn blur_preserves_mass_of_constant() {
        let src = vec![0.5f32; 6 * 4 * 3];
        let out = gaussian_blur(&src, 6, 4, 3, 0.8, 3);
        assert!(out.iter().all(|&v| (v - 0.5).abs() < 1e-6));
    }

    #[test]
    fn kernel_is_normalised_and_symmetric() {
        let k = gaussian_kernel(1.0, 3);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k[0], k[6]);
    }

    #[test]
    fn grid_rejects_bad_length() {
        assert!(Grid::from_vec(2, 2, vec![0u8; 3]).is_err());
    }
}
