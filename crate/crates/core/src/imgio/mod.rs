//! Raster types and the on-disk formats used by stereo datasets.
//!
//! Colour images live in memory as `f32` RGB in `[0, 1]` whatever their
//! source bit depth. Disparity maps carry an explicit validity plane so that
//! the dataset conventions for missing ground truth (`+inf` in PFM, code 0 in
//! 16-bit PNG) survive a round trip.

mod colormap;
pub(crate) mod lab;
mod pfm;
mod png16;

use std::path::Path;

use image::{DynamicImage, ImageReader};

pub use colormap::colorize_disparity;
pub use lab::{lab_to_rgb, lab_to_rgb_pixel, rgb_to_lab, rgb_to_lab_pixel, LabImage, LAB_FLOOR};
pub use pfm::{read_pfm, write_pfm};
pub use png16::{read_disparity_png16, write_disparity_png16, PNG16_MAX_DISPARITY};

use crate::error::{Error, Result};
use crate::raster::{self, Grid, Mask};

/// RGB raster with values in `[0, 1]`, interleaved row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    /// Wraps raw interleaved RGB data, rejecting non-finite or out of range
    /// samples.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvalidValue(format!(
                "image data length {} does not match {width}x{height}x3",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidValue(format!(
                "image sample {bad} outside [0, 1]"
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// Like [`Image::new`] but clamps into `[0, 1]`; NaN becomes 0.
    pub fn from_raw_clamped(width: usize, height: usize, mut data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height * 3);
        for v in &mut data {
            *v = clamp01(*v);
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).map(clamp01));
            }
        }
        Image {
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb.map(clamp01));
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Image {
        assert!(x0 + width <= self.width && y0 + height <= self.height);
        Image::from_fn(width, height, |x, y| self.pixel(x0 + x, y0 + y))
    }

    pub fn resize(&self, new_width: usize, new_height: usize) -> Image {
        if (new_width, new_height) == self.dims() {
            return self.clone();
        }
        let data = raster::resize_bilinear(
            &self.data,
            self.width,
            self.height,
            3,
            new_width,
            new_height,
        );
        Image::from_raw_clamped(new_width, new_height, data)
    }

    pub fn flip_horizontal(&self) -> Image {
        Image::from_fn(self.width, self.height, |x, y| {
            self.pixel(self.width - 1 - x, y)
        })
    }

    /// Isotropic scale-to-cover followed by a centre crop to exactly
    /// `width × height`.
    pub fn fit_cover(&self, width: usize, height: usize) -> Image {
        if self.dims() == (width, height) {
            return self.clone();
        }
        let r = (width as f64 / self.width as f64).max(height as f64 / self.height as f64);
        let sw = ((self.width as f64 * r).round() as usize).max(width);
        let sh = ((self.height as f64 * r).round() as usize).max(height);
        let scaled = self.resize(sw, sh);
        scaled.crop((sw - width) / 2, (sh - height) / 2, width, height)
    }

    /// Rec. 601 luma of one pixel.
    #[inline]
    pub fn luma(rgb: [f32; 3]) -> f32 {
        0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
    }
}

#[inline]
pub(crate) fn clamp01(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Strictly positive depth (relative units), aligned to the left image.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidValue(format!(
                "depth data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidValue(format!(
                "depth must be finite and strictly positive, found {bad}"
            )));
        }
        Ok(DepthMap {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        Self::new(width, height, Grid::from_fn(width, height, f).into_vec())
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Converts a fully valid disparity-like map (as read from PFM/PNG16)
    /// into depth. Any invalid or non-positive sample is an error.
    pub fn from_disparity_map(map: &DisparityMap) -> Result<Self> {
        if map.valid.iter().any(|v| !v) {
            return Err(Error::InvalidValue(
                "depth map contains invalid samples".into(),
            ));
        }
        Self::new(map.width, map.height, map.data.clone())
    }
}

/// Horizontal pixel offsets aligned to the left image, with per-pixel
/// validity.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
    valid: Vec<bool>,
}

impl DisparityMap {
    /// All-valid map. Values must be finite and non-negative.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidValue(format!(
                "disparity data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidValue(format!(
                "disparity must be finite and non-negative, found {bad}"
            )));
        }
        let valid = vec![true; data.len()];
        Ok(DisparityMap {
            width,
            height,
            data,
            valid,
        })
    }

    /// Map with explicit validity. Samples flagged valid must be finite and
    /// non-negative; invalid samples are stored as 0.
    pub fn with_validity(
        width: usize,
        height: usize,
        mut data: Vec<f32>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        if data.len() != width * height || valid.len() != data.len() {
            return Err(Error::InvalidValue(format!(
                "disparity buffers do not match {width}x{height}"
            )));
        }
        for (v, ok) in data.iter_mut().zip(&valid) {
            if *ok {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::InvalidValue(format!(
                        "valid disparity must be finite and non-negative, found {v}"
                    )));
                }
            } else {
                *v = 0.0;
            }
        }
        Ok(DisparityMap {
            width,
            height,
            data,
            valid,
        })
    }

    /// Marks every non-finite or negative sample invalid instead of failing.
    pub fn from_raw_lenient(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height);
        let valid: Vec<bool> = data.iter().map(|v| v.is_finite() && *v >= 0.0).collect();
        let data = data
            .into_iter()
            .zip(&valid)
            .map(|(v, &ok)| if ok { v } else { 0.0 })
            .collect();
        DisparityMap {
            width,
            height,
            data,
            valid,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        Self::new(width, height, Grid::from_fn(width, height, f).into_vec())
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
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

    /// Raw values; invalid entries read as 0.
    pub fn values(&self) -> &[f32] {
        &self.data
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    /// `Some(value)` for valid pixels.
    #[inline]
    pub fn value(&self, x: usize, y: usize) -> Option<f32> {
        let i = y * self.width + x;
        self.valid[i].then_some(self.data[i])
    }

    /// Sets a valid sample. Panics on a negative or non-finite value.
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        assert!(value.is_finite() && value >= 0.0, "bad disparity {value}");
        let i = y * self.width + x;
        self.data[i] = value;
        self.valid[i] = true;
    }

    pub fn invalidate(&mut self, x: usize, y: usize) {
        let i = y * self.width + x;
        self.data[i] = 0.0;
        self.valid[i] = false;
    }

    pub fn valid_mask(&self) -> Mask {
        Grid::from_vec(self.width, self.height, self.valid.clone()).expect("sizes agree")
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// Largest valid value, or `None` when nothing is valid.
    pub fn max_valid(&self) -> Option<f32> {
        self.data
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .reduce(f32::max)
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> DisparityMap {
        assert!(x0 + width <= self.width && y0 + height <= self.height);
        let mut data = Vec::with_capacity(width * height);
        let mut valid = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + x0..row + x0 + width]);
            valid.extend_from_slice(&self.valid[row + x0..row + x0 + width]);
        }
        DisparityMap {
            width,
            height,
            data,
            valid,
        }
    }

    /// Resamples to `new_width × new_height` and multiplies every value by
    /// the horizontal scale factor, since disparity is a horizontal offset.
    /// Values are bilinear; validity is nearest-neighbour.
    pub fn resize_scaled(&self, new_width: usize, new_height: usize) -> DisparityMap {
        if (new_width, new_height) == self.dims() {
            return self.clone();
        }
        let factor = new_width as f64 / self.width as f64;
        let data = raster::resize_bilinear(
            &self.data,
            self.width,
            self.height,
            1,
            new_width,
            new_height,
        )
        .into_iter()
        .map(|v| ((v as f64) * factor).max(0.0) as f32)
        .collect();
        let valid = self
            .valid_mask()
            .resize_nearest(new_width, new_height)
            .into_vec();
        DisparityMap::with_validity(new_width, new_height, data, valid)
            .expect("resample stays valid")
    }
}

/// Reads an 8- or 16-bit PNG or a JPEG into `[0, 1]` RGB. Grayscale is
/// replicated to three channels and alpha is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let data: Vec<f32> = match decoded {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => decoded
            .to_rgb8()
            .into_raw()
            .into_iter()
            .map(|c| c as f32 / 255.0)
            .collect(),
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => decoded
            .to_rgb16()
            .into_raw()
            .into_iter()
            .map(|c| c as f32 / 65535.0)
            .collect(),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported sample type {:?}", other.color()),
            ))
        }
    };
    Image::new(w, h, data)
}

/// Writes an 8-bit RGB PNG (codes `round(v · 255)`).
pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = image
        .data
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect();
    let buf = image::RgbImage::from_raw(image.width as u32, image.height as u32, bytes)
        .expect("buffer length matches");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a depth map from PFM or 16-bit PNG (`code / 256`), chosen by
/// extension. Every sample must be strictly positive.
pub fn read_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let map = read_disparity_any(path)?;
    DepthMap::from_disparity_map(&map).map_err(|e| Error::format(path, e.to_string()))
}

/// Dispatches on extension: `.pfm` or `.png` (16-bit).
pub fn read_disparity_any(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("pfm") => read_pfm(path),
        Some("png") => read_disparity_png16(path),
        _ => Err(Error::format(path, "expected a .pfm or .png file")),
    }
}

/// Reads only the width and height from an image, PFM, or PNG header.
pub fn probe_dims(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    if extension(path).as_deref() == Some("pfm") {
        return pfm::read_pfm_dims(path);
    }
    let (w, h) = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .into_dimensions()
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })?;
    Ok((w as usize, h as usize))
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}
