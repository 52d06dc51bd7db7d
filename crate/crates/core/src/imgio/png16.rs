//! KITTI-style 16-bit PNG disparity: `disparity = code / 256`, code 0 is
//! missing ground truth.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageReader, Luma};

use super::DisparityMap;
use crate::error::{Error, Result};

/// Largest disparity representable by a 16-bit code.
pub const PNG16_MAX_DISPARITY: f32 = 65535.0 / 256.0;

pub fn read_disparity_png16(path: impl AsRef<Path>) -> Result<DisparityMap> {
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
    let DynamicImage::ImageLuma16(buf) = decoded else {
        return Err(Error::format(
            path,
            format!(
                "expected a 16-bit single-channel PNG, found {:?}",
                decoded.color()
            ),
        ));
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let codes = buf.into_raw();
    let valid: Vec<bool> = codes.iter().map(|&c| c != 0).collect();
    let data = codes.iter().map(|&c| c as f32 / 256.0).collect();
    DisparityMap::with_validity(w, h, data, valid)
}

/// Writes `round(d · 256)` for valid pixels and 0 for invalid ones. A valid
/// disparity that would round to code 0 is stored as code 1 so that it stays
/// valid; values above [`PNG16_MAX_DISPARITY`] are rejected.
pub fn write_disparity_png16(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = map.dims();
    let mut codes = Vec::with_capacity(w * h);
    for (&v, &ok) in map.values().iter().zip(map.validity()) {
        if !ok {
            codes.push(0u16);
            continue;
        }
        let code = (v as f64 * 256.0).round();
        if code > u16::MAX as f64 {
            return Err(Error::InvalidValue(format!(
                "disparity {v} exceeds the 16-bit PNG range"
            )));
        }
        codes.push((code as u16).max(1));
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w as u32, h as u32, codes).expect("buffer length matches");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_codes(path: &Path, w: u32, h: u32, codes: Vec<u16>) {
        ImageBuffer::<Luma<u16>, _>::from_raw(w, h, codes)
            .unwrap()
            .save(path)
            .unwrap();
    }

    #[test]
    fn codes_decode_by_256_and_zero_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.png");
        write_codes(&p, 3, 1, vec![16384, 0, 1]);
        let m = read_disparity_png16(&p).unwrap();
        assert_eq!(m.value(0, 0), Some(64.0));
        assert_eq!(m.value(1, 0), None);
        assert_eq!(m.value(2, 0), Some(1.0 / 256.0));
    }

    #[test]
    fn eight_bit_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g8.png");
        image::GrayImage::from_raw(1, 1, vec![3])
            .unwrap()
            .save(&p)
            .unwrap();
        assert!(matches!(
            read_disparity_png16(&p),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn half_quantum_bound() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.png");
        let m = DisparityMap::new(1, 1, vec![64.001]).unwrap();
        write_disparity_png16(&m, &p).unwrap();
        let back = read_disparity_png16(&p).unwrap();
        assert!((back.get(0, 0) - 64.001).abs() <= 1.0 / 512.0);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let m = DisparityMap::new(1, 1, vec![300.0]).unwrap();
        assert!(write_disparity_png16(&m, dir.path().join("o.png")).is_err());
    }

    #[test]
    fn tiny_valid_values_stay_valid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.png");
        let m = DisparityMap::new(1, 1, vec![0.0]).unwrap();
        write_disparity_png16(&m, &p).unwrap();
        assert_eq!(
            read_disparity_png16(&p).unwrap().value(0, 0),
            Some(1.0 / 256.0)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn round_trip_within_half_quantum(
            vals in proptest::collection::vec(1.0f32 / 256.0..PNG16_MAX_DISPARITY, 12)
        ) {
            let m = DisparityMap::new(4, 3, vals.clone()).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.png");
            write_disparity_png16(&m, &p).unwrap();
            let back = read_disparity_png16(&p).unwrap();
            for (a, b) in vals.iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1.0 / 512.0 + 1e-6);
            }
        }
    }
}
