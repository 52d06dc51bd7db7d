//! Decorrelated log-LMS colour space (ℓ, α, β) used for statistics-based
//! colour transfer.
//!
//! RGB → LMS uses the published 3×3 matrix; ℓαβ is an orthonormal rotation
//! of `log10(LMS)`. The inverse of the RGB → LMS matrix is computed rather
//! than taken from its rounded published form, so the round trip is exact to
//! floating-point precision.

use std::sync::LazyLock;

use super::Image;

/// RGB samples are floored here before the logarithm.
pub const LAB_FLOOR: f64 = 1.0 / 255.0;

const RGB_TO_LMS: [[f64; 3]; 3] = [
    [0.3811, 0.5783, 0.0402],
    [0.1967, 0.7244, 0.0782],
    [0.0241, 0.1288, 0.8444],
];

static LMS_TO_RGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&RGB_TO_LMS));

pub(crate) fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = cof[col][r] / det;
        }
    }
    inv
}

pub(crate) fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn rgb_to_lab_pixel(rgb: [f64; 3]) -> [f64; 3] {
    let lms = mul(&RGB_TO_LMS, rgb.map(|v| v.clamp(LAB_FLOOR, 1.0)));
    let [l, m, s] = lms.map(f64::log10);
    [
        (l + m + s) / 3f64.sqrt(),
        (l + m - 2.0 * s) / 6f64.sqrt(),
        (l - m) / 2f64.sqrt(),
    ]
}

/// Inverse of [`rgb_to_lab_pixel`]; the result is not clipped.
pub fn lab_to_rgb_pixel(lab: [f64; 3]) -> [f64; 3] {
    let a = lab[0] / 3f64.sqrt();
    let b = lab[1] / 6f64.sqrt();
    let c = lab[2] / 2f64.sqrt();
    let log_lms = [a + b + c, a + b - c, a - 2.0 * b];
    mul(&LMS_TO_RGB, log_lms.map(|v| 10f64.powf(v)))
}

/// ℓαβ raster, interleaved row-major, `f64` to keep statistics exact.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl LabImage {
    /// Per-channel `(mean, population std)`.
    pub fn channel_stats(&self) -> [(f64, f64); 3] {
        let n = (self.width * self.height).max(1) as f64;
        let mut out = [(0.0, 0.0); 3];
        for (c, slot) in out.iter_mut().enumerate() {
            let mean = self.data.iter().skip(c).step_by(3).sum::<f64>() / n;
            let var = self
                .data
                .iter()
                .skip(c)
                .step_by(3)
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n;
            *slot = (mean, var.sqrt());
        }
        out
    }
}

pub fn rgb_to_lab(img: &Image) -> LabImage {
    let mut data = Vec::with_capacity(img.data().len());
    for px in img.data().chunks_exact(3) {
        data.extend(rgb_to_lab_pixel([px[0] as f64, px[1] as f64, px[2] as f64]));
    }
    LabImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Back to RGB, clipped to `[0, 1]`.
pub fn lab_to_rgb(lab: &LabImage) -> Image {
    let mut data = Vec::with_capacity(lab.data.len());
    for px in lab.data.chunks_exact(3) {
        data.extend(lab_to_rgb_pixel([px[0], px[1], px[2]]).map(|v| v as f32));
    }
    Image::from_raw_clamped(lab.width, lab.height, data)
}
