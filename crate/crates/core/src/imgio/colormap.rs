use super::{DisparityMap, Image};

// Polynomial fit of the "turbo" colormap.
fn turbo(t: f64) -> [f32; 3] {
    let t = t.clamp(0.0, 1.0);
    let poly = |c: [f64; 6]| c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
    [
        poly([
            0.135_721_38,
            4.615_392_60,
            -42.660_322_58,
            132.131_082_34,
            -152.942_393_96,
            59.286_379_43,
        ]),
        poly([
            0.091_402_61,
            2.194_188_39,
            4.842_966_58,
            -14.185_033_33,
            4.277_298_57,
            2.829_566_04,
        ]),
        poly([
            0.106_673_30,
            12.641_946_08,
            -60.582_048_36,
            110.362_767_71,
            -89.903_109_12,
            27.348_249_73,
        ]),
    ]
    .map(|v| v.clamp(0.0, 1.0) as f32)
}

/// Renders disparity with a perceptual colormap scaled to `[0, max_for_scale]`.
/// Invalid pixels are black.
pub fn colorize_disparity(map: &DisparityMap, max_for_scale: f32) -> Image {
    assert!(max_for_scale > 0.0, "max_for_scale must be positive");
    Image::from_fn(map.width(), map.height(), |x, y| match map.value(x, y) {
        Some(d) => turbo(d as f64 / max_for_scale as f64),
        None => [0.0; 3],
    })
}
