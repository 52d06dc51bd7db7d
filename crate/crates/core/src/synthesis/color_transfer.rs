use crate::imgio::{lab_to_rgb, rgb_to_lab, Image, LabImage};

/// Channel std below this is treated as zero (scale factor 1).
const MIN_STD: f64 = 1e-12;

/// Matches the per-channel ℓαβ mean and standard deviation of `source` to
/// those of `reference`. Channels where `source` has no variance are shifted
/// only.
pub fn transfer_lab_stats(source: &LabImage, reference: &LabImage) -> LabImage {
    let src = source.channel_stats();
    let dst = reference.channel_stats();
    let mut out = source.clone();
    for px in out.data.chunks_exact_mut(3) {
        for c in 0..3 {
            let (ms, ss) = src[c];
            let (mr, sr) = dst[c];
            let gain = if ss < MIN_STD { 1.0 } else { sr / ss };
            px[c] = (px[c] - ms) * gain + mr;
        }
    }
    out
}

/// Statistics-matching colour transfer in ℓαβ, clipped back to `[0, 1]`.
pub fn reinhard_transfer(source: &Image, reference: &Image) -> Image {
    lab_to_rgb(&transfer_lab_stats(
        &rgb_to_lab(source),
        &rgb_to_lab(reference),
    ))
}
