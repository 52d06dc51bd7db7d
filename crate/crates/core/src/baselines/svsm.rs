use crate::error::Result;
use crate::geometry::{warp_disparity_plane_stack, PlaneWeights};
use crate::imgio::{DisparityMap, Image};
use crate::synthesis::{fill_masked, reinhard_transfer, StereoTuple, TupleMeta};

/// Number of integer disparity planes in the one-hot encoding.
pub const SVSM_PLANES: usize = 192;

/// Selection-module pair: the monocular disparity is one-hot encoded over
/// integer planes (rounded, clamped to `[0, SVSM_PLANES - 1]`) and warped
/// plane by plane. The emitted disparity is that rounded, clamped map.
pub fn svsm_pair(
    left: &Image,
    mono_disparity: &DisparityMap,
    background: &Image,
    color_transfer: bool,
) -> Result<StereoTuple> {
    let weights = PlaneWeights::one_hot(mono_disparity, SVSM_PLANES);
    let warp = warp_disparity_plane_stack(left, &weights)?;
    let (w, h) = left.dims();
    let bg = background.fit_cover(w, h);
    let bg = if color_transfer {
        reinhard_transfer(&bg, left)
    } else {
        bg
    };
    let right = fill_masked(&warp.right, &warp.holes, &bg)?;
    let max = (SVSM_PLANES - 1) as f32;
    let values = mono_disparity
        .values()
        .iter()
        .map(|d| d.round().min(max))
        .collect();
    let disparity = DisparityMap::with_validity(w, h, values, mono_disparity.validity().to_vec())?;
    Ok(StereoTuple {
        left: left.clone(),
        right,
        disparity,
        hole_mask: warp.holes,
        meta: TupleMeta::new("svsm", 0),
    })
}
