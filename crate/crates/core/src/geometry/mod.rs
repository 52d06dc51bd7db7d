//! Depth to disparity conversion, depth sharpening and forward warping.

mod disparity;
mod sharpen;
mod warp;

pub use disparity::{depth_to_disparity, sample_scale, DisparityMode, ScaleSampler};
pub use sharpen::{sharpen_disparity, sobel_response, SharpenConfig};
pub use warp::{
    forward_warp, warp_disparity_plane_stack, PlaneWarpResult, PlaneWeights, WarpMode, WarpResult,
    MIN_SPLAT_WEIGHT, OCCLUSION_MARGIN,
};
