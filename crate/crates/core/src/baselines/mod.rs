//! Alternative stereo-pair generators used for data-quality comparisons.

mod affine;
mod felzenszwalb;
mod shapes;
mod superpixels;
mod svsm;

pub use affine::{affine_warp_pair, apply_affine, AffineWarpParams};
pub use felzenszwalb::{felzenszwalb_segment, Segmentation};
pub use shapes::{
    gen_shape, pasted_shapes_pair, rasterize_shape, PastedShapesConfig, ShapeGeometry, ShapeKind,
    ShapeSpec,
};
pub use superpixels::{
    superpixel_disparity, superpixel_pair, SuperpixelConfig, SuperpixelPlaneParams,
};
pub use svsm::{svsm_pair, SVSM_PLANES};
