//! Assembly of training tuples: hole filling with colour-transferred
//! background texture, photometric augmentation of the right view, and the
//! crop/resize policy.

mod augment;
mod color_transfer;
mod crop;
mod holes;
mod tuple;

pub use augment::{augment_right, AugmentConfig, AugmentParams};
pub use color_transfer::{reinhard_transfer, transfer_lab_stats};
pub use crop::{crop_or_resize, CropPolicy};
pub use holes::{fill_holes, fill_masked};
pub use tuple::{finalize_tuple, synthesize_tuple, StereoTuple, SynthesisConfig, TupleMeta};
