//! Synthesis of stereo training tuples (left image, synthesized right image,
//! disparity) from single images and monocular depth maps, together with
//! baseline pair generators and disparity evaluation metrics.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod imgio;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod synthesis;

pub use error::{Error, Result};
pub use imgio::{DepthMap, DisparityMap, Image};
pub use raster::{Grid, Mask};
