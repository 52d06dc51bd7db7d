use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{DepthMap, DisparityMap};

/// Uniform range for the depth-to-disparity scale factor, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSampler {
    pub d_min: f32,
    pub d_max: f32,
}

impl Default for ScaleSampler {
    fn default() -> Self {
        ScaleSampler {
            d_min: 50.0,
            d_max: 225.0,
        }
    }
}

impl ScaleSampler {
    pub fn new(d_min: f32, d_max: f32) -> Result<Self> {
        let s = ScaleSampler { d_min, d_max };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_min.is_finite()
            && self.d_max.is_finite()
            && 0.0 < self.d_min
            && self.d_min <= self.d_max
        {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "scale range requires 0 < d_min <= d_max, got [{}, {}]",
                self.d_min, self.d_max
            )))
        }
    }
}

/// Draws `s ~ U[d_min, d_max]`. Consumes exactly one `f64` from `rng`.
pub fn sample_scale<R: Rng + ?Sized>(rng: &mut R, sampler: &ScaleSampler) -> f32 {
    let u: f64 = rng.random();
    let (lo, hi) = (sampler.d_min as f64, sampler.d_max as f64);
    ((lo + (hi - lo) * u) as f32).clamp(sampler.d_min, sampler.d_max)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisparityMode {
    /// `s · min(Z) / Z`: the nearest pixel gets exactly `s`, everything else
    /// lies in `(0, s]`.
    #[default]
    MaxDisparity,
    /// `s · max(Z) / Z`: the farthest pixel gets `s`, nearer pixels more.
    Literal,
}

pub fn depth_to_disparity(depth: &DepthMap, s: f32, mode: DisparityMode) -> Result<DisparityMap> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidValue(format!(
            "scale must be positive, got {s}"
        )));
    }
    let z = depth.data();
    let reference = match mode {
        DisparityMode::MaxDisparity => z.iter().copied().fold(f32::INFINITY, f32::min),
        DisparityMode::Literal => z.iter().copied().fold(0.0, f32::max),
    } as f64;
    let s = s as f64;
    let data = z
        .iter()
        .map(|&zi| (s * (reference / zi as f64)) as f32)
        .collect();
    DisparityMap::new(depth.width(), depth.height(), data)
}
