use crate::error::{Error, Result};
use crate::geometry::WarpResult;
use crate::imgio::Image;
use crate::raster::Mask;

/// Replaces the hole pixels of a warp with the background pixel at the same
/// coordinates. A background of other dimensions is first fitted by
/// scale-to-cover and centre crop. Non-hole pixels are copied bit for bit.
pub fn fill_holes(warp: &WarpResult, background: &Image) -> Result<Image> {
    fill_masked(&warp.right, &warp.holes, background)
}

pub fn fill_masked(raw: &Image, holes: &Mask, background: &Image) -> Result<Image> {
    Error::check_dims("hole mask", holes.dims(), raw.dims())?;
    let (w, h) = raw.dims();
    let fitted;
    let bg = if background.dims() == (w, h) {
        background
    } else {
        fitted = background.fit_cover(w, h);
        &fitted
    };
    let mut out = raw.clone();
    for y in 0..h {
        for x in 0..w {
            if *holes.get(x, y) {
                out.set_pixel(x, y, bg.pixel(x, y));
            }
        }
    }
    Ok(out)
}
