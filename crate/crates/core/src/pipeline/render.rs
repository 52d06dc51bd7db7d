use crate::error::{Error, Result};
use crate::geometry::{depth_to_disparity, forward_warp, sharpen_disparity};
use crate::imgio::{colorize_disparity, DepthMap, Image};
use crate::raster::Mask;
use crate::synthesis::{fill_holes, reinhard_transfer, SynthesisConfig};

const GAP: usize = 4;

/// 3x5 bitmap glyphs, one row per byte, most significant of the low three
/// bits leftmost.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        's' => [0b000, 0b111, 0b110, 0b011, 0b111],
        '=' => [0b000, 0b111, 0b000, 0b111, 0b000],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        ' ' => [0; 5],
        _ => return None,
    })
}

/// Draws `text` in white on a black box with its top-left corner at
/// `(x, y)`. Characters without a glyph are skipped; drawing clips at the
/// image border.
pub fn draw_label(img: &mut Image, x: usize, y: usize, text: &str, scale: usize) {
    let scale = scale.max(1);
    let chars: Vec<[u8; 5]> = text.chars().filter_map(glyph).collect();
    let (bw, bh) = ((chars.len() * 4 + 1) * scale, 7 * scale);
    let (w, h) = img.dims();
    for py in y..(y + bh).min(h) {
        for px in x..(x + bw).min(w) {
            img.set_pixel(px, py, [0.0; 3]);
        }
    }
    for (i, g) in chars.iter().enumerate() {
        for (row, bits) in g.iter().enumerate() {
            for col in 0..3 {
                if bits >> (2 - col) & 1 == 0 {
                    continue;
                }
                let gx = x + (1 + i * 4 + col) * scale;
                let gy = y + (1 + row) * scale;
                for py in gy..(gy + scale).min(h) {
                    for px in gx..(gx + scale).min(w) {
                        img.set_pixel(px, py, [1.0; 3]);
                    }
                }
            }
        }
    }
}

/// Lays panels out row-major, `cols` per row, separated by a black gap.
/// Cells take the size of the largest panel.
pub fn compose_grid(panels: &[Image], cols: usize) -> Image {
    assert!(!panels.is_empty() && cols > 0);
    let cw = panels.iter().map(Image::width).max().unwrap_or(0);
    let ch = panels.iter().map(Image::height).max().unwrap_or(0);
    let cols = cols.min(panels.len());
    let rows = panels.len().div_ceil(cols);
    let mut out = Image::filled(
        cols * cw + (cols - 1) * GAP,
        rows * ch + (rows - 1) * GAP,
        [0.0; 3],
    );
    for (k, p) in panels.iter().enumerate() {
        let (ox, oy) = ((k % cols) * (cw + GAP), (k / cols) * (ch + GAP));
        for y in 0..p.height() {
            for x in 0..p.width() {
                out.set_pixel(ox + x, oy + y, p.pixel(x, y));
            }
        }
    }
    out
}

/// White where the mask is set.
pub fn mask_image(mask: &Mask) -> Image {
    let (w, h) = mask.dims();
    Image::from_fn(
        w,
        h,
        |x, y| if *mask.get(x, y) { [1.0; 3] } else { [0.0; 3] },
    )
}

#[derive(Clone, Debug)]
pub struct SweepPanel {
    pub s: f32,
    pub hole_fraction: f64,
    pub right: Image,
}

fn render_right(
    left: &Image,
    depth: &DepthMap,
    background: &Image,
    s: f32,
    cfg: &SynthesisConfig,
    sharpen: bool,
) -> Result<(Image, crate::imgio::DisparityMap, Mask)> {
    let disparity = depth_to_disparity(depth, s, cfg.disparity_mode)?;
    let disparity = match (&cfg.sharpen, sharpen) {
        (Some(sc), true) => sharpen_disparity(&disparity, sc)?,
        _ => disparity,
    };
    let warp = forward_warp(left, &disparity, cfg.warp_mode)?;
    let (w, h) = left.dims();
    let bg = background.fit_cover(w, h);
    let bg = if cfg.color_transfer {
        reinhard_transfer(&bg, left)
    } else {
        bg
    };
    Ok((fill_holes(&warp, &bg)?, disparity, warp.holes))
}

fn format_scale(s: f32) -> String {
    let t = format!("{s:.2}");
    t.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Renders the filled right view once per scale `s` and tiles the results,
/// each labelled with its `s`. Augmentation and cropping are not applied.
pub fn sweep_scale_render(
    left: &Image,
    depth: &DepthMap,
    background: &Image,
    s_list: &[f32],
    cfg: &SynthesisConfig,
) -> Result<(Image, Vec<SweepPanel>)> {
    if s_list.is_empty() {
        return Err(Error::InvalidValue(
            "scale sweep needs at least one value".into(),
        ));
    }
    if let Some(bad) = s_list.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidValue(format!(
            "sweep scales must be positive, got {bad}"
        )));
    }
    Error::check_dims("depth", depth.dims(), left.dims())?;
    let mut panels = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let (right, _, holes) = render_right(left, depth, background, s, cfg, true)?;
        panels.push(SweepPanel {
            s,
            hole_fraction: holes.fraction(),
            right,
        });
    }
    let label_scale = (left.height() / 80).max(1);
    let labelled: Vec<Image> = panels
        .iter()
        .map(|p| {
            let mut img = p.right.clone();
            draw_label(
                &mut img,
                0,
                0,
                &format!("s={}", format_scale(p.s)),
                label_scale,
            );
            img
        })
        .collect();
    Ok((compose_grid(&labelled, 3), panels))
}

/// Left image, filled right view, colourised disparity and hole mask for a
/// single scale, with or without depth sharpening.
pub fn inspect_panels(
    left: &Image,
    depth: &DepthMap,
    background: &Image,
    s: f32,
    cfg: &SynthesisConfig,
    sharpen: bool,
) -> Result<Vec<Image>> {
    Error::check_dims("depth", depth.dims(), left.dims())?;
    let (right, disparity, holes) = render_right(left, depth, background, s, cfg, sharpen)?;
    let max = disparity.max_valid().filter(|m| *m > 0.0).unwrap_or(1.0);
    Ok(vec![
        left.clone(),
        right,
        colorize_disparity(&disparity, max),
        mask_image(&holes),
    ])
}
