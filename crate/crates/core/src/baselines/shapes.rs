use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::affine_warp_pair;
use crate::error::{Error, Result};
use crate::imgio::Image;
use crate::raster::{Grid, Mask};
use crate::synthesis::{reinhard_transfer, StereoTuple};

/// Disparity of every pasted patch is drawn from this range (pixels).
pub const PATCH_DISPARITY_RANGE: (f32, f32) = (50.0, 150.0);

const POLYGON_IRREGULARITY: f64 = 0.5;
const POLYGON_SPIKYNESS: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Rectangle,
    PartialEllipse,
    Polygon,
    ThinObject,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Rectangle,
        ShapeKind::PartialEllipse,
        ShapeKind::Polygon,
        ShapeKind::ThinObject,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShapeGeometry {
    /// Inclusive pixel-coordinate bounds.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Semi-axes and angles in degrees. A sweep of 360 degrees or more is a
    /// full ellipse; anything less is filled as a pie sector.
    Ellipse {
        center: (f64, f64),
        axes: (f64, f64),
        rotation: f64,
        start: f64,
        end: f64,
    },
    Polygon {
        center: (f64, f64),
        vertices: Vec<(f64, f64)>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub geometry: ShapeGeometry,
    pub disparity_offset: f32,
}

impl ShapeSpec {
    pub fn is_full_ellipse(&self) -> bool {
        matches!(self.geometry, ShapeGeometry::Ellipse { start, end, .. } if (end - start).abs() >= 360.0)
    }

    fn center(&self) -> (f64, f64) {
        match &self.geometry {
            ShapeGeometry::Rectangle { x0, x1, y0, y1 } => ((x0 + x1) / 2.0, (y0 + y1) / 2.0),
            ShapeGeometry::Ellipse { center, .. } | ShapeGeometry::Polygon { center, .. } => {
                *center
            }
        }
    }

    fn outline(&self) -> Vec<(f64, f64)> {
        match &self.geometry {
            ShapeGeometry::Rectangle { x0, x1, y0, y1 } => {
                vec![(*x0, *y0), (*x1, *y0), (*x1, *y1), (*x0, *y1)]
            }
            ShapeGeometry::Ellipse {
                center,
                axes,
                rotation,
                start,
                end,
            } => ellipse_polygon(*center, *axes, *rotation, *start, *end),
            ShapeGeometry::Polygon { vertices, .. } => vertices.clone(),
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn ellipse_polygon(
    center: (f64, f64),
    axes: (f64, f64),
    rotation: f64,
    start: f64,
    end: f64,
) -> Vec<(f64, f64)> {
    let (mut start, mut end) = if start > end {
        (end, start)
    } else {
        (start, end)
    };
    let full = end - start >= 360.0;
    if full {
        start = 0.0;
        end = 360.0;
    }
    let (sa, ca) = rotation.to_radians().sin_cos();
    let point = |deg: f64| {
        let (s, c) = deg.to_radians().sin_cos();
        (
            center.0 + axes.0 * c * ca - axes.1 * s * sa,
            center.1 + axes.0 * c * sa + axes.1 * s * ca,
        )
    };
    let mut pts = Vec::new();
    let mut a = start;
    while a < end {
        pts.push(point(a));
        a += 1.0;
    }
    pts.push(point(end));
    if !full {
        pts.push(center);
    }
    pts
}

fn polygon_vertices<R: Rng + ?Sized>(
    rng: &mut R,
    center: (f64, f64),
    ave_radius: f64,
    sides: usize,
) -> Vec<(f64, f64)> {
    let irregularity = POLYGON_IRREGULARITY * TAU / sides as f64;
    let step = TAU / sides as f64;
    let mut steps: Vec<f64> = (0..sides)
        .map(|_| uniform(rng, step - irregularity, step + irregularity))
        .collect();
    let k = steps.iter().sum::<f64>() / TAU;
    for s in &mut steps {
        *s /= k;
    }
    let radius = Normal::new(ave_radius, POLYGON_SPIKYNESS * ave_radius).expect("finite spread");
    let mut angle = uniform(rng, 0.0, TAU);
    let mut out = Vec::with_capacity(sides);
    for s in steps {
        let r = radius.sample(rng).clamp(0.0, 2.0 * ave_radius);
        out.push((center.0 + r * angle.cos(), center.1 + r * angle.sin()));
        angle += s;
    }
    out
}

pub fn gen_shape<R: Rng + ?Sized>(
    rng: &mut R,
    kind: ShapeKind,
    width: usize,
    height: usize,
) -> ShapeSpec {
    let (w, h) = (width as f64, height as f64);
    let geometry = match kind {
        ShapeKind::Rectangle => {
            let (a, b) = (
                uniform(rng, 0.1 * w, 0.9 * w),
                uniform(rng, 0.1 * w, 0.9 * w),
            );
            let (c, d) = (
                uniform(rng, 0.1 * h, 0.9 * h),
                uniform(rng, 0.1 * h, 0.9 * h),
            );
            ShapeGeometry::Rectangle {
                x0: a.min(b),
                x1: a.max(b),
                y0: c.min(d),
                y1: c.max(d),
            }
        }
        ShapeKind::PartialEllipse => {
            let center = (
                uniform(rng, 0.1 * w, 0.9 * w),
                uniform(rng, 0.1 * h, 0.9 * h),
            );
            let (start, end) = if rng.random_bool(0.75) {
                (0.0, 360.0)
            } else {
                (uniform(rng, 0.0, 360.0), uniform(rng, 0.0, 360.0))
            };
            let rotation = uniform(rng, 0.0, 360.0);
            let axes = (
                uniform(rng, 0.1 * w, 0.9 * w),
                uniform(rng, 0.1 * w, 0.9 * w),
            );
            ShapeGeometry::Ellipse {
                center,
                axes,
                rotation,
                start,
                end,
            }
        }
        ShapeKind::Polygon => {
            let sides = rng.random_range(3..=20usize);
            let center = (
                uniform(rng, 0.1 * w, 0.9 * w),
                uniform(rng, 0.1 * h, 0.9 * h),
            );
            let ave = uniform(rng, 0.01 * w, 0.3 * w);
            let vertices = polygon_vertices(rng, center, ave, sides);
            ShapeGeometry::Polygon { center, vertices }
        }
        ShapeKind::ThinObject => {
            let center = (
                uniform(rng, 0.1 * w, 0.9 * w),
                uniform(rng, 0.1 * h, 0.9 * h),
            );
            let minor = uniform(rng, 0.001 * h, 0.025 * h);
            let major = uniform(rng, 0.1 * w, 0.5 * w);
            let rotation = uniform(rng, 0.0, 360.0);
            ShapeGeometry::Ellipse {
                center,
                axes: (major, minor),
                rotation,
                start: 0.0,
                end: 360.0,
            }
        }
    };
    let (lo, hi) = PATCH_DISPARITY_RANGE;
    let disparity_offset = uniform(rng, lo as f64, hi as f64) as f32;
    ShapeSpec {
        kind,
        geometry,
        disparity_offset,
    }
}

/// Even-odd fill at pixel centres, unioned with the rasterised outline so
/// that thin shapes keep their pixels. Never empty: a shape that covers no
/// pixel centre marks the pixel under its centre.
pub fn rasterize_shape(spec: &ShapeSpec, width: usize, height: usize) -> Mask {
    let mut mask = Grid::new(width, height, false);
    let pts = spec.outline();
    let n = pts.len();
    let mut xs = Vec::new();
    for y in 0..height {
        let yc = y as f64;
        xs.clear();
        for i in 0..n {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            if (p.1 > yc) != (q.1 > yc) {
                xs.push(p.0 + (yc - p.1) * (q.0 - p.0) / (q.1 - p.1));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let lo = pair[0].ceil().max(0.0);
            let hi = pair[1].ceil().min(width as f64);
            let mut x = lo;
            while x < hi {
                mask.set(x as usize, y, true);
                x += 1.0;
            }
        }
    }
    let mut plot = |x: f64, y: f64| {
        let (px, py) = (x.round(), y.round());
        if px >= 0.0 && py >= 0.0 && (px as usize) < width && (py as usize) < height {
            mask.set(px as usize, py as usize, true);
        }
    };
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let steps = (q.0 - p.0).abs().max((q.1 - p.1).abs()).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            plot(p.0 + (q.0 - p.0) * t, p.1 + (q.1 - p.1) * t);
        }
    }
    if mask.count() == 0 {
        let (cx, cy) = spec.center();
        let x = (cx.round().max(0.0) as usize).min(width - 1);
        let y = (cy.round().max(0.0) as usize).min(height - 1);
        mask.set(x, y, true);
    }
    mask
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PastedShapesConfig {
    /// Maximum shift of the affine background pair.
    pub base_d_max: f32,
    /// Patch count is uniform over `0..=max_patches`.
    pub max_patches: usize,
    /// Colour-match each texture to the base left image.
    pub color_transfer: bool,
}

impl Default for PastedShapesConfig {
    fn default() -> Self {
        PastedShapesConfig {
            base_d_max: 50.0,
            max_patches: 10,
            color_transfer: true,
        }
    }
}

fn bounding_box(mask: &Mask) -> (usize, usize, usize, usize) {
    let (w, h) = mask.dims();
    let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if *mask.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    (x0, y0, x1, y1)
}

fn sample_bilinear_row(img: &Image, x: f32, y: usize) -> [f32; 3] {
    let w = img.width();
    let x = x.clamp(0.0, (w - 1) as f32);
    let x0 = x.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let f = x - x0 as f32;
    let (a, b) = (img.pixel(x0, y), img.pixel(x1, y));
    [0, 1, 2].map(|c| a[c] + (b[c] - a[c]) * f)
}

/// Copies `texture` under `placed` onto the left view with disparity
/// `delta`, and onto the right view shifted `delta` pixels left.
fn paste_mask(t: &mut StereoTuple, texture: &Image, placed: &Mask, delta: f32) {
    let (w, h) = t.dims();
    for y in 0..h {
        for x in 0..w {
            if *placed.get(x, y) {
                t.left.set_pixel(x, y, texture.pixel(x, y));
                t.disparity.set(x, y, delta);
            }
            let sx = x as f32 + delta;
            let src = sx.round();
            if src < w as f32 && *placed.get(src as usize, y) {
                t.right.set_pixel(x, y, sample_bilinear_row(texture, sx, y));
                t.hole_mask.set(x, y, false);
            }
        }
    }
}

/// Pastes textured shapes on top of an existing pair. Each patch is moved
/// to a uniformly drawn position that keeps its bounding box inside the
/// image, copied onto the left view with disparity `δ`, and onto the right
/// view shifted `δ` pixels left (clipped at the border).
pub(crate) fn paste_patches<R: Rng + ?Sized>(
    base: StereoTuple,
    pool: &[Image],
    rng: &mut R,
    cfg: &PastedShapesConfig,
) -> Result<StereoTuple> {
    let mut t = base;
    let (w, h) = t.dims();
    let reference = t.left.clone();
    let patches = rng.random_range(0..=cfg.max_patches);
    for _ in 0..patches {
        let texture = pool[rng.random_range(0..pool.len())].fit_cover(w, h);
        let texture = if cfg.color_transfer {
            reinhard_transfer(&texture, &reference)
        } else {
            texture
        };
        let kind = ShapeKind::ALL[rng.random_range(0..4)];
        let spec = gen_shape(rng, kind, w, h);
        let shape = rasterize_shape(&spec, w, h);
        let (bx0, by0, bx1, by1) = bounding_box(&shape);
        let dx = rng.random_range(0..=w - 1 - (bx1 - bx0));
        let dy = rng.random_range(0..=h - 1 - (by1 - by0));
        let mut placed = Grid::new(w, h, false);
        for y in by0..=by1 {
            for x in bx0..=bx1 {
                if *shape.get(x, y) {
                    placed.set(x - bx0 + dx, y - by0 + dy, true);
                }
            }
        }
        paste_mask(&mut t, &texture, &placed, spec.disparity_offset);
    }
    t.meta.generator = "pasted_shapes".to_string();
    Ok(t)
}

pub fn pasted_shapes_pair<R: Rng + ?Sized>(
    left: &Image,
    pool: &[Image],
    rng: &mut R,
    cfg: &PastedShapesConfig,
) -> Result<StereoTuple> {
    if pool.is_empty() {
        return Err(Error::InvalidValue(
            "pasted shapes need a nonempty texture pool".into(),
        ));
    }
    let base = affine_warp_pair(left, rng, cfg.base_d_max)?;
    paste_patches(base, pool, rng, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{apply_affine, AffineWarpParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn img(w: usize, h: usize, k: f32) -> Image {
        Image::from_fn(w, h, |x, y| {
            [((x as f32 * k).sin() + 1.0) / 2.0, y as f32 / h as f32, 0.4]
        })
    }

    #[test]
    fn rectangle_bounds_lie_in_central_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let s = gen_shape(&mut rng, ShapeKind::Rectangle, 200, 100);
            let ShapeGeometry::Rectangle { x0, x1, y0, y1 } = s.geometry else {
                panic!()
            };
            assert!(20.0 <= x0 && x0 <= x1 && x1 <= 180.0);
            assert!(10.0 <= y0 && y0 <= y1 && y1 <= 90.0);
        }
    }

    #[test]
    fn full_ellipse_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let full = (0..n)
            .filter(|_| gen_shape(&mut rng, ShapeKind::PartialEllipse, 100, 80).is_full_ellipse())
            .count();
        let rate = full as f64 / n as f64;
        assert!((rate - 0.75).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn parameter_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (w, h) = (300.0, 200.0);
        for _ in 0..2000 {
            let t = gen_shape(&mut rng, ShapeKind::ThinObject, 300, 200);
            let ShapeGeometry::Ellipse { axes, .. } = t.geometry else {
                panic!()
            };
            assert!((0.1 * w..=0.5 * w).contains(&axes.0));
            assert!((0.001 * h..=0.025 * h).contains(&axes.1));
            assert!((50.0..=150.0).contains(&t.disparity_offset));
            let p = gen_shape(&mut rng, ShapeKind::Polygon, 300, 200);
            let ShapeGeometry::Polygon { center, vertices } = p.geometry else {
                panic!()
            };
            assert!((3..=20).contains(&vertices.len()));
            for (x, y) in vertices {
                assert!(
                    ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt()
                        <= 2.0 * 0.3 * w + 1e-9
                );
            }
        }
    }

    #[test]
    fn rectangle_raster_covers_bounds() {
        let spec = ShapeSpec {
            kind: ShapeKind::Rectangle,
            geometry: ShapeGeometry::Rectangle {
                x0: 2.0,
                x1: 5.0,
                y0: 1.0,
                y1: 3.0,
            },
            disparity_offset: 60.0,
        };
        let m = rasterize_shape(&spec, 8, 6);
        for y in 0..6 {
            for x in 0..8 {
                assert_eq!(
                    *m.get(x, y),
                    (2..=5).contains(&x) && (1..=3).contains(&y),
                    "({x},{y})"
                );
            }
        }
    }

    #[test]
    fn half_ellipse_is_a_sector() {
        let spec = ShapeSpec {
            kind: ShapeKind::PartialEllipse,
            geometry: ShapeGeometry::Ellipse {
                center: (20.0, 20.0),
                axes: (10.0, 10.0),
                rotation: 0.0,
                start: 0.0,
                end: 180.0,
            },
            disparity_offset: 60.0,
        };
        let m = rasterize_shape(&spec, 40, 40);
        assert!(*m.get(20, 25));
        assert!(!*m.get(20, 15));
        // fill plus the rasterised outline
        let area = m.count() as f64;
        let pi = std::f64::consts::PI;
        assert!(
            area >= pi * 81.0 / 2.0 && area <= pi * 121.0 / 2.0 + 21.0,
            "{area}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn masks_are_nonempty(seed in any::<u64>(), k in 0usize..4, w in 8usize..120, h in 8usize..120) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = gen_shape(&mut rng, ShapeKind::ALL[k], w, h);
            let m = rasterize_shape(&spec, w, h);
            prop_assert_eq!(m.dims(), (w, h));
            prop_assert!(m.count() > 0);
        }
    }

    fn base() -> StereoTuple {
        apply_affine(
            &img(260, 60, 0.2),
            &AffineWarpParams {
                s_top: 20.0,
                s_bottom: 5.0,
                d_max: 50.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn no_patches_leaves_base_unchanged() {
        let cfg = PastedShapesConfig {
            max_patches: 0,
            ..Default::default()
        };
        let b = base();
        let t = paste_patches(
            b.clone(),
            &[img(30, 30, 1.0)],
            &mut ChaCha8Rng::seed_from_u64(0),
            &cfg,
        )
        .unwrap();
        assert_eq!(t.left, b.left);
        assert_eq!(t.right, b.right);
        assert_eq!(t.disparity, b.disparity);
    }

    #[test]
    fn patches_translate_with_their_disparity() {
        let pool = [img(100, 100, 1.3), img(80, 120, 0.7)];
        for (seed, max_patches) in (0..30).zip([1, 10].into_iter().cycle()) {
            let cfg = PastedShapesConfig {
                max_patches,
                ..Default::default()
            };
            let b = base();
            let t = paste_patches(b.clone(), &pool, &mut ChaCha8Rng::seed_from_u64(seed), &cfg)
                .unwrap();
            t.validate().unwrap();
            let (w, h) = t.dims();
            let max_bg = b.disparity.max_valid().unwrap();
            for y in 0..h {
                for x in 0..w {
                    let d = t.disparity.get(x, y);
                    let left_changed = t.left.pixel(x, y) != b.left.pixel(x, y);
                    if d != b.disparity.get(x, y) {
                        assert!(d > max_bg);
                    } else {
                        assert!(!left_changed, "left changed outside patch at ({x},{y})");
                    }
                }
            }
            if max_patches > 1 {
                continue;
            }
            // the right view is unchanged wherever no patch pixel maps
            for y in 0..h {
                for x in 0..w {
                    if t.right.pixel(x, y) != b.right.pixel(x, y) {
                        let hit = (0..w).any(|sx| {
                            let d = t.disparity.get(sx, y);
                            d != b.disparity.get(sx, y) && (sx as f32 - d - x as f32).abs() <= 0.5
                        });
                        assert!(hit, "right changed without a patch at ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn empty_pool_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(
            pasted_shapes_pair(&img(100, 20, 0.1), &[], &mut rng, &Default::default()).is_err()
        );
    }

    #[test]
    fn single_rectangle_translation() {
        let mut t = base();
        let (w, h) = t.dims();
        let tex = Image::filled(w, h, [1.0, 0.0, 0.0]);
        let spec = ShapeSpec {
            kind: ShapeKind::Rectangle,
            geometry: ShapeGeometry::Rectangle {
                x0: 150.0,
                x1: 170.0,
                y0: 10.0,
                y1: 20.0,
            },
            disparity_offset: 60.0,
        };
        let m = rasterize_shape(&spec, w, h);
        paste_mask(&mut t, &tex, &m, 60.0);
        assert!((90..=110).all(|x| t.right.pixel(x, 15) == [1.0, 0.0, 0.0]));
        assert!((150..=170).all(|x| t.disparity.get(x, 15) == 60.0));
        assert_ne!(t.right.pixel(89, 15), [1.0, 0.0, 0.0]);
        assert_ne!(t.right.pixel(111, 15), [1.0, 0.0, 0.0]);
        assert!((0..w).all(|x| t.right.pixel(x, 5) == base().right.pixel(x, 5)));
    }
}
