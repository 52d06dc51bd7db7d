#![allow(dead_code)]

use std::path::PathBuf;

use monostereo::imgio::read_image;
use monostereo::{DepthMap, Image};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    paths.sort();
    paths
}

pub fn fixtures() -> Vec<(String, Image)> {
    fixture_paths()
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, read_image(&p).expect("fixture decodes"))
        })
        .collect()
}

/// Stand-in for a monocular depth estimate: a receding ground plane with a
/// few soft-edged blobs in front of it.
pub fn scene_depth(w: usize, h: usize) -> DepthMap {
    let blobs = [
        (0.3, 0.55, 0.12, 0.6),
        (0.7, 0.4, 0.18, 0.5),
        (0.5, 0.8, 0.08, 0.7),
    ];
    DepthMap::from_fn(w, h, |x, y| {
        let (u, v) = (x as f32 / w as f32, y as f32 / h as f32);
        let ground = 1.0 + 9.0 * (1.0 - v).powi(2);
        let mut z = ground;
        for (cx, cy, r, depth) in blobs {
            let d2 = ((u - cx) * (u - cx) + (v - cy) * (v - cy)) / (r * r);
            // steep logistic edge, about two pixels wide at fixture scale
            let inside = 1.0 / (1.0 + ((d2.sqrt() - 1.0) * 40.0).exp());
            z = z * (1.0 - inside) + depth * inside;
        }
        z
    })
    .unwrap()
}

/// Depth whose induced disparity is smooth everywhere (no edges). The field
/// is defined in normalized coordinates so its shape does not depend on size.
pub fn smooth_depth(w: usize, h: usize) -> DepthMap {
    DepthMap::from_fn(w, h, |x, y| {
        let (u, v) = (x as f32 / w as f32, y as f32 / h as f32);
        let f = 1.5 + 0.3 * (6.0 * u).sin() + 0.2 * (5.0 * v).cos() + 0.6 * u;
        1.0 / f
    })
    .unwrap()
}
