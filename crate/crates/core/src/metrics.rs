//! End-point error and thresholded error rates over ground-truth-valid
//! pixels, optionally restricted to a dataset-provided non-occluded mask.
//!
//! The threshold test is a plain absolute `|pred - gt| > τ`; the relative
//! clause of the KITTI D1 metric is not applied.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageReader};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{read_disparity_any, read_pfm, DisparityMap};
use crate::raster::{Grid, Mask};

/// Pixels that take part in evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidMask(Mask);

impl ValidMask {
    /// Ground-truth validity, intersected with `noc` when given.
    pub fn from_ground_truth(gt: &DisparityMap, noc: Option<&Mask>) -> Result<Self> {
        let mut mask = gt.valid_mask();
        if let Some(noc) = noc {
            Error::check_dims("occlusion mask", noc.dims(), gt.dims())?;
            for (m, &n) in mask.data_mut().iter_mut().zip(noc.data()) {
                *m &= n;
            }
        }
        Ok(ValidMask(mask))
    }

    pub fn mask(&self) -> &Mask {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    #[default]
    All,
    Noc,
}

/// Absolute errors at masked pixels. A prediction marked invalid counts as
/// zero disparity.
fn masked_errors<'a>(
    pred: &'a DisparityMap,
    gt: &'a DisparityMap,
    mask: &'a ValidMask,
) -> Result<impl Iterator<Item = f64> + 'a> {
    Error::check_dims("prediction", pred.dims(), gt.dims())?;
    Error::check_dims("mask", mask.0.dims(), gt.dims())?;
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let pv = pred.values().iter().zip(pred.validity());
    Ok(pv
        .zip(gt.values())
        .zip(mask.0.data())
        .filter(|(_, &m)| m)
        .map(|(((&p, &ok), &g), _)| {
            let p = if ok { p as f64 } else { 0.0 };
            (p - g as f64).abs()
        }))
}

pub fn epe(pred: &DisparityMap, gt: &DisparityMap, mask: &ValidMask) -> Result<f64> {
    let (sum, n) = masked_errors(pred, gt, mask)?.fold((0.0, 0usize), |(s, n), e| (s + e, n + 1));
    Ok(sum / n as f64)
}

/// Percentage of masked pixels whose error is strictly greater than `tau`.
pub fn threshold_error(
    pred: &DisparityMap,
    gt: &DisparityMap,
    mask: &ValidMask,
    tau: f64,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidValue(format!(
            "threshold must be positive, got {tau}"
        )));
    }
    let (bad, n) = masked_errors(pred, gt, mask)?.fold((0usize, 0usize), |(b, n), e| {
        (b + (e > tau) as usize, n + 1)
    });
    Ok(100.0 * bad as f64 / n as f64)
}

/// Bilinear resize to the ground-truth resolution, with values scaled by
/// the horizontal factor.
pub fn resize_prediction(pred: &DisparityMap, width: usize, height: usize) -> DisparityMap {
    if pred.dims() == (width, height) {
        return pred.clone();
    }
    pred.resize_scaled(width, height)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdError {
    pub tau: f64,
    pub percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub epe: f64,
    pub threshold_errors: Vec<ThresholdError>,
    pub pixel_count: usize,
    pub mask_kind: MaskKind,
}

pub fn evaluate(
    pred: &DisparityMap,
    gt: &DisparityMap,
    noc: Option<&Mask>,
    taus: &[f64],
) -> Result<EvalReport> {
    let pred = resize_prediction(pred, gt.width(), gt.height());
    let mask = ValidMask::from_ground_truth(gt, noc)?;
    let threshold_errors = taus
        .iter()
        .map(|&tau| {
            Ok(ThresholdError {
                tau,
                percent: threshold_error(&pred, gt, &mask, tau)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        epe: epe(&pred, gt, &mask)?,
        threshold_errors,
        pixel_count: mask.count(),
        mask_kind: if noc.is_some() {
            MaskKind::Noc
        } else {
            MaskKind::All
        },
    })
}

/// Reads a non-occluded mask: 8-bit images mark pixels equal to 255, 16-bit
/// images mark nonzero pixels, PFM marks finite samples.
pub fn read_noc_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    if path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("pfm"))
        == Some(true)
    {
        return Ok(read_pfm(path)?.valid_mask());
    }
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<bool> = match img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => img
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v != 0)
            .collect(),
        _ => img
            .to_luma8()
            .into_raw()
            .into_iter()
            .map(|v| v == 255)
            .collect(),
    };
    Grid::from_vec(w, h, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub stem: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectoryReport {
    /// Sorted by stem.
    pub images: Vec<ImageReport>,
    /// Unweighted mean over images; `pixel_count` is the total.
    pub aggregate: Option<EvalReport>,
    /// Stems present on only one side (or lacking a mask).
    pub skipped: Vec<String>,
}

fn disparity_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("pfm" | "png")) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            // prefer PFM when both encodings exist
            let keep_existing = out.get(stem).is_some_and(|p: &PathBuf| {
                p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pfm"))
            });
            if !keep_existing {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Evaluates every prediction in `pred_dir` against the ground truth with
/// the same file stem in `gt_dir`. Stems without a counterpart are skipped
/// and listed. With `MaskKind::Noc`, masks are read from `noc_dir`.
pub fn evaluate_directory(
    pred_dir: &Path,
    gt_dir: &Path,
    taus: &[f64],
    mask_kind: MaskKind,
    noc_dir: Option<&Path>,
) -> Result<DirectoryReport> {
    let noc_files = match (mask_kind, noc_dir) {
        (MaskKind::All, _) => None,
        (MaskKind::Noc, Some(dir)) => Some(disparity_files(dir)?),
        (MaskKind::Noc, None) => {
            return Err(Error::Config(
                "noc evaluation needs a mask directory".into(),
            ))
        }
    };
    let preds = disparity_files(pred_dir)?;
    let gts = disparity_files(gt_dir)?;
    let mut skipped: Vec<String> = preds
        .keys()
        .chain(gts.keys())
        .filter(|s| !(preds.contains_key(*s) && gts.contains_key(*s)))
        .cloned()
        .collect();
    let mut jobs = Vec::new();
    for (stem, pred) in &preds {
        let Some(gt) = gts.get(stem) else { continue };
        let noc = match &noc_files {
            Some(files) => match files.get(stem) {
                Some(p) => Some(p.clone()),
                None => {
                    skipped.push(stem.clone());
                    continue;
                }
            },
            None => None,
        };
        jobs.push((stem.clone(), pred.clone(), gt.clone(), noc));
    }
    skipped.sort();
    skipped.dedup();
    for s in &skipped {
        log::warn!("skipping {s}: no matching file");
    }

    let images = jobs
        .par_iter()
        .map(|(stem, pred, gt, noc)| {
            let pred = read_disparity_any(pred)?;
            let gt = read_disparity_any(gt)?;
            let noc = noc.as_ref().map(read_noc_mask).transpose()?;
            Ok(ImageReport {
                stem: stem.clone(),
                report: evaluate(&pred, &gt, noc.as_ref(), taus)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(
        &images.iter().map(|r| &r.report).collect::<Vec<_>>(),
        taus,
        mask_kind,
    );
    Ok(DirectoryReport {
        images,
        aggregate,
        skipped,
    })
}

fn aggregate(reports: &[&EvalReport], taus: &[f64], mask_kind: MaskKind) -> Option<EvalReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    Some(EvalReport {
        epe: reports.iter().map(|r| r.epe).sum::<f64>() / n,
        threshold_errors: taus
            .iter()
            .enumerate()
            .map(|(i, &tau)| ThresholdError {
                tau,
                percent: reports
                    .iter()
                    .map(|r| r.threshold_errors[i].percent)
                    .sum::<f64>()
                    / n,
            })
            .collect(),
        pixel_count: reports.iter().map(|r| r.pixel_count).sum(),
        mask_kind,
    })
}

impl DirectoryReport {
    /// Aligned plain-text table, one row per image plus the mean.
    pub fn to_table(&self) -> String {
        let taus: Vec<f64> = self
            .aggregate
            .as_ref()
            .map(|a| a.threshold_errors.iter().map(|t| t.tau).collect())
            .unwrap_or_default();
        let width = self
            .images
            .iter()
            .map(|r| r.stem.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}  {:>8}", "image", "EPE");
        for t in &taus {
            let _ = write!(out, "  {:>8}", format!(">{t}px"));
        }
        let _ = writeln!(out, "  {:>10}", "pixels");
        let mut row = |name: &str, r: &EvalReport| {
            let _ = write!(out, "{name:<width$}  {:>8.3}", r.epe);
            for t in &r.threshold_errors {
                let _ = write!(out, "  {:>7.2}%", t.percent);
            }
            let _ = writeln!(out, "  {:>10}", r.pixel_count);
        };
        for r in &self.images {
            row(&r.stem, &r.report);
        }
        if let Some(a) = &self.aggregate {
            row("mean", a);
        }
        if !self.skipped.is_empty() {
            let _ = writeln!(
                out,
                "skipped {}: {}",
                self.skipped.len(),
                self.skipped.join(", ")
            );
        }
        out
    }
}
