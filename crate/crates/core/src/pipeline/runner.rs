use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Generator, Manifest};
use crate::baselines::{affine_warp_pair, pasted_shapes_pair, superpixel_pair, svsm_pair};
use crate::error::{Error, Result};
use crate::geometry::{depth_to_disparity, sample_scale};
use crate::imgio::{read_depth, read_image, write_disparity_png16, write_image, write_pfm, Image};
use crate::rng::{row_seed, stream_rng, BACKGROUND_STREAM, SYNTHESIS_STREAM};
use crate::synthesis::{finalize_tuple, synthesize_tuple, StereoTuple};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub workers: usize,
    /// Also write `disp/{i}.png` in the 16-bit KITTI encoding.
    pub png_disparity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub row: usize,
    pub left: PathBuf,
    #[serde(flatten)]
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub generator: Generator,
    pub global_seed: u64,
    /// SHA-256 of the canonical JSON of generator, seed and config.
    pub config_hash: String,
    pub ok: usize,
    pub failed: usize,
    pub wall_time_secs: f64,
    pub rows: Vec<RowRecord>,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    generator: Generator,
    global_seed: u64,
    config: &'a super::GeneratorConfig,
}

fn resolved_config(m: &Manifest) -> ResolvedConfig<'_> {
    ResolvedConfig {
        generator: m.generator,
        global_seed: m.global_seed,
        config: &m.config,
    }
}

fn config_hash(m: &Manifest) -> String {
    let json = serde_json::to_vec(&resolved_config(m)).expect("config serialises");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Index of another pool entry, drawn uniformly; a single-entry pool yields
/// itself.
fn pick_other<R: Rng + ?Sized>(rng: &mut R, row: usize, n: usize) -> usize {
    if n <= 1 {
        return row;
    }
    let j = rng.random_range(0..n - 1);
    if j >= row {
        j + 1
    } else {
        j
    }
}

/// Reads pool entry `j`, moving on cyclically (skipping `row`) past entries
/// that fail to load. Falls back to the mirrored left image when nothing
/// else is readable.
fn load_pool_image(m: &Manifest, row: usize, j: usize, left: &Image) -> (Image, String) {
    let n = m.rows.len();
    for k in 0..n {
        let idx = (j + k) % n;
        if idx == row && n > 1 {
            continue;
        }
        let path = &m.rows[idx].left;
        match read_image(path) {
            Ok(img) => return (img, path.display().to_string()),
            Err(e) => log::warn!(
                "row {row}: skipping unreadable background {}: {e}",
                path.display()
            ),
        }
    }
    (left.flip_horizontal(), "mirrored left".to_string())
}

/// Generates the tuple for one manifest row. The result depends only on the
/// manifest and the row index.
pub fn generate_row(m: &Manifest, row: usize) -> Result<StereoTuple> {
    let r = &m.rows[row];
    let seed = row_seed(m.global_seed, row as u64);
    let mut pick = stream_rng(seed, BACKGROUND_STREAM);
    let mut rng = stream_rng(seed, SYNTHESIS_STREAM);
    let left = read_image(&r.left)?;
    let depth = || -> Result<_> {
        let path = r.depth.as_ref().ok_or_else(|| Error::Manifest {
            row: Some(row),
            reason: format!("generator {} needs a depth map", m.generator),
        })?;
        let depth = read_depth(path)?;
        Error::check_dims("depth", depth.dims(), left.dims())?;
        Ok(depth)
    };
    let bg_index = pick_other(&mut pick, row, m.rows.len());
    let background = || load_pool_image(m, row, bg_index, &left);
    let cfg = &m.config;
    let mut sources = vec![r.left.display().to_string()];

    let mut tuple = match m.generator {
        Generator::Mono => {
            let (bg, name) = background();
            sources.push(name);
            synthesize_tuple(&left, &depth()?, &bg, seed, &cfg.synthesis)?
        }
        Generator::Affine => {
            let t = affine_warp_pair(&left, &mut rng, cfg.affine_d_max)?;
            finalize_tuple(t, &mut rng, &cfg.synthesis)?
        }
        Generator::Shapes => {
            let draws = cfg.shapes.max_patches.max(1);
            let mut pool = Vec::with_capacity(draws);
            for _ in 0..draws {
                let j = pick_other(&mut pick, row, m.rows.len());
                let (img, name) = load_pool_image(m, row, j, &left);
                pool.push(img);
                sources.push(name);
            }
            let t = pasted_shapes_pair(&left, &pool, &mut rng, &cfg.shapes)?;
            finalize_tuple(t, &mut rng, &cfg.synthesis)?
        }
        Generator::Superpixels => {
            let (bg, name) = background();
            sources.push(name);
            let t = superpixel_pair(&left, &bg, &mut rng, &cfg.superpixels)?;
            finalize_tuple(t, &mut rng, &cfg.synthesis)?
        }
        Generator::Svsm => {
            let s = sample_scale(&mut rng, &cfg.synthesis.scale);
            let mono = depth_to_disparity(&depth()?, s, cfg.synthesis.disparity_mode)?;
            let (bg, name) = background();
            sources.push(name);
            let mut t = svsm_pair(&left, &mono, &bg, cfg.synthesis.color_transfer)?;
            t.meta.scale = Some(s);
            finalize_tuple(t, &mut rng, &cfg.synthesis)?
        }
    };
    if let Some(d) = &r.depth {
        if m.generator.needs_depth() {
            sources.insert(1, d.display().to_string());
        }
    }
    tuple.meta.seed = seed;
    tuple.meta.generator = m.generator.name().to_string();
    tuple.meta.sources = sources;
    Ok(tuple)
}

/// Writes through a temporary sibling and renames into place.
fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("tmp");
    let tmp = path.with_file_name(format!(".{name}.partial.{ext}"));
    let result = write(&tmp).and_then(|_| fs::rename(&tmp, path).map_err(|e| Error::io(path, e)));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_atomic(path, |tmp| {
        let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        text.push('\n');
        fs::write(tmp, text).map_err(|e| Error::io(tmp, e))
    })
}

fn write_tuple(out: &Path, i: usize, t: &StereoTuple, png_disparity: bool) -> Result<()> {
    write_atomic(&out.join(format!("left/{i}.png")), |p| {
        write_image(&t.left, p)
    })?;
    write_atomic(&out.join(format!("right/{i}.png")), |p| {
        write_image(&t.right, p)
    })?;
    write_atomic(&out.join(format!("disp/{i}.pfm")), |p| {
        write_pfm(&t.disparity, p)
    })?;
    if png_disparity {
        write_atomic(&out.join(format!("disp/{i}.png")), |p| {
            write_disparity_png16(&t.disparity, p)
        })?;
    }
    write_json(&out.join(format!("meta/{i}.json")), &t.meta)
}

/// Generates every row on a pool of `workers` threads and writes the output
/// tree. Row failures are recorded in the ledger and do not stop the run.
pub fn run(m: &Manifest, opts: &RunOptions) -> Result<RunLedger> {
    let start = Instant::now();
    let out = &opts.out_dir;
    for sub in ["left", "right", "disp", "meta"] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    write_json(&out.join("config.json"), &resolved_config(m))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<RowRecord> = pool.install(|| {
        (0..m.rows.len())
            .into_par_iter()
            .map(|i| {
                let status = match generate_row(m, i)
                    .and_then(|t| write_tuple(out, i, &t, opts.png_disparity))
                {
                    Ok(()) => RowStatus::Ok,
                    Err(e) => {
                        log::warn!("row {i} ({}) failed: {e}", m.rows[i].left.display());
                        RowStatus::Failed {
                            reason: e.to_string(),
                        }
                    }
                };
                RowRecord {
                    row: i,
                    left: m.rows[i].left.clone(),
                    status,
                }
            })
            .collect()
    });
    let ok = rows.iter().filter(|r| r.status == RowStatus::Ok).count();
    let ledger = RunLedger {
        generator: m.generator,
        global_seed: m.global_seed,
        config_hash: config_hash(m),
        ok,
        failed: rows.len() - ok,
        wall_time_secs: start.elapsed().as_secs_f64(),
        rows,
    };
    write_json(&out.join("ledger.json"), &ledger)?;
    Ok(ledger)
}
