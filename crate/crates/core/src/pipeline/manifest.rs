use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{PastedShapesConfig, SuperpixelConfig};
use crate::error::{Error, Result};
use crate::imgio::probe_dims;
use crate::synthesis::SynthesisConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    Mono,
    Affine,
    Shapes,
    Superpixels,
    Svsm,
}

impl Generator {
    pub const ALL: [Generator; 5] = [
        Generator::Mono,
        Generator::Affine,
        Generator::Shapes,
        Generator::Superpixels,
        Generator::Svsm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Mono => "mono",
            Generator::Affine => "affine",
            Generator::Shapes => "shapes",
            Generator::Superpixels => "superpixels",
            Generator::Svsm => "svsm",
        }
    }

    pub fn needs_depth(self) -> bool {
        matches!(self, Generator::Mono | Generator::Svsm)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown generator {s:?}")))
    }
}

/// Settings for every generator; only the section for the selected one is
/// consulted, along with `synthesis` (augmentation and crop apply to all).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub synthesis: SynthesisConfig,
    pub affine_d_max: f32,
    pub shapes: PastedShapesConfig,
    pub superpixels: SuperpixelConfig,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            synthesis: SynthesisConfig::default(),
            affine_d_max: 192.0,
            shapes: PastedShapesConfig::default(),
            superpixels: SuperpixelConfig::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.synthesis.validate()?;
        if !(self.affine_d_max > 0.0) {
            return Err(Error::Config(format!(
                "affine_d_max must be positive, got {}",
                self.affine_d_max
            )));
        }
        if !(self.shapes.base_d_max > 0.0) {
            return Err(Error::Config("shapes.base_d_max must be positive".into()));
        }
        let sp = &self.superpixels;
        if !(0.0..=1.0).contains(&sp.foreground_prob)
            || !(sp.offset_max >= 0.0)
            || !(sp.clip_max > 0.0)
        {
            return Err(Error::Config(format!("invalid superpixel settings {sp:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub left: PathBuf,
    #[serde(default)]
    pub depth: Option<PathBuf>,
    #[serde(default = "default_split")]
    pub split: String,
}

fn default_split() -> String {
    "train".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub global_seed: u64,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default)]
    pub config: GeneratorConfig,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Self {
        Manifest {
            global_seed: 0,
            generator: Generator::default(),
            config: GeneratorConfig::default(),
            rows,
        }
    }

    /// Checks the row count, that every referenced file exists, that depth
    /// is present where the generator needs it, and that image and depth
    /// dimensions agree.
    pub fn check(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Manifest {
                row: None,
                reason: "no rows".into(),
            });
        }
        self.config.validate()?;
        for (i, row) in self.rows.iter().enumerate() {
            let err = |reason: String| Error::Manifest {
                row: Some(i),
                reason,
            };
            if !row.left.is_file() {
                return Err(err(format!("missing image {}", row.left.display())));
            }
            let dims = probe_dims(&row.left).map_err(|e| err(e.to_string()))?;
            match &row.depth {
                Some(depth) => {
                    if !depth.is_file() {
                        return Err(err(format!("missing depth {}", depth.display())));
                    }
                    let ddims = probe_dims(depth).map_err(|e| err(e.to_string()))?;
                    if ddims != dims {
                        return Err(err(format!(
                            "depth is {}x{} but image is {}x{}",
                            ddims.0, ddims.1, dims.0, dims.1
                        )));
                    }
                }
                None if self.generator.needs_depth() => {
                    return Err(err(format!(
                        "generator {} needs a depth map",
                        self.generator
                    )));
                }
                None => {}
            }
        }
        Ok(())
    }
}

/// Tab-separated `left, depth, split`, one row per line. Depth may be empty
/// or `-`; split defaults to `train`. Blank lines, `#` comments and a
/// leading `left` header are ignored.
fn parse_tsv(text: &str) -> Result<Vec<ManifestRow>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if rows.is_empty() && fields[0].eq_ignore_ascii_case("left") {
            continue;
        }
        if fields.len() > 3 || fields[0].is_empty() {
            return Err(Error::Manifest {
                row: Some(rows.len()),
                reason: format!("line {}: expected `left<TAB>depth<TAB>split`", n + 1),
            });
        }
        let depth = fields
            .get(1)
            .filter(|d| !d.is_empty() && **d != "-")
            .map(PathBuf::from);
        let split = fields
            .get(2)
            .filter(|s| !s.is_empty())
            .map_or_else(default_split, |s| s.to_string());
        rows.push(ManifestRow {
            left: PathBuf::from(fields[0]),
            depth,
            split,
        });
    }
    Ok(rows)
}

/// Parses a manifest without touching the files it references. `.json`
/// files hold a full `Manifest`; anything else is read as TSV.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    } else {
        Ok(Manifest::new(parse_tsv(&text)?))
    }
}

pub fn validate_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let m = load_manifest(path)?;
    m.check()?;
    Ok(m)
}
