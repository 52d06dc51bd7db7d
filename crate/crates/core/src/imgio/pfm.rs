//! Single-channel Portable Float Map (`Pf`), the Middlebury disparity format.
//!
//! Header: `Pf\n<width> <height>\n<scale>\n`, where a negative scale means
//! little-endian samples. Rows are stored bottom-up. Non-finite samples mark
//! missing ground truth and are written back as `+inf`.

use std::fs;
use std::path::Path;

use super::DisparityMap;
use crate::error::{Error, Result};

struct Header {
    width: usize,
    height: usize,
    little_endian: bool,
    data_offset: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Option<String> {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos).ok_or_else(|| Error::format(path, "empty file"))?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => {
            return Err(Error::format(
                path,
                "three-channel PFM; expected one channel",
            ))
        }
        _ => return Err(Error::format(path, format!("bad PFM magic {magic:?}"))),
    }
    let dim = |name: &str, pos: &mut usize| -> Result<usize> {
        next_token(pos)
            .and_then(|t| t.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::format(path, format!("bad PFM {name}")))
    };
    let width = dim("width", &mut pos)?;
    let height = dim("height", &mut pos)?;
    let scale: f64 = next_token(&mut pos)
        .and_then(|t| t.parse().ok())
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::format(path, "bad PFM scale"))?;
    // exactly one whitespace byte separates the header from the samples
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(path, "truncated PFM header"));
    }
    Ok(Header {
        width,
        height,
        little_endian: scale < 0.0,
        data_offset: pos + 1,
    })
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(path, &bytes)?;
    let (w, h) = (header.width, header.height);
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(path, "PFM dimensions overflow"))?;
    let body = &bytes[header.data_offset..];
    if body.len() < need {
        return Err(Error::format(
            path,
            format!("PFM body has {} bytes, expected {need}", body.len()),
        ));
    }
    let mut data = vec![0f32; w * h];
    for (i, chunk) in body[..need].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if header.little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (x, file_row) = (i % w, i / w);
        data[(h - 1 - file_row) * w + x] = v;
    }
    Ok(DisparityMap::from_raw_lenient(w, h, data))
}

/// Header-only probe.
pub(crate) fn read_pfm_dims(path: &Path) -> Result<(usize, usize)> {
    use std::io::Read;
    let mut head = Vec::with_capacity(128);
    fs::File::open(path)
        .map_err(|e| Error::io(path, e))?
        .take(128)
        .read_to_end(&mut head)
        .map_err(|e| Error::io(path, e))?;
    let header = parse_header(path, &head)?;
    Ok((header.width, header.height))
}

/// Writes little-endian `Pf` with scale `-1.0`. Invalid pixels become `+inf`.
pub fn write_pfm(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = map.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = map.value(x, y).unwrap_or(f32::INFINITY);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
