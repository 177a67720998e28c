use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{Error, Result};

/// Row-major `f32` grid as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatRaster {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    rows: usize,
    cols: usize,
}

/// `values.f32` -> `values.f32.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Stores `values` as little-endian `f32` at `path` with a `{rows, cols}`
/// JSON sidecar at `<path>.json`. Values must stay finite after narrowing.
pub fn write_float_raster(
    values: &[f64],
    rows: usize,
    cols: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {rows}x{cols} raster",
            values.len()
        )));
    }
    let mut payload = Vec::with_capacity(values.len() * 4);
    for (i, &v) in values.iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite raster value {v} at index {i}"
            )));
        }
        payload.extend_from_slice(&narrow.to_le_bytes());
    }
    let sidecar = serde_json::to_vec(&Sidecar { rows, cols }).expect("sidecar serializes");
    write_atomic(path, &payload)?;
    write_atomic(sidecar_path(path), &sidecar)
}

pub fn read_float_raster(path: impl AsRef<Path>) -> Result<FloatRaster> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let Sidecar { rows, cols } = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != rows * cols * 4 {
        return Err(Error::Format(format!(
            "{}: {} bytes for a {rows}x{cols} f32 raster",
            path.display(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(FloatRaster { rows, cols, values })
}
