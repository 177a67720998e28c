//! Aligned-cube container: a JSON header plus a pixel-interleaved
//! little-endian `f32` payload.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_atomic, BandId};
use crate::error::{Error, Result};
use crate::resample::AlignedCube;

const CUBE_DTYPE: &str = "f32le";
const CUBE_INTERLEAVE: &str = "pixel";

#[derive(Serialize, Deserialize)]
struct CubeHeader {
    rows: usize,
    cols: usize,
    bands: Vec<String>,
    file: String,
    dtype: String,
    interleave: String,
}

/// Writes the header to `path` and the payload to `<path stem>.f32` beside it.
pub fn write_cube(cube: &AlignedCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidArgument(format!("bad cube path {}", path.display())))?;
    let file = format!("{stem}.f32");
    let header = CubeHeader {
        rows: cube.rows(),
        cols: cube.cols(),
        bands: cube.band_ids().iter().map(|b| b.to_string()).collect(),
        file: file.clone(),
        dtype: CUBE_DTYPE.into(),
        interleave: CUBE_INTERLEAVE.into(),
    };
    let payload: Vec<u8> = cube.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(path.with_file_name(&file), &payload)?;
    write_atomic(
        path,
        &serde_json::to_vec_pretty(&header).expect("header serializes"),
    )
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<AlignedCube> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: CubeHeader = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if header.dtype != CUBE_DTYPE || header.interleave != CUBE_INTERLEAVE {
        return Err(Error::Format(format!(
            "{}: unsupported cube layout {}/{}",
            path.display(),
            header.dtype,
            header.interleave
        )));
    }
    let bands = header
        .bands
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<BandId>>>()?;
    let payload_path = path.with_file_name(&header.file);
    let bytes = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let expected = header.rows * header.cols * bands.len() * 4;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{}: {} bytes, expected {expected}",
            payload_path.display(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    AlignedCube::new(header.rows, header.cols, bands, values)
}
