//! Band-stack container: a JSON manifest plus one raw little-endian `u16`
//! file per band.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bands::{BandId, BandSpec};
use super::write_atomic;
use crate::error::{Error, Result};

const BAND_DTYPE: &str = "u16le";

/// One raster band at its native resolution, digital numbers row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub spec: BandSpec,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u16>,
}

impl Band {
    pub fn new(spec: BandSpec, rows: usize, cols: usize, pixels: Vec<u16>) -> Result<Self> {
        spec.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "{}: band dimensions must be positive",
                spec.id
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}: {} pixels for a {rows}x{cols} grid",
                spec.id,
                pixels.len()
            )));
        }
        Ok(Self {
            spec,
            rows,
            cols,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.cols + col]
    }
}

/// Co-registered bands covering one square footprint, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStack {
    bands: Vec<Band>,
    extent_m: f64,
}

impl BandStack {
    /// Validates the footprint invariants and sorts bands into canonical order.
    pub fn new(mut bands: Vec<Band>, extent_m: f64) -> Result<Self> {
        if !(extent_m.is_finite() && extent_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "extent must be positive, got {extent_m}"
            )));
        }
        let mut seen = HashSet::new();
        for band in &bands {
            if !seen.insert(band.spec.id) {
                return Err(Error::DuplicateBand(band.spec.id));
            }
            check_extent(
                band.spec.id,
                band.rows,
                band.cols,
                band.spec.native_gsd_m,
                extent_m,
            )?;
        }
        bands.sort_by_key(|b| b.spec.id);
        Ok(Self { bands, extent_m })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn extent_m(&self) -> f64 {
        self.extent_m
    }

    pub fn band(&self, id: BandId) -> Option<&Band> {
        self.bands.iter().find(|b| b.spec.id == id)
    }

    pub fn band_ids(&self) -> Vec<BandId> {
        self.bands.iter().map(|b| b.spec.id).collect()
    }

    pub fn into_bands(self) -> Vec<Band> {
        self.bands
    }
}

fn check_extent(id: BandId, rows: usize, cols: usize, gsd: f64, extent_m: f64) -> Result<()> {
    let tol = 1e-6 * extent_m;
    let ok = |n: usize| (n as f64 * gsd - extent_m).abs() <= tol;
    if ok(rows) && ok(cols) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{id}: {rows}x{cols} px at {gsd} m does not cover {extent_m} m"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub extent_m: f64,
    pub bands: Vec<ManifestBand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestBand {
    pub id: String,
    pub wavelength_nm: f64,
    pub native_gsd_m: f64,
    pub rows: usize,
    pub cols: usize,
    pub file: String,
    pub dtype: String,
}

impl Manifest {
    /// Checks every invariant that does not need the pixel payloads.
    pub fn validate(&self) -> Result<Vec<BandSpec>> {
        if !(self.extent_m.is_finite() && self.extent_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "extent must be positive, got {}",
                self.extent_m
            )));
        }
        let mut seen = HashSet::new();
        let mut specs = Vec::with_capacity(self.bands.len());
        for entry in &self.bands {
            let id: BandId = entry.id.parse()?;
            if !seen.insert(id) {
                return Err(Error::DuplicateBand(id));
            }
            if entry.dtype != BAND_DTYPE {
                return Err(Error::Format(format!(
                    "{id}: unsupported dtype {:?}, expected {BAND_DTYPE:?}",
                    entry.dtype
                )));
            }
            let spec = BandSpec {
                id,
                wavelength_nm: entry.wavelength_nm,
                native_gsd_m: entry.native_gsd_m,
            };
            spec.validate()?;
            check_extent(id, entry.rows, entry.cols, spec.native_gsd_m, self.extent_m)?;
            specs.push(spec);
        }
        Ok(specs)
    }
}

pub fn load_stack(manifest_path: impl AsRef<Path>) -> Result<BandStack> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: manifest_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let specs = manifest.validate()?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut bands = Vec::with_capacity(specs.len());
    for (entry, spec) in manifest.bands.iter().zip(specs) {
        let path = base.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let expected = entry.rows * entry.cols * 2;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "{}: payload is {} bytes, expected {expected}",
                path.display(),
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        bands.push(Band::new(spec, entry.rows, entry.cols, pixels)?);
    }
    BandStack::new(bands, manifest.extent_m)
}

/// Writes `manifest.json` and one `<id>.u16` payload per band into `dir`.
/// Returns the manifest path.
pub fn save_stack(stack: &BandStack, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(stack.bands().len());
    for band in stack.bands() {
        let file = format!("{}.u16", band.spec.id);
        let payload: Vec<u8> = band.pixels.iter().flat_map(|p| p.to_le_bytes()).collect();
        write_atomic(dir.join(&file), &payload)?;
        entries.push(ManifestBand {
            id: band.spec.id.to_string(),
            wavelength_nm: band.spec.wavelength_nm,
            native_gsd_m: band.spec.native_gsd_m,
            rows: band.rows,
            cols: band.cols,
            file,
            dtype: BAND_DTYPE.to_string(),
        });
    }
    let manifest = Manifest {
        extent_m: stack.extent_m(),
        bands: entries,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&path, &json)?;
    Ok(path)
}
