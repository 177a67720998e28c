//! On-disk formats: band-stack container, PGM bands and masks, float
//! rasters, and the aligned-cube container.
//!
//! Every writer goes through [`write_atomic`], so a failed call never leaves
//! a partially written file at the destination.

mod bands;
mod cube;
mod float_raster;
mod pgm;
mod stack;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use bands::{canonical_specs, BandId, BandSpec, SUPPORTED_GSD_M};
pub use cube::{read_cube, write_cube};
pub use float_raster::{read_float_raster, sidecar_path, write_float_raster, FloatRaster};
pub use pgm::{import_pgm_band, read_mask, write_mask, write_pgm_band, LabelMask};
pub use stack::{load_stack, save_stack, Band, BandStack, Manifest, ManifestBand};

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
