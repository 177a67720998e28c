//! Normalized-difference indexes, the Floating Debris Index, and
//! thresholded masks.

use crate::error::{Error, Result};
use crate::raster_io::{BandId, LabelMask};
use crate::resample::AlignedCube;

/// Baseline slope of the FDI: `10 * (λ_B8 - λ_B4) / (λ_B11 - λ_B4)` with the
/// MSI center wavelengths 842, 665 and 1610 nm.
pub const FDI_WAVELENGTH_FACTOR: f64 = 10.0 * (842.0 - 665.0) / (1610.0 - 665.0);

#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

/// `(a - b) / (a + b)`, defined as 0 when both are zero.
pub fn normalized_difference(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "normalized difference needs finite nonnegative inputs, got ({a}, {b})"
        )));
    }
    let sum = a + b;
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok(((a - b) / sum).clamp(-1.0, 1.0))
}

/// Per-pixel normalized difference of two cube bands.
///
/// Lanczos ringing can push resampled digital numbers slightly below zero;
/// those are clamped to zero before the ratio.
fn nd_map(cube: &AlignedCube, a: BandId, b: BandId) -> Result<IndexMap> {
    let ia = cube.band_index(a)?;
    let ib = cube.band_index(b)?;
    let values = (0..cube.n_pixels())
        .map(|p| {
            let px = cube.pixel(p);
            normalized_difference((px[ia] as f64).max(0.0), (px[ib] as f64).max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexMap {
        rows: cube.rows(),
        cols: cube.cols(),
        values,
    })
}

/// `(B8 - B9) / (B8 + B9)`
pub fn b8b9_index(cube: &AlignedCube) -> Result<IndexMap> {
    nd_map(cube, BandId::B8, BandId::B9)
}

/// `(B8 - B4) / (B8 + B4)`
pub fn ndvi(cube: &AlignedCube) -> Result<IndexMap> {
    nd_map(cube, BandId::B8, BandId::B4)
}

#[inline]
pub fn fdi_value(b6: f64, b8: f64, b11: f64) -> f64 {
    b8 - (b6 + (b11 - b6) * FDI_WAVELENGTH_FACTOR)
}

/// Floating Debris Index: NIR departure from the B6→B11 baseline.
pub fn fdi(cube: &AlignedCube) -> Result<IndexMap> {
    let i6 = cube.band_index(BandId::B6)?;
    let i8 = cube.band_index(BandId::B8)?;
    let i11 = cube.band_index(BandId::B11)?;
    let values = (0..cube.n_pixels())
        .map(|p| {
            let px = cube.pixel(p);
            fdi_value(px[i6] as f64, px[i8] as f64, px[i11] as f64)
        })
        .collect();
    Ok(IndexMap {
        rows: cube.rows(),
        cols: cube.cols(),
        values,
    })
}

/// Label 1 where `FDI >= fdi_min` and `NDVI <= ndvi_max`.
pub fn combined_index_mask(cube: &AlignedCube, ndvi_max: f64, fdi_min: f64) -> Result<LabelMask> {
    if !(ndvi_max.is_finite() && fdi_min.is_finite()) {
        return Err(Error::InvalidArgument("thresholds must be finite".into()));
    }
    let veg = ndvi(cube)?;
    let debris = fdi(cube)?;
    let labels = veg
        .values
        .iter()
        .zip(&debris.values)
        .map(|(&n, &f)| u8::from(f >= fdi_min && n <= ndvi_max))
        .collect();
    LabelMask::new(cube.rows(), cube.cols(), labels)
}

/// Label 1 where `value >= t`.
pub fn threshold_map(map: &IndexMap, t: f64) -> LabelMask {
    let labels = map.values.iter().map(|&v| u8::from(v >= t)).collect();
    LabelMask::new(map.rows, map.cols, labels).expect("index map dimensions are valid")
}
