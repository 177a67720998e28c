//! Lanczos3 alignment of multi-resolution bands onto the finest grid.
//!
//! Output pixel `o` along an axis maps to source coordinate
//! `(o + 0.5) / scale - 0.5` (pixel centers stay concentric). The six taps
//! around that coordinate are clamped to the source edge and their weights
//! normalized to sum to one, so constant images stay constant.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster_io::{Band, BandId, BandStack};

/// Kernel half-width in source pixels.
pub const LANCZOS_LOBES: f64 = 3.0;

/// Integer upscale factors between the 10/20/60 m grids.
pub const SUPPORTED_SCALES: [usize; 4] = [1, 2, 3, 6];

/// All bands on one grid, pixel-interleaved: `values[(r * cols + c) * n_bands + b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCube {
    rows: usize,
    cols: usize,
    bands: Vec<BandId>,
    values: Vec<f32>,
}

impl AlignedCube {
    /// `bands` must be strictly increasing (canonical order, no repeats).
    pub fn new(rows: usize, cols: usize, bands: Vec<BandId>, values: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 || bands.is_empty() {
            return Err(Error::InvalidArgument(
                "cube dimensions must be positive".into(),
            ));
        }
        if let Some(w) = bands.windows(2).find(|w| w[0] >= w[1]) {
            return if w[0] == w[1] {
                Err(Error::DuplicateBand(w[0]))
            } else {
                Err(Error::InvalidArgument(format!(
                    "cube bands out of canonical order: {} before {}",
                    w[0], w[1]
                )))
            };
        }
        if values.len() != rows * cols * bands.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols}x{} cube",
                values.len(),
                bands.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("cube values must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            bands,
            values,
        })
    }

    /// Interleaves per-band planes (each row-major `rows * cols`).
    pub fn from_planes(
        rows: usize,
        cols: usize,
        mut planes: Vec<(BandId, Vec<f32>)>,
    ) -> Result<Self> {
        planes.sort_by_key(|(id, _)| *id);
        let n = planes.len();
        for (id, plane) in &planes {
            if plane.len() != rows * cols {
                return Err(Error::DimensionMismatch(format!(
                    "{id} plane has {} values, expected {}",
                    plane.len(),
                    rows * cols
                )));
            }
        }
        let mut values = vec![0.0f32; rows * cols * n];
        for (b, (_, plane)) in planes.iter().enumerate() {
            for (p, &v) in plane.iter().enumerate() {
                values[p * n + b] = v;
            }
        }
        let bands = planes.into_iter().map(|(id, _)| id).collect();
        Self::new(rows, cols, bands, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn band_ids(&self) -> &[BandId] {
        &self.bands
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn band_index(&self, id: BandId) -> Result<usize> {
        self.bands
            .iter()
            .position(|&b| b == id)
            .ok_or(Error::MissingBand(id))
    }

    /// Band vector of pixel `p` (row-major pixel index).
    #[inline]
    pub fn pixel(&self, p: usize) -> &[f32] {
        let n = self.bands.len();
        &self.values[p * n..(p + 1) * n]
    }

    pub fn plane(&self, id: BandId) -> Result<Vec<f32>> {
        let b = self.band_index(id)?;
        Ok(self
            .values
            .chunks_exact(self.bands.len())
            .map(|px| px[b])
            .collect())
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `sinc(x) * sinc(x / 3)` on `|x| < 3`, zero elsewhere.
pub fn lanczos3_kernel(x: f64) -> f64 {
    if x.abs() >= LANCZOS_LOBES {
        return 0.0;
    }
    // exact zeros at the nonzero integers
    if x != 0.0 && x.fract() == 0.0 {
        return 0.0;
    }
    sinc(x) * sinc(x / LANCZOS_LOBES)
}

/// Normalized taps for each output sample along one axis.
fn axis_taps(src_len: usize, scale: usize) -> Vec<[(usize, f64); 6]> {
    let last = src_len as i64 - 1;
    (0..src_len * scale)
        .map(|o| {
            let s = (o as f64 + 0.5) / scale as f64 - 0.5;
            let base = s.floor() as i64;
            let mut taps = [(0usize, 0.0f64); 6];
            let mut sum = 0.0;
            for (t, k) in (base - 2..=base + 3).enumerate() {
                let w = lanczos3_kernel(s - k as f64);
                taps[t] = (k.clamp(0, last) as usize, w);
                sum += w;
            }
            for tap in &mut taps {
                tap.1 /= sum;
            }
            taps
        })
        .collect()
}

fn check_scale(scale: usize) -> Result<()> {
    if SUPPORTED_SCALES.contains(&scale) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "unsupported scale {scale} (expected one of 1, 2, 3, 6)"
        )))
    }
}

/// Separable Lanczos3 upsampling of a row-major float grid by `scale`.
pub fn resample_grid(src: &[f64], rows: usize, cols: usize, scale: usize) -> Result<Vec<f64>> {
    check_scale(scale)?;
    if rows == 0 || cols == 0 || src.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {rows}x{cols} grid",
            src.len()
        )));
    }
    if scale == 1 {
        return Ok(src.to_vec());
    }
    let out_rows = rows * scale;
    let out_cols = cols * scale;
    let col_taps = axis_taps(cols, scale);
    let row_taps = axis_taps(rows, scale);

    let mut horiz = vec![0.0; rows * out_cols];
    horiz
        .par_chunks_mut(out_cols)
        .zip(src.par_chunks(cols))
        .for_each(|(out, row)| {
            for (o, taps) in out.iter_mut().zip(&col_taps) {
                *o = taps.iter().map(|&(k, w)| w * row[k]).sum();
            }
        });

    let mut out = vec![0.0; out_rows * out_cols];
    out.par_chunks_mut(out_cols)
        .zip(row_taps.par_iter())
        .for_each(|(out_row, taps)| {
            for (c, o) in out_row.iter_mut().enumerate() {
                *o = taps.iter().map(|&(k, w)| w * horiz[k * out_cols + c]).sum();
            }
        });
    Ok(out)
}

pub fn resample_band(band: &Band, scale: usize) -> Result<Vec<f64>> {
    let src: Vec<f64> = band.pixels.iter().map(|&p| p as f64).collect();
    resample_grid(&src, band.rows, band.cols, scale)
}

/// Resamples every band to the finest grid present in the stack.
pub fn align_stack(stack: &BandStack) -> Result<AlignedCube> {
    let bands = stack.bands();
    let finest = bands
        .iter()
        .min_by(|a, b| a.spec.native_gsd_m.total_cmp(&b.spec.native_gsd_m))
        .ok_or_else(|| Error::InvalidArgument("empty band stack".into()))?;
    let (rows, cols, gsd) = (finest.rows, finest.cols, finest.spec.native_gsd_m);

    let mut planes = Vec::with_capacity(bands.len());
    for band in bands {
        let ratio = band.spec.native_gsd_m / gsd;
        let scale = ratio.round() as usize;
        if (ratio - scale as f64).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{}: {} m is not an integer multiple of {gsd} m",
                band.spec.id, band.spec.native_gsd_m
            )));
        }
        if band.rows * scale != rows || band.cols * scale != cols {
            return Err(Error::DimensionMismatch(format!(
                "{}: {}x{} x{scale} does not land on the {rows}x{cols} grid",
                band.spec.id, band.rows, band.cols
            )));
        }
        log::debug!("aligning {} at scale {scale}", band.spec.id);
        let plane = resample_band(band, scale)?;
        planes.push((band.spec.id, plane.into_iter().map(|v| v as f32).collect()));
    }
    AlignedCube::from_planes(rows, cols, planes)
}
