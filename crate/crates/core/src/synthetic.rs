//! Seeded two-class synthetic scene standing in for real imagery.
//!
//! A 100x100 grid of 10 m pixels is tiled into 10x10 blocks; 15 blocks
//! (15% of the pixels) are plastic cover. Every pixel's 13-band spectrum is
//! drawn from its class mean plus independent Gaussian noise whose standard
//! deviation is the band's class-mean gap divided by [`SEPARATION_SIGMAS`],
//! then rounded to a nonnegative digital number.

use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::raster_io::{BandId, LabelMask};
use crate::resample::AlignedCube;
use crate::rng::SplitMix64;

pub const SCENE_ROWS: usize = 100;
pub const SCENE_COLS: usize = 100;
const BLOCK: usize = 10;
const PLASTIC_BLOCKS: usize = 15;

/// Gap between the class means of every band, in within-class standard
/// deviations.
pub const SEPARATION_SIGMAS: f64 = 4.5;

/// Mixed sea and bare-soil background, digital numbers in canonical band order.
pub const BACKGROUND_MEAN: [f64; 13] = [
    1350.0, 1100.0, 950.0, 800.0, 900.0, 1000.0, 1050.0, 1100.0, 1100.0, 400.0, 15.0, 900.0, 600.0,
];

/// Greenhouse plastic: brighter across the visible, NIR and SWIR.
pub const PLASTIC_MEAN: [f64; 13] = [
    1600.0, 1450.0, 1400.0, 1400.0, 1500.0, 1600.0, 1700.0, 1800.0, 1800.0, 600.0, 25.0, 1500.0,
    1100.0,
];

pub fn band_sigma(band: usize) -> f64 {
    (PLASTIC_MEAN[band] - BACKGROUND_MEAN[band]).abs() / SEPARATION_SIGMAS
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub cube: AlignedCube,
    pub truth: LabelMask,
}

pub fn make_synthetic(seed: u64) -> Result<SyntheticScene> {
    let mut rng = SplitMix64::new(seed);
    let blocks_per_row = SCENE_COLS / BLOCK;
    let mut blocks: Vec<usize> = (0..(SCENE_ROWS / BLOCK) * blocks_per_row).collect();
    rng.shuffle(&mut blocks);
    let mut labels = vec![0u8; SCENE_ROWS * SCENE_COLS];
    for &b in &blocks[..PLASTIC_BLOCKS] {
        let (br, bc) = (b / blocks_per_row, b % blocks_per_row);
        for r in br * BLOCK..(br + 1) * BLOCK {
            for c in bc * BLOCK..(bc + 1) * BLOCK {
                labels[r * SCENE_COLS + c] = 1;
            }
        }
    }

    let n_bands = BandId::ALL.len();
    let mut values = Vec::with_capacity(labels.len() * n_bands);
    for &label in &labels {
        let mean = if label == 1 {
            &PLASTIC_MEAN
        } else {
            &BACKGROUND_MEAN
        };
        for (b, m) in mean.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push((m + band_sigma(b) * z).round().max(0.0) as f32);
        }
    }
    Ok(SyntheticScene {
        cube: AlignedCube::new(SCENE_ROWS, SCENE_COLS, BandId::ALL.to_vec(), values)?,
        truth: LabelMask::new(SCENE_ROWS, SCENE_COLS, labels)?,
    })
}
