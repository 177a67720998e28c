//! Plastic-cover detection in 13-band Sentinel-2 style rasters.
//!
//! The pipeline runs band-stack import ([`raster_io`]), Lanczos3 alignment
//! onto the 10 m grid ([`resample`]), normalized-difference index maps
//! ([`indexes`]), sample assembly ([`dataset`]), a 13-10-1 perceptron
//! trained by conjugate gradient ([`mlp`]), and confusion-matrix evaluation
//! ([`eval`]).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod indexes;
pub mod mlp;
pub mod pipeline;
pub mod raster_io;
pub mod resample;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
