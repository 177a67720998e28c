use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Sentinel-2 MSI band identifier. `Ord` follows the canonical band order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BandId {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
    B8A,
    B9,
    B10,
    B11,
    B12,
}

impl BandId {
    pub const ALL: [BandId; 13] = [
        BandId::B1,
        BandId::B2,
        BandId::B3,
        BandId::B4,
        BandId::B5,
        BandId::B6,
        BandId::B7,
        BandId::B8,
        BandId::B8A,
        BandId::B9,
        BandId::B10,
        BandId::B11,
        BandId::B12,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BandId::B1 => "B1",
            BandId::B2 => "B2",
            BandId::B3 => "B3",
            BandId::B4 => "B4",
            BandId::B5 => "B5",
            BandId::B6 => "B6",
            BandId::B7 => "B7",
            BandId::B8 => "B8",
            BandId::B8A => "B8A",
            BandId::B9 => "B9",
            BandId::B10 => "B10",
            BandId::B11 => "B11",
            BandId::B12 => "B12",
        }
    }

    /// Canonical MSI metadata for this band.
    pub fn spec(self) -> BandSpec {
        let (wavelength_nm, native_gsd_m) = match self {
            BandId::B1 => (443.0, 60.0),
            BandId::B2 => (490.0, 10.0),
            BandId::B3 => (560.0, 10.0),
            BandId::B4 => (665.0, 10.0),
            BandId::B5 => (705.0, 20.0),
            BandId::B6 => (740.0, 20.0),
            BandId::B7 => (783.0, 20.0),
            BandId::B8 => (842.0, 10.0),
            BandId::B8A => (865.0, 20.0),
            BandId::B9 => (945.0, 60.0),
            BandId::B10 => (1375.0, 60.0),
            BandId::B11 => (1610.0, 20.0),
            BandId::B12 => (2190.0, 20.0),
        };
        BandSpec {
            id: self,
            wavelength_nm,
            native_gsd_m,
        }
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BandId::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownBand(s.to_string()))
    }
}

/// Ground sample distances the MSI grids use.
pub const SUPPORTED_GSD_M: [f64; 3] = [10.0, 20.0, 60.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub id: BandId,
    pub wavelength_nm: f64,
    pub native_gsd_m: f64,
}

impl BandSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.wavelength_nm.is_finite() && self.wavelength_nm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{}: wavelength must be positive, got {}",
                self.id, self.wavelength_nm
            )));
        }
        if !SUPPORTED_GSD_M.contains(&self.native_gsd_m) {
            return Err(Error::InvalidArgument(format!(
                "{}: native resolution must be one of 10/20/60 m, got {}",
                self.id, self.native_gsd_m
            )));
        }
        Ok(())
    }
}

/// The 13 canonical band specs in canonical order.
pub fn canonical_specs() -> [BandSpec; 13] {
    BandId::ALL.map(BandId::spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_table() {
        let expected = [
            ("B1", 443.0, 60.0),
            ("B2", 490.0, 10.0),
            ("B3", 560.0, 10.0),
            ("B4", 665.0, 10.0),
            ("B5", 705.0, 20.0),
            ("B6", 740.0, 20.0),
            ("B7", 783.0, 20.0),
            ("B8", 842.0, 10.0),
            ("B8A", 865.0, 20.0),
            ("B9", 945.0, 60.0),
            ("B10", 1375.0, 60.0),
            ("B11", 1610.0, 20.0),
            ("B12", 2190.0, 20.0),
        ];
        let specs = canonical_specs();
        assert_eq!(specs.len(), 13);
        for (spec, (id, wl, gsd)) in specs.iter().zip(expected) {
            assert_eq!(spec.id.as_str(), id);
            assert_eq!(spec.wavelength_nm, wl);
            assert_eq!(spec.native_gsd_m, gsd);
            spec.validate().unwrap();
        }
    }

    #[test]
    fn parse_ids() {
        for id in BandId::ALL {
            assert_eq!(id.as_str().parse::<BandId>().unwrap(), id);
        }
        assert!(matches!(
            "B13".parse::<BandId>(),
            Err(Error::UnknownBand(_))
        ));
        assert!(BandId::B8 < BandId::B8A && BandId::B8A < BandId::B9);
    }

    #[test]
    fn standard_60m_grid_matches_sample_count() {
        // 60 m band over the 109.8 km product footprint
        let rows = (109_800.0 / BandId::B1.spec().native_gsd_m) as usize;
        assert_eq!(rows * rows, 3_348_900);
    }
}
