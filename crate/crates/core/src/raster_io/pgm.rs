//! Binary PGM (P5) import of bands and read/write of label masks.

use std::fs;
use std::path::Path;

use super::bands::BandSpec;
use super::stack::Band;
use super::write_atomic;
use crate::error::{Error, Result};

/// Binary ground-truth raster; 1 = plastic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    rows: usize,
    cols: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(rows: usize, cols: usize, labels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "mask dimensions must be positive".into(),
            ));
        }
        if labels.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {rows}x{cols} mask",
                labels.len()
            )));
        }
        if let Some(v) = labels.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidArgument(format!(
                "mask label {v} is not 0 or 1"
            )));
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&v| v == 1).count()
    }
}

struct Pgm {
    width: usize,
    height: usize,
    maxval: u32,
    samples: Vec<u16>,
}

fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Format("not a PGM file".into()));
    }
    if bytes[1] != b'5' {
        return Err(Error::UnsupportedPgm(format!(
            "P{} (only binary P5 is supported)",
            bytes[1] as char
        )));
    }

    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and `#` comments may precede each header field
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("bad PGM header number".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("truncated PGM header".into()));
    }
    pos += 1;

    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM dimensions must be positive".into()));
    }
    let bytes_per_sample = match maxval {
        255 => 1,
        65535 => 2,
        other => {
            return Err(Error::UnsupportedPgm(format!(
                "maxval {other} (expected 255 or 65535)"
            )))
        }
    };
    let n = width * height;
    let payload = &bytes[pos..];
    if payload.len() < n * bytes_per_sample {
        return Err(Error::Format(format!(
            "truncated PGM payload: {} bytes for {n} samples",
            payload.len()
        )));
    }
    let samples = if bytes_per_sample == 1 {
        payload[..n].iter().map(|&b| b as u16).collect()
    } else {
        payload[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u32,
        samples,
    })
}

fn encode_p5_8bit(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

/// Reads a P5 file as a band; 8-bit samples are widened, not rescaled.
pub fn import_pgm_band(path: impl AsRef<Path>, spec: BandSpec) -> Result<Band> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = parse_pgm(&bytes)?;
    log::debug!(
        "{}: {}x{} maxval {}",
        path.display(),
        pgm.width,
        pgm.height,
        pgm.maxval
    );
    Band::new(spec, pgm.height, pgm.width, pgm.samples)
}

/// Writes a band's digital numbers as a 16-bit P5 file.
pub fn write_pgm_band(band: &Band, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n65535\n", band.cols, band.rows).into_bytes();
    out.extend(band.pixels.iter().flat_map(|p| p.to_be_bytes()));
    write_atomic(path, &out)
}

/// Mask encoding: P5, maxval 255, 255 = plastic, 0 = background.
pub fn write_mask(mask: &LabelMask, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = mask
        .labels
        .iter()
        .map(|&l| if l == 1 { 255 } else { 0 })
        .collect();
    write_atomic(path, &encode_p5_8bit(mask.cols, mask.rows, &data))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = parse_pgm(&bytes)?;
    if pgm.maxval != 255 {
        return Err(Error::UnsupportedPgm(format!(
            "mask maxval {} (expected 255)",
            pgm.maxval
        )));
    }
    let labels = pgm
        .samples
        .iter()
        .map(|&v| match v {
            0 => Ok(0),
            255 => Ok(1),
            other => Err(Error::Format(format!(
                "mask sample {other} is neither 0 nor 255"
            ))),
        })
        .collect::<Result<Vec<u8>>>()?;
    LabelMask::new(pgm.height, pgm.width, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster_io::BandId;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn import_16bit_verbatim() {
        let dir = tmp();
        let path = dir.path().join("b.pgm");
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        for v in [0u16, 4095, 1000, 2000] {
            bytes.extend(v.to_be_bytes());
        }
        fs::write(&path, bytes).unwrap();
        let band = import_pgm_band(&path, BandId::B2.spec()).unwrap();
        assert_eq!((band.rows, band.cols), (2, 2));
        assert_eq!(band.pixels, [0, 4095, 1000, 2000]);
    }

    #[test]
    fn import_8bit_widened() {
        let dir = tmp();
        let path = dir.path().join("b.pgm");
        fs::write(&path, b"P5\n3 1\n255\n\x00\x80\xff").unwrap();
        let band = import_pgm_band(&path, BandId::B2.spec()).unwrap();
        assert_eq!((band.rows, band.cols), (1, 3));
        assert_eq!(band.pixels, [0, 128, 255]);
    }

    #[test]
    fn header_comments_allowed() {
        let pgm = parse_pgm(b"P5 # made by hand\n1 # width\n1\n255\n\x07").unwrap();
        assert_eq!(pgm.samples, [7]);
    }

    #[test]
    fn rejects_ascii_variant() {
        let dir = tmp();
        let path = dir.path().join("b.pgm");
        fs::write(&path, b"P2\n1 1\n255\n7\n").unwrap();
        let err = import_pgm_band(&path, BandId::B2.spec()).unwrap_err();
        assert!(err.to_string().contains("unsupported PGM variant"), "{err}");
    }

    #[test]
    fn rejects_bad_maxval_and_truncation() {
        assert!(matches!(
            parse_pgm(b"P5\n1 1\n4095\n\x00\x01"),
            Err(Error::UnsupportedPgm(_))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n255\n\x00\x01"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n65535\n\x00\x01\x00\x01\x00\x01\x00"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn mask_encoding() {
        let dir = tmp();
        let path = dir.path().join("m.pgm");
        write_mask(&LabelMask::new(1, 2, vec![0, 1]).unwrap(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff");

        write_mask(&LabelMask::new(4, 4, vec![0; 16]).unwrap(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n4 4\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0u8; 16]);
    }

    #[test]
    fn mask_rejects_grey_values() {
        let dir = tmp();
        let path = dir.path().join("m.pgm");
        fs::write(&path, b"P5\n2 1\n255\n\x00\x80").unwrap();
        assert!(read_mask(&path).is_err());
        assert!(LabelMask::new(1, 1, vec![2]).is_err());
    }
}
