//! Labeled pixel samples: extraction, class balancing, seeded splitting,
//! and min-max input scaling.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::PARAM_COUNT;
use crate::raster_io::{write_atomic, BandId, LabelMask};
use crate::resample::AlignedCube;
use crate::rng::SplitMix64;

/// Components per feature vector (one per MSI band).
pub const N_FEATURES: usize = 13;

pub type Features = [f64; N_FEATURES];

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    features: Vec<Features>,
    labels: Vec<u8>,
    band_order: Vec<BandId>,
}

impl SampleSet {
    pub fn new(features: Vec<Features>, labels: Vec<u8>, band_order: Vec<BandId>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature vectors but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if band_order.len() != N_FEATURES {
            return Err(Error::InvalidArgument(format!(
                "band order lists {} bands, expected {N_FEATURES}",
                band_order.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {l} is not 0 or 1")));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("features must be finite".into()));
        }
        Ok(Self {
            features,
            labels,
            band_order,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Features] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn band_order(&self) -> &[BandId] {
        &self.band_order
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.len() - pos, pos)
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SampleSet {
        SampleSet {
            features: indices.iter().map(|&i| self.features[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            band_order: self.band_order.clone(),
        }
    }
}

/// One sample per pixel of a 13-band cube, labeled from `mask`.
pub fn extract_samples(cube: &AlignedCube, mask: &LabelMask) -> Result<SampleSet> {
    if (mask.rows(), mask.cols()) != (cube.rows(), cube.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "mask is {}x{} but cube is {}x{}",
            mask.rows(),
            mask.cols(),
            cube.rows(),
            cube.cols()
        )));
    }
    if cube.n_bands() != N_FEATURES {
        return Err(Error::InvalidArgument(format!(
            "cube has {} bands, classification needs all {N_FEATURES}",
            cube.n_bands()
        )));
    }
    let features = (0..cube.n_pixels())
        .map(|p| {
            let mut f = [0.0; N_FEATURES];
            for (dst, &src) in f.iter_mut().zip(cube.pixel(p)) {
                *dst = src as f64;
            }
            f
        })
        .collect();
    SampleSet::new(features, mask.labels().to_vec(), cube.band_ids().to_vec())
}

/// Undersamples the majority class down to the minority count.
///
/// All minority samples are kept; the retained majority samples are the
/// first `minority` entries of a seeded shuffle of the majority indices.
/// Output keeps the input order.
pub fn balance(set: &SampleSet, seed: u64) -> Result<SampleSet> {
    let (neg, pos) = set.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot balance: class counts are ({neg}, {pos})"
        )));
    }
    if neg == pos {
        return Ok(set.clone());
    }
    let (majority, minority) = if neg > pos { (0u8, pos) } else { (1u8, neg) };
    let mut major_idx: Vec<usize> = (0..set.len())
        .filter(|&i| set.labels[i] == majority)
        .collect();
    SplitMix64::new(seed).shuffle(&mut major_idx);

    let mut keep = vec![false; set.len()];
    for (i, k) in keep.iter_mut().enumerate() {
        *k = set.labels[i] != majority;
    }
    for &i in &major_idx[..minority] {
        keep[i] = true;
    }
    let kept: Vec<usize> = (0..set.len()).filter(|&i| keep[i]).collect();
    Ok(set.select(&kept))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.70,
            val_frac: 0.15,
            test_frac: 0.15,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs
            .iter()
            .any(|f| !(f.is_finite() && *f > 0.0 && *f < 1.0))
        {
            return Err(Error::InvalidArgument(format!(
                "split fractions must lie in (0, 1), got {fracs:?}"
            )));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must sum to 1, got {fracs:?}"
            )));
        }
        Ok(())
    }
}

/// Seeded shuffle then contiguous partition: `floor(n * train_frac)` train,
/// `floor(n * val_frac)` validation, the remainder test.
pub fn split(set: &SampleSet, spec: &SplitSpec) -> Result<(SampleSet, SampleSet, SampleSet)> {
    spec.validate()?;
    if set.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot split an empty sample set".into(),
        ));
    }
    let n = set.len();
    let mut idx: Vec<usize> = (0..n).collect();
    SplitMix64::new(spec.seed).shuffle(&mut idx);
    let n_train = (n as f64 * spec.train_frac).floor() as usize;
    let n_val = (n as f64 * spec.val_frac).floor() as usize;
    let (train, rest) = idx.split_at(n_train);
    let (val, test) = rest.split_at(n_val);
    Ok((set.select(train), set.select(val), set.select(test)))
}

/// Per-band min-max scaling onto `[-1, 1]`, fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != N_FEATURES || max.len() != N_FEATURES {
            return Err(Error::InvalidArgument(format!(
                "normalizer needs {N_FEATURES} min/max pairs, got {}/{}",
                min.len(),
                max.len()
            )));
        }
        for (b, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "feature {b}: degenerate range [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { min, max })
    }

    /// Maps every feature's `[-1, 1]` onto itself.
    pub fn identity() -> Self {
        Self {
            min: vec![-1.0; N_FEATURES],
            max: vec![1.0; N_FEATURES],
        }
    }

    /// `2 (x - min) / (max - min) - 1`, unclamped.
    pub fn apply(&self, v: &Features) -> Features {
        let mut out = [0.0; N_FEATURES];
        for b in 0..N_FEATURES {
            out[b] = 2.0 * (v[b] - self.min[b]) / (self.max[b] - self.min[b]) - 1.0;
        }
        out
    }

    pub fn apply_f32(&self, v: &[f32]) -> Features {
        let mut f = [0.0; N_FEATURES];
        for (dst, &src) in f.iter_mut().zip(v) {
            *dst = src as f64;
        }
        self.apply(&f)
    }

    pub fn apply_set(&self, set: &SampleSet) -> SampleSet {
        SampleSet {
            features: set.features.iter().map(|f| self.apply(f)).collect(),
            labels: set.labels.clone(),
            band_order: set.band_order.clone(),
        }
    }
}

pub fn fit_normalizer(train: &SampleSet) -> Result<Normalizer> {
    if train.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit a normalizer on no samples".into(),
        ));
    }
    let mut min = vec![f64::INFINITY; N_FEATURES];
    let mut max = vec![f64::NEG_INFINITY; N_FEATURES];
    for f in &train.features {
        for b in 0..N_FEATURES {
            min[b] = min[b].min(f[b]);
            max[b] = max[b].max(f[b]);
        }
    }
    if let Some(b) = (0..N_FEATURES).find(|&b| min[b] == max[b]) {
        return Err(Error::InvalidArgument(format!(
            "band {} is constant ({}) over the training set",
            train.band_order[b], min[b]
        )));
    }
    Normalizer::new(min, max)
}

/// Sample budget relative to the 13-10-1 network's weight count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub n_samples: usize,
    pub n_weights: usize,
    pub samples_per_weight: f64,
    /// At least fifteen samples per trainable weight.
    pub sufficient: bool,
}

pub fn dataset_report(n_samples: usize) -> DatasetReport {
    let samples_per_weight = n_samples as f64 / PARAM_COUNT as f64;
    DatasetReport {
        n_samples,
        n_weights: PARAM_COUNT,
        samples_per_weight,
        sufficient: samples_per_weight > 15.0,
    }
}

/// Binary sample table: `u64` count, `u32` feature count, then per band a
/// `u8` id length and ASCII id; then per sample 13 `f32` and one label byte.
/// All integers and floats little-endian.
pub fn write_samples(set: &SampleSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(16 + set.len() * (4 * N_FEATURES + 1));
    out.extend((set.len() as u64).to_le_bytes());
    out.extend((N_FEATURES as u32).to_le_bytes());
    for id in &set.band_order {
        let s = id.as_str();
        out.push(s.len() as u8);
        out.extend_from_slice(s.as_bytes());
    }
    for (f, &l) in set.features.iter().zip(&set.labels) {
        for v in f {
            out.extend((*v as f32).to_le_bytes());
        }
        out.push(l);
    }
    write_atomic(path, &out)
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<SampleSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let truncated = || Error::Format(format!("{}: truncated sample table", path.display()));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(truncated)?;
        pos += n;
        Ok(s)
    };
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let n_feat = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if n_feat != N_FEATURES {
        return Err(Error::Format(format!(
            "{}: {n_feat} features per sample, expected {N_FEATURES}",
            path.display()
        )));
    }
    let mut band_order = Vec::with_capacity(N_FEATURES);
    for _ in 0..N_FEATURES {
        let len = take(1)?[0] as usize;
        let id = std::str::from_utf8(take(len)?)
            .map_err(|_| Error::Format("band id is not ASCII".into()))?;
        band_order.push(id.parse()?);
    }
    let mut features = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let row = take(4 * N_FEATURES + 1)?;
        let mut f = [0.0; N_FEATURES];
        for (b, c) in row[..4 * N_FEATURES].chunks_exact(4).enumerate() {
            f[b] = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
        }
        features.push(f);
        labels.push(row[4 * N_FEATURES]);
    }
    if take(1).is_ok() {
        return Err(Error::Format(format!("{}: trailing bytes", path.display())));
    }
    SampleSet::new(features, labels, band_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tagged_set(labels: &[u8]) -> SampleSet {
        let features = (0..labels.len())
            .map(|i| {
                let mut f = [0.0; N_FEATURES];
                f[0] = i as f64;
                f[1] = (i % 7) as f64;
                f
            })
            .collect();
        SampleSet::new(features, labels.to_vec(), BandId::ALL.to_vec()).unwrap()
    }

    fn ids(set: &SampleSet) -> Vec<usize> {
        set.features().iter().map(|f| f[0] as usize).collect()
    }

    #[test]
    fn extract_small() {
        let planes = BandId::ALL
            .iter()
            .enumerate()
            .map(|(b, &id)| (id, (0..4).map(|p| (p * 100 + b) as f32).collect()))
            .collect();
        let cube = AlignedCube::from_planes(2, 2, planes).unwrap();
        let mask = LabelMask::new(2, 2, vec![1, 0, 0, 1]).unwrap();
        let set = extract_samples(&cube, &mask).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.labels(), [1, 0, 0, 1]);
        assert_eq!(set.features()[3][12], 312.0);
        assert_eq!(set.band_order(), BandId::ALL);

        let wrong = LabelMask::new(3, 3, vec![0; 9]).unwrap();
        assert!(matches!(
            extract_samples(&cube, &wrong),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn balance_undersamples_majority() {
        let mut labels = vec![0u8; 900];
        labels.extend([1u8; 100]);
        let set = tagged_set(&labels);
        let bal = balance(&set, 9).unwrap();
        assert_eq!(bal.class_counts(), (100, 100));
        // every positive survives
        let kept = ids(&bal);
        assert!((900..1000).all(|i| kept.contains(&i)));
        assert_eq!(balance(&set, 9).unwrap(), bal);
    }

    #[test]
    fn balance_identity_and_errors() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let set = tagged_set(&labels);
        assert_eq!(balance(&set, 3).unwrap(), set);
        assert!(balance(&tagged_set(&[0, 0, 0]), 1).is_err());
        // minority may be the negatives
        let bal = balance(&tagged_set(&[0, 1, 1, 1, 1]), 1).unwrap();
        assert_eq!(bal.class_counts(), (1, 1));
    }

    #[test]
    fn split_sizes() {
        let spec = SplitSpec::default();
        let (a, b, c) = split(&tagged_set(&[0; 100]), &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (70, 15, 15));
        let (a, b, c) = split(&tagged_set(&[0; 10]), &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (7, 1, 2));
        assert!(split(&tagged_set(&[]), &spec).is_err());
        let bad = SplitSpec {
            test_frac: 0.2,
            ..spec
        };
        assert!(split(&tagged_set(&[0; 10]), &bad).is_err());
    }

    #[test]
    fn normalizer_examples() {
        let mut lo = [0.0; N_FEATURES];
        let mut hi = [0.0; N_FEATURES];
        for b in 0..N_FEATURES {
            lo[b] = b as f64;
            hi[b] = 4095.0 + b as f64;
        }
        let set = SampleSet::new(vec![lo, hi], vec![0, 1], BandId::ALL.to_vec()).unwrap();
        let norm = fit_normalizer(&set).unwrap();
        assert_eq!(norm.min[0], 0.0);
        assert_eq!(norm.max[0], 4095.0);
        assert!(norm.apply(&lo).iter().all(|&v| v == -1.0));
        assert!(norm.apply(&hi).iter().all(|&v| v == 1.0));
        let mut mid = [0.0; N_FEATURES];
        for b in 0..N_FEATURES {
            mid[b] = (lo[b] + hi[b]) / 2.0;
        }
        assert!(norm.apply(&mid).iter().all(|&v| v.abs() < 1e-15));
        // out-of-range inputs are not clamped
        let mut beyond = hi;
        beyond[0] = 8190.0;
        assert_eq!(norm.apply(&beyond)[0], 3.0);
    }

    #[test]
    fn normalizer_rejects_constant_band() {
        let set = tagged_set(&[0, 1, 0]);
        // feature 2 is zero everywhere
        let err = fit_normalizer(&set).unwrap_err();
        assert!(err.to_string().contains("constant"), "{err}");
    }

    #[test]
    fn fifteen_samples_per_weight() {
        let r = dataset_report(3_348_900);
        assert_eq!(r.n_weights, 151);
        assert!(r.samples_per_weight > 15.0 && r.sufficient);
        assert!(!dataset_report(151 * 15).sufficient);
    }

    #[test]
    fn sample_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let set = tagged_set(&[0, 1, 1, 0, 1]);
        write_samples(&set, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = 8
            + 4
            + BandId::ALL
                .iter()
                .map(|b| 1 + b.as_str().len())
                .sum::<usize>();
        assert_eq!(bytes.len(), header + 5 * 53);
        assert_eq!(read_samples(&path).unwrap(), set);
        fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
        assert!(read_samples(&path).is_err());
    }

    proptest! {
        #[test]
        fn split_is_exact_partition(n in 1usize..400, seed in any::<u64>()) {
            let set = tagged_set(&vec![0; n]);
            let spec = SplitSpec { seed, ..SplitSpec::default() };
            let (a, b, c) = split(&set, &spec).unwrap();
            prop_assert_eq!(a.len(), (n as f64 * 0.7).floor() as usize);
            prop_assert_eq!(b.len(), (n as f64 * 0.15).floor() as usize);
            let mut all: Vec<usize> = [ids(&a), ids(&b), ids(&c)].concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn balance_counts(neg in 1usize..200, pos in 1usize..200, seed in any::<u64>()) {
            let mut labels = vec![0u8; neg];
            labels.extend(vec![1u8; pos]);
            let bal = balance(&tagged_set(&labels), seed).unwrap();
            let m = neg.min(pos);
            prop_assert_eq!(bal.class_counts(), (m, m));
            prop_assert_eq!(bal.len(), 2 * m);
        }

        #[test]
        fn normalizer_strictly_monotone(x in -1e4f64..1e4, dx in 1e-3f64..1e3) {
            let norm = Normalizer::new(vec![0.0; N_FEATURES], vec![4095.0; N_FEATURES]).unwrap();
            let a = norm.apply(&[x; N_FEATURES]);
            let b = norm.apply(&[x + dx; N_FEATURES]);
            prop_assert!(a.iter().zip(&b).all(|(a, b)| a < b));
        }
    }
}
