//! The 13-10-1 perceptron: tanh hidden layer, logistic output, mean squared
//! error against 0/1 targets.
//!
//! Parameters live in one flat vector of [`PARAM_COUNT`] weights:
//!
//! ```text
//! [0, 140)    hidden weights, row-major: neuron j, input i at j * 14 + i
//!             (i = 13 is neuron j's bias)
//! [140, 151)  output weights: hidden unit k at 140 + k, bias at 150
//! ```
//!
//! Loss and gradient sums over samples use a fixed pairwise tree (split at
//! `len / 2` down to single samples), so results do not depend on thread
//! count and a set concatenated with itself has exactly the same mean.

mod model_file;
mod train;

use rayon::prelude::*;

use crate::dataset::{Features, Normalizer, SampleSet, N_FEATURES};
use crate::error::{Error, Result};
use crate::indexes::IndexMap;
use crate::raster_io::{BandId, LabelMask};
use crate::resample::AlignedCube;
use crate::rng::SplitMix64;

pub use model_file::{load_model, save_model, MODEL_SCHEMA_VERSION};
pub use train::{train, ArmijoParams, StepRecord, StopReason, TrainConfig, TrainReport};

pub const N_INPUTS: usize = N_FEATURES;
pub const N_HIDDEN: usize = 10;
/// Weights per hidden neuron, bias included.
pub const HIDDEN_STRIDE: usize = N_INPUTS + 1;
pub const OUTPUT_OFFSET: usize = N_HIDDEN * HIDDEN_STRIDE;
/// `14 * 10 + 11`
pub const PARAM_COUNT: usize = OUTPUT_OFFSET + N_HIDDEN + 1;

/// Default decision threshold, midway between the 0/1 targets.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Parallel reduction kicks in above this many samples.
const PAR_CUTOFF: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    params: Vec<f64>,
    pub normalizer: Normalizer,
    pub band_order: Vec<BandId>,
}

impl MlpModel {
    pub fn from_params(
        params: Vec<f64>,
        normalizer: Normalizer,
        band_order: Vec<BandId>,
    ) -> Result<Self> {
        if params.len() != PARAM_COUNT {
            return Err(Error::InvalidArgument(format!(
                "expected {PARAM_COUNT} weights, got {}",
                params.len()
            )));
        }
        if params.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        if band_order.len() != N_INPUTS {
            return Err(Error::InvalidArgument(format!(
                "band order lists {} bands, expected {N_INPUTS}",
                band_order.len()
            )));
        }
        Ok(Self {
            params,
            normalizer,
            band_order,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn hidden_row(&self, j: usize) -> &[f64] {
        &self.params[j * HIDDEN_STRIDE..(j + 1) * HIDDEN_STRIDE]
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.params[OUTPUT_OFFSET..]
    }

    pub(crate) fn with_params(&self, params: Vec<f64>) -> Self {
        debug_assert_eq!(params.len(), PARAM_COUNT);
        Self {
            params,
            normalizer: self.normalizer.clone(),
            band_order: self.band_order.clone(),
        }
    }
}

/// Uniform(-r, r) per layer with `r = sqrt(6 / (fan_in + fan_out))`, drawn
/// in flat-layout order.
pub fn init_model(seed: u64, normalizer: Normalizer, band_order: Vec<BandId>) -> Result<MlpModel> {
    let mut rng = SplitMix64::new(seed);
    let r_hidden = (6.0 / (N_INPUTS + N_HIDDEN) as f64).sqrt();
    let r_output = (6.0 / (N_HIDDEN + 1) as f64).sqrt();
    let params = (0..PARAM_COUNT)
        .map(|k| {
            let r = if k < OUTPUT_OFFSET {
                r_hidden
            } else {
                r_output
            };
            r * (2.0 * rng.next_f64() - 1.0)
        })
        .collect();
    MlpModel::from_params(params, normalizer, band_order)
}

#[inline]
fn logistic(z: f64) -> f64 {
    // keep the output inside the open unit interval even when saturated
    (1.0 / (1.0 + (-z).exp())).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

#[inline]
fn hidden_layer(p: &[f64], x: &Features) -> [f64; N_HIDDEN] {
    let mut h = [0.0; N_HIDDEN];
    for (j, hj) in h.iter_mut().enumerate() {
        let row = &p[j * HIDDEN_STRIDE..(j + 1) * HIDDEN_STRIDE];
        let z = row[..N_INPUTS]
            .iter()
            .zip(x)
            .fold(row[N_INPUTS], |acc, (w, xi)| acc + w * xi);
        *hj = z.tanh();
    }
    h
}

#[inline]
fn output_layer(p: &[f64], h: &[f64; N_HIDDEN]) -> f64 {
    let v = &p[OUTPUT_OFFSET..];
    let z = v[..N_HIDDEN]
        .iter()
        .zip(h)
        .fold(v[N_HIDDEN], |acc, (w, hk)| acc + w * hk);
    logistic(z)
}

#[inline]
fn forward_params(p: &[f64], x: &Features) -> f64 {
    output_layer(p, &hidden_layer(p, x))
}

/// Network output for an already normalized feature vector; always in (0, 1).
pub fn forward(model: &MlpModel, x: &Features) -> f64 {
    forward_params(&model.params, x)
}

fn sq_error_sum(p: &[f64], xs: &[Features], ys: &[u8]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => {
            let e = forward_params(p, &xs[0]) - ys[0] as f64;
            e * e
        }
        n => {
            let mid = n / 2;
            let (a, b) = if n > PAR_CUTOFF {
                rayon::join(
                    || sq_error_sum(p, &xs[..mid], &ys[..mid]),
                    || sq_error_sum(p, &xs[mid..], &ys[mid..]),
                )
            } else {
                (
                    sq_error_sum(p, &xs[..mid], &ys[..mid]),
                    sq_error_sum(p, &xs[mid..], &ys[mid..]),
                )
            };
            a + b
        }
    }
}

type GradAcc = (f64, [f64; PARAM_COUNT]);

fn sample_gradient(p: &[f64], x: &Features, target: f64) -> GradAcc {
    let h = hidden_layer(p, x);
    let y = output_layer(p, &h);
    let e = y - target;
    let mut g = [0.0; PARAM_COUNT];
    let delta_out = 2.0 * e * y * (1.0 - y);
    for k in 0..N_HIDDEN {
        g[OUTPUT_OFFSET + k] = delta_out * h[k];
    }
    g[OUTPUT_OFFSET + N_HIDDEN] = delta_out;
    for j in 0..N_HIDDEN {
        let delta_h = delta_out * p[OUTPUT_OFFSET + j] * (1.0 - h[j] * h[j]);
        let row = &mut g[j * HIDDEN_STRIDE..(j + 1) * HIDDEN_STRIDE];
        for i in 0..N_INPUTS {
            row[i] = delta_h * x[i];
        }
        row[N_INPUTS] = delta_h;
    }
    (e * e, g)
}

fn grad_sum(p: &[f64], xs: &[Features], ys: &[u8]) -> GradAcc {
    match xs.len() {
        0 => (0.0, [0.0; PARAM_COUNT]),
        1 => sample_gradient(p, &xs[0], ys[0] as f64),
        n => {
            let mid = n / 2;
            let ((la, mut ga), (lb, gb)) = if n > PAR_CUTOFF {
                rayon::join(
                    || grad_sum(p, &xs[..mid], &ys[..mid]),
                    || grad_sum(p, &xs[mid..], &ys[mid..]),
                )
            } else {
                (
                    grad_sum(p, &xs[..mid], &ys[..mid]),
                    grad_sum(p, &xs[mid..], &ys[mid..]),
                )
            };
            for (a, b) in ga.iter_mut().zip(&gb) {
                *a += b;
            }
            (la + lb, ga)
        }
    }
}

fn require_samples(samples: &SampleSet) -> Result<()> {
    if samples.is_empty() {
        Err(Error::InvalidArgument("empty sample set".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn loss_params(p: &[f64], samples: &SampleSet) -> f64 {
    sq_error_sum(p, samples.features(), samples.labels()) / samples.len() as f64
}

pub(crate) fn loss_and_gradient_params(p: &[f64], samples: &SampleSet) -> (f64, Vec<f64>) {
    let n = samples.len() as f64;
    let (l, g) = grad_sum(p, samples.features(), samples.labels());
    (l / n, g.iter().map(|v| v / n).collect())
}

/// Mean squared error over normalized samples.
pub fn loss(model: &MlpModel, samples: &SampleSet) -> Result<f64> {
    require_samples(samples)?;
    Ok(loss_params(&model.params, samples))
}

/// Backpropagated gradient of [`loss`] in flat-layout order.
pub fn gradient(model: &MlpModel, samples: &SampleSet) -> Result<Vec<f64>> {
    require_samples(samples)?;
    Ok(loss_and_gradient_params(&model.params, samples).1)
}

/// Classifies every pixel: normalize, forward, threshold.
pub fn predict_map(
    model: &MlpModel,
    cube: &AlignedCube,
    threshold: f64,
) -> Result<(LabelMask, IndexMap)> {
    if cube.band_ids() != model.band_order.as_slice() {
        return Err(Error::InvalidArgument(format!(
            "cube bands {:?} do not match the model's {:?}",
            cube.band_ids(),
            model.band_order
        )));
    }
    let outputs: Vec<f64> = (0..cube.n_pixels())
        .into_par_iter()
        .map(|p| forward(model, &model.normalizer.apply_f32(cube.pixel(p))))
        .collect();
    let labels = outputs.iter().map(|&y| u8::from(y >= threshold)).collect();
    let mask = LabelMask::new(cube.rows(), cube.cols(), labels)?;
    Ok((
        mask,
        IndexMap {
            rows: cube.rows(),
            cols: cube.cols(),
            values: outputs,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_model(seed: u64) -> MlpModel {
        init_model(seed, Normalizer::identity(), BandId::ALL.to_vec()).unwrap()
    }

    fn random_batch(seed: u64, n: usize) -> SampleSet {
        let mut rng = SplitMix64::new(seed);
        let features = (0..n)
            .map(|_| {
                let mut f = [0.0; N_FEATURES];
                f.iter_mut().for_each(|v| *v = 2.0 * rng.next_f64() - 1.0);
                f
            })
            .collect();
        let labels = (0..n).map(|_| rng.next_below(2) as u8).collect();
        SampleSet::new(features, labels, BandId::ALL.to_vec()).unwrap()
    }

    #[test]
    fn parameter_count() {
        assert_eq!(PARAM_COUNT, 14 * 10 + 11);
        assert_eq!(random_model(0).param_count(), 151);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        assert_eq!(random_model(42), random_model(42));
        assert_ne!(random_model(42), random_model(43));
        assert!(random_model(42).params().iter().all(|w| w.abs() < 1.0));
    }

    #[test]
    fn zero_weights_give_half() {
        let m = random_model(0).with_params(vec![0.0; PARAM_COUNT]);
        assert_eq!(forward(&m, &[0.3; N_FEATURES]), 0.5);
        let balanced = SampleSet::new(
            vec![[0.1; N_FEATURES]; 4],
            vec![0, 1, 0, 1],
            BandId::ALL.to_vec(),
        )
        .unwrap();
        assert_eq!(loss(&m, &balanced).unwrap(), 0.25);
    }

    #[test]
    fn output_in_open_interval() {
        let mut rng = SplitMix64::new(99);
        for t in 0..10_000 {
            let params = (0..PARAM_COUNT)
                .map(|_| 20.0 * rng.next_f64() - 10.0)
                .collect();
            let m = random_model(t).with_params(params);
            let mut x = [0.0; N_FEATURES];
            x.iter_mut().for_each(|v| *v = 10.0 * rng.next_f64() - 5.0);
            let y = forward(&m, &x);
            assert!(y > 0.0 && y < 1.0, "{y}");
        }
    }

    /// Straight-line evaluation of a pinned network, written out without the
    /// production layer helpers.
    #[test]
    fn forward_matches_hand_evaluation() {
        let params: Vec<f64> = (0..PARAM_COUNT)
            .map(|k| ((k * 37 % 101) as f64 - 50.0) / 100.0)
            .collect();
        let m = random_model(0).with_params(params.clone());
        let x: Features = std::array::from_fn(|i| (i as f64 - 6.0) / 6.0);
        let mut z_out = params[150];
        for j in 0..10 {
            let mut z = params[j * 14 + 13];
            for i in 0..13 {
                z += params[j * 14 + i] * x[i];
            }
            z_out += params[140 + j] * z.tanh();
        }
        let want = 1.0 / (1.0 + (-z_out).exp());
        assert_relative_eq!(forward(&m, &x), want, max_relative = 1e-14);
    }

    #[test]
    fn loss_matches_direct_mean() {
        let m = random_model(5);
        let s = random_batch(6, 17);
        let direct: f64 = s
            .features()
            .iter()
            .zip(s.labels())
            .map(|(x, &t)| (forward(&m, x) - t as f64).powi(2))
            .sum::<f64>()
            / 17.0;
        assert_relative_eq!(loss(&m, &s).unwrap(), direct, max_relative = 1e-14);
        let exact = SampleSet::new(vec![[0.0; N_FEATURES]], vec![0], BandId::ALL.to_vec()).unwrap();
        // saturated hidden units, strongly negative output layer: y underflows to 0
        let mut params = vec![1e3; PARAM_COUNT];
        params[OUTPUT_OFFSET..].iter_mut().for_each(|w| *w = -1e3);
        assert_eq!(loss(&m.with_params(params), &exact).unwrap(), 0.0);
    }

    #[test]
    fn empty_sets_rejected() {
        let m = random_model(1);
        let empty = SampleSet::new(vec![], vec![], BandId::ALL.to_vec()).unwrap();
        assert!(loss(&m, &empty).is_err());
        assert!(gradient(&m, &empty).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for t in 0..10 {
            let m = random_model(t);
            let s = random_batch(1000 + t, 1 + (t as usize * 3) % 32);
            let g = gradient(&m, &s).unwrap();
            let h = 1e-5;
            for k in 0..PARAM_COUNT {
                let mut p = m.params().to_vec();
                p[k] += h;
                let up = loss_params(&p, &s);
                p[k] -= 2.0 * h;
                let down = loss_params(&p, &s);
                let fd = (up - down) / (2.0 * h);
                let err = (g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-6);
                assert!(err < 1e-5, "model {t} weight {k}: {} vs {fd}", g[k]);
            }
        }
    }

    #[test]
    fn gradient_invariant_under_duplication() {
        let m = random_model(8);
        for n in [1, 3, 7, 20] {
            let s = random_batch(9, n);
            let dup_idx: Vec<usize> = (0..n).chain(0..n).collect();
            let doubled = s.select(&dup_idx);
            assert_eq!(gradient(&m, &s).unwrap(), gradient(&m, &doubled).unwrap());
        }
    }

    #[test]
    fn predict_map_bounds_and_band_check() {
        let m = random_model(3);
        let planes = BandId::ALL
            .iter()
            .map(|&id| (id, vec![0.25, -0.5, 0.75, 0.0]))
            .collect();
        let cube = AlignedCube::from_planes(2, 2, planes).unwrap();
        let (mask, map) = predict_map(&m, &cube, DEFAULT_THRESHOLD).unwrap();
        assert!(map.values.iter().all(|&y| y > 0.0 && y < 1.0));
        for (l, y) in mask.labels().iter().zip(&map.values) {
            assert_eq!(*l, u8::from(*y >= 0.5));
        }
        let (none, _) = predict_map(&m, &cube, 1.1).unwrap();
        assert_eq!(none.count_positive(), 0);

        let partial = AlignedCube::from_planes(2, 2, vec![(BandId::B8, vec![0.0; 4])]).unwrap();
        assert!(predict_map(&m, &partial, 0.5).is_err());
    }
}
