//! Cube + truth mask in, trained model and per-split confusion report out.

use serde::{Deserialize, Serialize};

use crate::dataset::{
    balance, dataset_report, extract_samples, fit_normalizer, split, DatasetReport, SampleSet,
    SplitSpec,
};
use crate::error::Result;
use crate::eval::{confusion, metrics, MetricsReport};
use crate::mlp::{
    forward, init_model, train, MlpModel, TrainConfig, TrainReport, DEFAULT_THRESHOLD,
};
use crate::raster_io::LabelMask;
use crate::resample::AlignedCube;
use crate::rng::derive_seed;

const STREAM_BALANCE: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_INIT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Run seed; balancing, splitting and initialization each draw from a
    /// stream derived from it, overriding the seeds in `split` and `train`.
    pub seed: u64,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            split: SplitSpec::default(),
            train: TrainConfig::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub train: MetricsReport,
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub dataset: DatasetReport,
    /// `(negatives, positives)` before balancing.
    pub class_counts: (usize, usize),
    pub balanced_counts: (usize, usize),
    pub split_sizes: [usize; 3],
    pub training: TrainReport,
    pub confusion: SplitMetrics,
}

/// Confusion metrics of `model` on an already normalized set.
pub fn evaluate(model: &MlpModel, set: &SampleSet, threshold: f64) -> Result<MetricsReport> {
    let predicted: Vec<u8> = set
        .features()
        .iter()
        .map(|x| u8::from(forward(model, x) >= threshold))
        .collect();
    metrics(&confusion(&predicted, set.labels())?)
}

/// extract -> balance -> split -> fit normalizer -> init -> train -> evaluate.
pub fn train_pipeline(
    cube: &AlignedCube,
    truth: &LabelMask,
    cfg: &PipelineConfig,
) -> Result<(MlpModel, PipelineReport)> {
    let samples = extract_samples(cube, truth)?;
    let dataset = dataset_report(samples.len());
    let class_counts = samples.class_counts();
    let balanced = balance(&samples, derive_seed(cfg.seed, STREAM_BALANCE))?;
    drop(samples);
    log::info!(
        "{} samples {:?} balanced to {:?}",
        dataset.n_samples,
        class_counts,
        balanced.class_counts()
    );

    let split_spec = SplitSpec {
        seed: derive_seed(cfg.seed, STREAM_SPLIT),
        ..cfg.split
    };
    let (train_raw, val_raw, test_raw) = split(&balanced, &split_spec)?;
    let normalizer = fit_normalizer(&train_raw)?;
    let train_set = normalizer.apply_set(&train_raw);
    let val_set = normalizer.apply_set(&val_raw);
    let test_set = normalizer.apply_set(&test_raw);

    let train_cfg = TrainConfig {
        seed: derive_seed(cfg.seed, STREAM_INIT),
        ..cfg.train
    };
    let initial = init_model(train_cfg.seed, normalizer, balanced.band_order().to_vec())?;
    let (model, training) = train(&initial, &train_set, &val_set, &train_cfg)?;

    let confusion = SplitMetrics {
        train: evaluate(&model, &train_set, cfg.threshold)?,
        validation: evaluate(&model, &val_set, cfg.threshold)?,
        test: evaluate(&model, &test_set, cfg.threshold)?,
    };
    log::info!(
        "test accuracy {:.4}, error rate {:.4}",
        confusion.test.accuracy,
        confusion.test.error_rate
    );
    let report = PipelineReport {
        seed: cfg.seed,
        dataset,
        class_counts,
        balanced_counts: balanced.class_counts(),
        split_sizes: [train_set.len(), val_set.len(), test_set.len()],
        training,
        confusion,
    };
    Ok((model, report))
}
