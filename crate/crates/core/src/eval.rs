//! Binary confusion matrices and the rates derived from them.
//!
//! The text rendering follows the usual neural-network toolbox layout: rows
//! are the output (predicted) class, columns the target class, each cell
//! shows its count and share of the total, the right column holds
//! per-output-class precision, the bottom row per-target-class recall, and
//! the corner overall accuracy over error rate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster_io::LabelMask;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// Swaps the roles of prediction and truth.
    pub fn transposed(&self) -> Self {
        Self {
            tn: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tp: self.tp,
        }
    }
}

/// Counts `(truth, prediction)` pairs over two equally long label lists.
pub fn confusion(predicted: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (t, p) {
            (0, 0) => m.tn += 1,
            (0, 1) => m.fp += 1,
            (1, 0) => m.fn_ += 1,
            (1, 1) => m.tp += 1,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "labels must be 0 or 1, got truth {t} prediction {p}"
                )))
            }
        }
    }
    Ok(m)
}

pub fn confusion_masks(predicted: &LabelMask, truth: &LabelMask) -> Result<ConfusionMatrix> {
    if (predicted.rows(), predicted.cols()) != (truth.rows(), truth.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "predicted mask is {}x{}, truth is {}x{}",
            predicted.rows(),
            predicted.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    confusion(predicted.labels(), truth.labels())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

/// Cell shares of the total, in percent: `[[tn, fn], [fp, tp]]` indexed
/// `[output class][target class]`.
pub type CellPercent = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: Counts,
    pub accuracy: f64,
    pub error_rate: f64,
    /// Per target class: `[tn / (tn + fp), tp / (tp + fn)]`.
    pub recall: [Option<f64>; 2],
    /// Per output class: `[tn / (tn + fn), tp / (tp + fp)]`.
    pub precision: [Option<f64>; 2],
    pub cell_percent: CellPercent,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(m: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = m.total();
    if total == 0 {
        return Err(Error::InvalidArgument("empty confusion matrix".into()));
    }
    let accuracy = (m.tn + m.tp) as f64 / total as f64;
    let pct = |c: u64| 100.0 * c as f64 / total as f64;
    Ok(MetricsReport {
        counts: Counts {
            tn: m.tn,
            fp: m.fp,
            fn_: m.fn_,
            tp: m.tp,
        },
        accuracy,
        error_rate: 1.0 - accuracy,
        recall: [ratio(m.tn, m.tn + m.fp), ratio(m.tp, m.tp + m.fn_)],
        precision: [ratio(m.tn, m.tn + m.fn_), ratio(m.tp, m.tp + m.fp)],
        cell_percent: [[pct(m.tn), pct(m.fn_)], [pct(m.fp), pct(m.tp)]],
    })
}

fn pct1(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |v| format!("{:.1}%", 100.0 * v))
}

impl MetricsReport {
    /// Two-by-two table with one-decimal percentages.
    pub fn render_table(&self, title: &str) -> String {
        let c = &self.counts;
        let p = &self.cell_percent;
        let miss = |r: Option<f64>| pct1(r.map(|v| 1.0 - v));
        let mut s = String::new();
        let _ = writeln!(s, "{title}");
        let _ = writeln!(s, "                 target 0         target 1");
        let _ = writeln!(
            s,
            "output 0  {:>9} {:>5.1}%  {:>9} {:>5.1}%   {:>6} {:>6}",
            c.tn,
            p[0][0],
            c.fn_,
            p[0][1],
            pct1(self.precision[0]),
            miss(self.precision[0])
        );
        let _ = writeln!(
            s,
            "output 1  {:>9} {:>5.1}%  {:>9} {:>5.1}%   {:>6} {:>6}",
            c.fp,
            p[1][0],
            c.tp,
            p[1][1],
            pct1(self.precision[1]),
            miss(self.precision[1])
        );
        let _ = writeln!(
            s,
            "          {:>16}  {:>16}   {:>6} {:>6}",
            pct1(self.recall[0]),
            pct1(self.recall[1]),
            pct1(Some(self.accuracy)),
            pct1(Some(self.error_rate))
        );
        let _ = writeln!(
            s,
            "          {:>16}  {:>16}",
            miss(self.recall[0]),
            miss(self.recall[1])
        );
        s
    }
}
