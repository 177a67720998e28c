use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MlpModel, HIDDEN_STRIDE, N_HIDDEN, N_INPUTS, OUTPUT_OFFSET};
use crate::dataset::Normalizer;
use crate::error::{Error, Result};
use crate::raster_io::{write_atomic, BandId};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Activations {
    hidden: String,
    output: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct NormalizerDoc {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    shape: Vec<usize>,
    activations: Activations,
    weights_hidden: Vec<Vec<f64>>,
    weights_output: Vec<f64>,
    normalizer: NormalizerDoc,
    band_order: Vec<String>,
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::Format(format!("model file: {}", reason.into()))
}

impl ModelDoc {
    fn from_model(model: &MlpModel) -> Self {
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            shape: vec![N_INPUTS, N_HIDDEN, 1],
            activations: Activations {
                hidden: "tanh".into(),
                output: "logistic".into(),
            },
            weights_hidden: (0..N_HIDDEN)
                .map(|j| model.hidden_row(j).to_vec())
                .collect(),
            weights_output: model.output_weights().to_vec(),
            normalizer: NormalizerDoc {
                min: model.normalizer.min.clone(),
                max: model.normalizer.max.clone(),
            },
            band_order: model.band_order.iter().map(|b| b.to_string()).collect(),
        }
    }

    fn into_model(self) -> Result<MlpModel> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(malformed(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.shape != [N_INPUTS, N_HIDDEN, 1] {
            return Err(malformed(format!("unsupported shape {:?}", self.shape)));
        }
        if self.activations.hidden != "tanh" || self.activations.output != "logistic" {
            return Err(malformed(format!(
                "unsupported activations {}/{}",
                self.activations.hidden, self.activations.output
            )));
        }
        if self.weights_hidden.len() != N_HIDDEN
            || self.weights_hidden.iter().any(|r| r.len() != HIDDEN_STRIDE)
        {
            return Err(malformed(format!(
                "weights_hidden must be {N_HIDDEN}x{HIDDEN_STRIDE}"
            )));
        }
        if self.weights_output.len() != N_HIDDEN + 1 {
            return Err(malformed(format!(
                "weights_output must have {} entries, got {}",
                N_HIDDEN + 1,
                self.weights_output.len()
            )));
        }
        let mut params = Vec::with_capacity(OUTPUT_OFFSET + N_HIDDEN + 1);
        self.weights_hidden.iter().for_each(|r| params.extend(r));
        params.extend(&self.weights_output);
        let normalizer = Normalizer::new(self.normalizer.min, self.normalizer.max)?;
        let band_order = self
            .band_order
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BandId>>>()?;
        MlpModel::from_params(params, normalizer, band_order)
    }
}

/// JSON model document; weights are written in shortest round-trip form.
pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let mut json =
        serde_json::to_vec_pretty(&ModelDoc::from_model(model)).expect("model serializes");
    json.push(b'\n');
    write_atomic(path, &json)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelDoc = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    doc.into_model()
}
