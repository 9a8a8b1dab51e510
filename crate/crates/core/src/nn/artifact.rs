use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::layers::{BatchNormLayer, DenseLayer, Layer};
use super::model::MlpModel;
use super::NnError;
use crate::features::FeatureKind;

const FORMAT_VERSION: u32 = 1;

/// A trained network plus everything needed to feed it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub preset: String,
    pub feature_kind: FeatureKind,
    pub normalize: bool,
    pub sample_rate: f64,
    /// Class names in output order: "authentic"/"malicious" or ICAO hex.
    pub classes: Vec<String>,
    pub split_seed: u64,
    pub model: MlpModel,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LayerRecord {
    Dense {
        fan_in: usize,
        fan_out: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
    },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
        momentum: f64,
        epsilon: f64,
    },
    Relu,
}

#[derive(Serialize, Deserialize)]
struct ArtifactRecord {
    version: u32,
    preset: String,
    feature_kind: FeatureKind,
    normalize: bool,
    sample_rate: f64,
    classes: Vec<String>,
    split_seed: u64,
    layers: Vec<LayerRecord>,
}

fn to_record(layer: &Layer) -> LayerRecord {
    match layer {
        Layer::Dense(d) => LayerRecord::Dense {
            fan_in: d.fan_in(),
            fan_out: d.fan_out(),
            weights: d.weights.iter().copied().collect(),
            biases: d.biases.to_vec(),
        },
        Layer::BatchNorm(b) => LayerRecord::BatchNorm {
            gamma: b.gamma.to_vec(),
            beta: b.beta.to_vec(),
            running_mean: b.running_mean.to_vec(),
            running_var: b.running_var.to_vec(),
            momentum: b.momentum,
            epsilon: b.epsilon,
        },
        Layer::Relu => LayerRecord::Relu,
    }
}

fn from_record(rec: LayerRecord) -> Result<Layer, NnError> {
    Ok(match rec {
        LayerRecord::Dense {
            fan_in,
            fan_out,
            weights,
            biases,
        } => Layer::Dense(DenseLayer {
            weights: Array2::from_shape_vec((fan_out, fan_in), weights)
                .map_err(|e| NnError::Format(format!("dense weights: {e}")))?,
            biases: Array1::from(biases),
        }),
        LayerRecord::BatchNorm {
            gamma,
            beta,
            running_mean,
            running_var,
            momentum,
            epsilon,
        } => {
            if running_var.iter().any(|&v| v < 0.0) {
                return Err(NnError::Format("negative running variance".into()));
            }
            Layer::BatchNorm(BatchNormLayer {
                gamma: gamma.into(),
                beta: beta.into(),
                running_mean: running_mean.into(),
                running_var: running_var.into(),
                momentum,
                epsilon,
            })
        }
        LayerRecord::Relu => Layer::Relu,
    })
}

/// Pretty-printed JSON; floats are written in shortest round-trip form.
pub fn save_model<W: Write>(artifact: &ModelArtifact, out: W) -> Result<(), NnError> {
    let rec = ArtifactRecord {
        version: FORMAT_VERSION,
        preset: artifact.preset.clone(),
        feature_kind: artifact.feature_kind,
        normalize: artifact.normalize,
        sample_rate: artifact.sample_rate,
        classes: artifact.classes.clone(),
        split_seed: artifact.split_seed,
        layers: artifact.model.layers.iter().map(to_record).collect(),
    };
    serde_json::to_writer(out, &rec).map_err(|e| NnError::Format(e.to_string()))
}

pub fn load_model<R: Read>(input: R) -> Result<ModelArtifact, NnError> {
    let rec: ArtifactRecord =
        serde_json::from_reader(input).map_err(|e| NnError::Format(e.to_string()))?;
    if rec.version != FORMAT_VERSION {
        return Err(NnError::Format(format!(
            "unsupported model version {}",
            rec.version
        )));
    }
    let model = MlpModel {
        layers: rec
            .layers
            .into_iter()
            .map(from_record)
            .collect::<Result<_, _>>()?,
    };
    model
        .validate()
        .map_err(|e| NnError::Format(e.to_string()))?;
    if model.classes() != Some(rec.classes.len()) {
        return Err(NnError::Format(format!(
            "class table has {} entries, model has {:?} outputs",
            rec.classes.len(),
            model.classes()
        )));
    }
    if rec
        .feature_kind
        .width(rec.sample_rate)
        .is_some_and(|w| model.input_width() != Some(w))
    {
        return Err(NnError::Format(
            "model input width does not match its feature kind".into(),
        ));
    }
    Ok(ModelArtifact {
        preset: rec.preset,
        feature_kind: rec.feature_kind,
        normalize: rec.normalize,
        sample_rate: rec.sample_rate,
        classes: rec.classes,
        split_seed: rec.split_seed,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Mode, ModelSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn artifact() -> ModelArtifact {
        ModelArtifact {
            preset: "m5".into(),
            feature_kind: FeatureKind::Phase,
            normalize: false,
            sample_rate: 2e6,
            classes: vec!["40621D".into(), "ABC123".into(), "000001".into()],
            split_seed: 9,
            model: ModelSpec::preset("m5").unwrap().build(240, 3, 5).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut a = artifact();
        if let Layer::BatchNorm(b) = &mut a.model.layers[1] {
            b.running_mean.mapv_inplace(|_| 0.1 + 1e-17);
            b.running_var.mapv_inplace(|_| std::f64::consts::PI);
        }
        let mut buf = Vec::new();
        save_model(&a, &mut buf).unwrap();
        let b = load_model(&buf[..]).unwrap();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_simple_fn((100, 240), || rng.random_range(-3.0..3.0));
        assert_eq!(
            a.model.forward(x.view(), Mode::Inference).unwrap(),
            b.model.forward(x.view(), Mode::Inference).unwrap()
        );
    }

    #[test]
    fn truncated_and_mismatched_files_fail() {
        let mut buf = Vec::new();
        save_model(&artifact(), &mut buf).unwrap();
        assert!(matches!(
            load_model(&buf[..buf.len() / 2]),
            Err(NnError::Format(_))
        ));

        let mut wrong = artifact();
        wrong.classes.pop();
        let mut buf = Vec::new();
        save_model(&wrong, &mut buf).unwrap();
        assert!(matches!(load_model(&buf[..]), Err(NnError::Format(_))));
    }
}
