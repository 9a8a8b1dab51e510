use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{init_xavier_normal, BatchNormLayer, Layer};
use super::model::MlpModel;
use super::NnError;

/// Named hidden-layer architecture with its default epoch count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub hidden: Vec<usize>,
    pub batch_norm: bool,
    pub epochs: usize,
}

impl ModelSpec {
    pub const NAMES: [&'static str; 8] = ["d1", "d2", "d3", "m1", "m2", "m3", "m4", "m5"];

    pub fn new(
        name: &str,
        hidden: &[usize],
        batch_norm: bool,
        epochs: usize,
    ) -> Result<Self, NnError> {
        if hidden.contains(&0) {
            return Err(NnError::Config(
                "hidden layer sizes must be positive".into(),
            ));
        }
        if epochs == 0 {
            return Err(NnError::Config("epochs must be at least 1".into()));
        }
        Ok(Self {
            name: name.to_string(),
            hidden: hidden.to_vec(),
            batch_norm,
            epochs,
        })
    }

    /// Look up a preset by case-insensitive name.
    pub fn preset(name: &str) -> Result<Self, NnError> {
        let (hidden, bn, epochs): (&[usize], bool, usize) = match name.to_ascii_lowercase().as_str()
        {
            "d1" => (&[128], false, 50),
            "d2" => (&[256], false, 50),
            "d3" => (&[128, 128], false, 50),
            "m1" => (&[512], false, 50),
            "m2" => (&[1024], false, 50),
            "m3" => (&[512, 512], false, 50),
            "m4" => (&[512, 512, 512], false, 50),
            "m5" => (&[512, 256], true, 200),
            other => return Err(NnError::Config(format!("unknown preset {other:?}"))),
        };
        Self::new(&name.to_ascii_lowercase(), hidden, bn, epochs)
    }

    pub fn is_message_preset(&self) -> bool {
        self.name.starts_with('d')
    }

    /// Fresh Xavier-initialized network. Each hidden block is
    /// dense, optional batch norm, ReLU.
    pub fn build(&self, input: usize, classes: usize, seed: u64) -> Result<MlpModel, NnError> {
        if input == 0 || classes < 2 {
            return Err(NnError::Config(format!(
                "need input > 0 and at least 2 classes, got {input} and {classes}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut width = input;
        for &h in &self.hidden {
            layers.push(Layer::Dense(init_xavier_normal(width, h, &mut rng)));
            if self.batch_norm {
                layers.push(Layer::BatchNorm(BatchNormLayer::new(h)));
            }
            layers.push(Layer::Relu);
            width = h;
        }
        layers.push(Layer::Dense(init_xavier_normal(width, classes, &mut rng)));
        Ok(MlpModel { layers })
    }
}
