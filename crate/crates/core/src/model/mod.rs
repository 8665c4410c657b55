//! One-dimensional convolutional binary classifier.
//!
//! `conv_layers` blocks of conv (valid, stride 1) → ReLU → max-pool(2), then
//! `dense_layers` ReLU layers with inverted dropout, then one sigmoid unit.

mod checkpoint;
mod config;
mod gradcheck;
mod network;
mod train;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{
    Cnn1dConfig, CONV_LAYERS, DENSE_LAYERS, DENSE_NEURONS, DROPOUT_GRID, FEATURE_MAPS, KERNEL_SIZE,
    LEARNING_RATES, THRESHOLD_GRID,
};
pub use gradcheck::{check_gradients, GroupCheck};
pub use network::ParamGroup;
pub use train::{train, train_examples, EarlyStopping, EpochRecord, TrainHistory, TrainOptions};

use crate::error::{Error, Result};
use crate::features::{Example, Normalization, PipelineId};
use network::Layout;

/// Examples per inference batch.
const PREDICT_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: Cnn1dConfig,
    pub channels: usize,
    pub length: usize,
    pub history: TrainHistory,
    /// Set once trained on a scenario dataset; the detector needs both.
    pub pipeline: Option<PipelineId>,
    pub normalization: Option<Normalization>,
    params: Vec<f64>,
    layout: Layout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub channels: usize,
    pub length: usize,
}

/// Untrained model with seeded initial weights.
pub fn build(
    config: Cnn1dConfig,
    channels: usize,
    length: usize,
    seed: u64,
) -> Result<TrainedModel> {
    let layout = Layout::new(&config, channels, length)?;
    let params = layout.init(&mut crate::seed::rng(seed));
    Ok(TrainedModel {
        config,
        channels,
        length,
        history: TrainHistory::default(),
        pipeline: None,
        normalization: None,
        params,
        layout,
    })
}

impl TrainedModel {
    pub fn input_shape(&self) -> InputShape {
        InputShape {
            channels: self.channels,
            length: self.length,
        }
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameter_groups(&self) -> Vec<ParamGroup> {
        self.layout.groups()
    }

    pub fn set_parameters(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.layout.n_params {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", self.layout.n_params),
                found: format!("{} parameters", params.len()),
            });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        self.params = params;
        Ok(())
    }

    fn check_shape(&self, channels: usize, length: usize) -> Result<()> {
        if channels != self.channels || length != self.length {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.channels, self.length),
                found: format!("{channels}x{length}"),
            });
        }
        Ok(())
    }

    /// Fall probability for a raw `channels × length` row-major input.
    pub fn predict_raw(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.layout.input_len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", self.layout.input_len()),
                found: format!("{} values", input.len()),
            });
        }
        Ok(network::sigmoid(
            network::logits(&self.layout, &self.params, &[input])[0],
        ))
    }

    pub fn predict_proba(&self, example: &Example) -> Result<f64> {
        self.check_shape(example.channels, example.length)?;
        self.predict_raw(&example.data)
    }

    pub fn predict_proba_batch(&self, examples: &[Example]) -> Result<Vec<f64>> {
        for e in examples {
            self.check_shape(e.channels, e.length)?;
        }
        let mut out = Vec::with_capacity(examples.len());
        for chunk in examples.chunks(PREDICT_CHUNK) {
            let inputs: Vec<&[f64]> = chunk.iter().map(|e| e.data.as_slice()).collect();
            out.extend(
                network::logits(&self.layout, &self.params, &inputs)
                    .into_iter()
                    .map(network::sigmoid),
            );
        }
        Ok(out)
    }

    pub fn decide(&self, probability: f64) -> u8 {
        u8::from(probability >= self.config.threshold)
    }

    pub fn classify(&self, example: &Example) -> Result<u8> {
        Ok(self.decide(self.predict_proba(example)?))
    }

    pub fn classify_batch(&self, examples: &[Example]) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba_batch(examples)?
            .into_iter()
            .map(|p| self.decide(p))
            .collect())
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    pub(crate) fn params_mut(&mut self) -> &mut Vec<f64> {
        &mut self.params
    }

    pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
        crate::seed::rng(seed)
    }
}
