use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Cnn1dConfig, CONV_LAYERS, DENSE_LAYERS, DENSE_NEURONS, DROPOUT_GRID, FEATURE_MAPS, KERNEL_SIZE,
    LEARNING_RATES, THRESHOLD_GRID,
};

/// Search domain per hyperparameter. `feature_maps` and `dense_neurons` are
/// sampled log-uniformly; the rest are treated as categorical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub feature_maps: (usize, usize),
    pub kernel_size: (usize, usize),
    pub conv_layers: (usize, usize),
    pub dense_layers: (usize, usize),
    pub dense_neurons: (usize, usize),
    pub dropout: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub threshold: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            feature_maps: FEATURE_MAPS,
            kernel_size: KERNEL_SIZE,
            conv_layers: CONV_LAYERS,
            dense_layers: DENSE_LAYERS,
            dense_neurons: DENSE_NEURONS,
            dropout: DROPOUT_GRID.to_vec(),
            learning_rate: LEARNING_RATES.to_vec(),
            threshold: THRESHOLD_GRID.to_vec(),
        }
    }
}

/// One axis of the space, as seen by the sampler.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Dim {
    LogInt(usize, usize),
    Choice(Vec<f64>),
}

impl SearchSpace {
    /// Checks that the space is non-empty and nested in the model's limits.
    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("feature_maps", self.feature_maps, FEATURE_MAPS),
            ("kernel_size", self.kernel_size, KERNEL_SIZE),
            ("conv_layers", self.conv_layers, CONV_LAYERS),
            ("dense_layers", self.dense_layers, DENSE_LAYERS),
            ("dense_neurons", self.dense_neurons, DENSE_NEURONS),
        ];
        for (name, (lo, hi), (min, max)) in ints {
            if lo > hi || lo < min || hi > max {
                return Err(Error::InvalidConfig {
                    name,
                    value: if lo < min || lo > hi {
                        lo as f64
                    } else {
                        hi as f64
                    },
                });
            }
        }
        let grids = [
            ("dropout", &self.dropout, &DROPOUT_GRID[..]),
            ("learning_rate", &self.learning_rate, &LEARNING_RATES[..]),
            ("threshold", &self.threshold, &THRESHOLD_GRID[..]),
        ];
        for (name, values, allowed) in grids {
            if values.is_empty() {
                return Err(Error::InvalidConfig {
                    name,
                    value: f64::NAN,
                });
            }
            if let Some(&v) = values
                .iter()
                .find(|v| !allowed.iter().any(|a| (*a - **v).abs() < 1e-9))
            {
                return Err(Error::InvalidConfig { name, value: v });
            }
        }
        Ok(())
    }

    pub(crate) fn dims(&self) -> [Dim; 8] {
        let steps = |(lo, hi): (usize, usize)| Dim::Choice((lo..=hi).map(|v| v as f64).collect());
        [
            Dim::LogInt(self.feature_maps.0, self.feature_maps.1),
            steps(self.kernel_size),
            steps(self.conv_layers),
            steps(self.dense_layers),
            Dim::LogInt(self.dense_neurons.0, self.dense_neurons.1),
            Dim::Choice(self.dropout.clone()),
            Dim::Choice(self.learning_rate.clone()),
            Dim::Choice(self.threshold.clone()),
        ]
    }

    pub fn sample_random(&self, rng: &mut ChaCha8Rng) -> Cnn1dConfig {
        let values: Vec<f64> = self.dims().iter().map(|d| d.sample_uniform(rng)).collect();
        from_values(&values)
    }
}

impl Dim {
    pub(crate) fn sample_uniform(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Dim::LogInt(lo, hi) => {
                let (a, b) = log_bounds(*lo, *hi);
                snap_log(rng.random_range(a..b), *lo, *hi)
            }
            Dim::Choice(values) => values[rng.random_range(0..values.len())],
        }
    }
}

/// Log-space interval covering the integers `lo..=hi` with equal-width cells.
pub(crate) fn log_bounds(lo: usize, hi: usize) -> (f64, f64) {
    ((lo as f64).ln(), ((hi + 1) as f64).ln())
}

pub(crate) fn snap_log(u: f64, lo: usize, hi: usize) -> f64 {
    (u.exp().floor() as usize).clamp(lo, hi) as f64
}

pub(crate) fn to_values(c: &Cnn1dConfig) -> [f64; 8] {
    [
        c.feature_maps as f64,
        c.kernel_size as f64,
        c.conv_layers as f64,
        c.dense_layers as f64,
        c.dense_neurons as f64,
        c.dropout,
        c.learning_rate,
        c.threshold,
    ]
}

pub(crate) fn from_values(v: &[f64]) -> Cnn1dConfig {
    Cnn1dConfig {
        feature_maps: v[0] as usize,
        kernel_size: v[1] as usize,
        conv_layers: v[2] as usize,
        dense_layers: v[3] as usize,
        dense_neurons: v[4] as usize,
        dropout: v[5],
        learning_rate: v[6],
        threshold: v[7],
    }
}
