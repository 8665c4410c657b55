use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_MAPS: (usize, usize) = (8, 600);
pub const KERNEL_SIZE: (usize, usize) = (2, 6);
pub const CONV_LAYERS: (usize, usize) = (2, 4);
pub const DENSE_LAYERS: (usize, usize) = (1, 3);
pub const DENSE_NEURONS: (usize, usize) = (60, 320);
pub const DROPOUT_GRID: [f64; 4] = [0.2, 0.3, 0.4, 0.5];
pub const LEARNING_RATES: [f64; 7] = [0.0001, 0.0003, 0.0006, 0.001, 0.003, 0.006, 0.01];
pub const THRESHOLD_GRID: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Network and optimizer hyperparameters. Every conv block shares
/// `feature_maps`/`kernel_size`; every dense layer shares
/// `dense_neurons`/`dropout`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cnn1dConfig {
    pub feature_maps: usize,
    pub kernel_size: usize,
    pub conv_layers: usize,
    pub dense_layers: usize,
    pub dense_neurons: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub threshold: f64,
}

impl Default for Cnn1dConfig {
    fn default() -> Self {
        Cnn1dConfig {
            feature_maps: 32,
            kernel_size: 3,
            conv_layers: 2,
            dense_layers: 1,
            dense_neurons: 64,
            dropout: 0.2,
            learning_rate: 0.001,
            threshold: 0.5,
        }
    }
}

fn on_grid(v: f64, grid: &[f64]) -> bool {
    grid.iter().any(|g| (g - v).abs() < 1e-9)
}

fn in_range(name: &'static str, v: usize, (lo, hi): (usize, usize)) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            name,
            value: v as f64,
        })
    }
}

impl Cnn1dConfig {
    pub fn validate(&self) -> Result<()> {
        in_range("feature_maps", self.feature_maps, FEATURE_MAPS)?;
        in_range("kernel_size", self.kernel_size, KERNEL_SIZE)?;
        in_range("conv_layers", self.conv_layers, CONV_LAYERS)?;
        in_range("dense_layers", self.dense_layers, DENSE_LAYERS)?;
        in_range("dense_neurons", self.dense_neurons, DENSE_NEURONS)?;
        for (name, v, grid) in [
            ("dropout", self.dropout, &DROPOUT_GRID[..]),
            ("learning_rate", self.learning_rate, &LEARNING_RATES[..]),
            ("threshold", self.threshold, &THRESHOLD_GRID[..]),
        ] {
            if !on_grid(v, grid) {
                return Err(Error::InvalidConfig { name, value: v });
            }
        }
        Ok(())
    }

    /// `(conv_len, pooled_len)` per block for an input of `length` samples.
    pub fn block_shapes(&self, length: usize) -> Result<Vec<(usize, usize)>> {
        let mut len = length;
        let mut shapes = Vec::with_capacity(self.conv_layers);
        for block in 0..self.conv_layers {
            if len < self.kernel_size || (len - self.kernel_size).div_ceil(2) == 0 {
                return Err(Error::ShapeUnderflow { block, length });
            }
            let conv = len - self.kernel_size + 1;
            len = conv / 2;
            shapes.push((conv, len));
        }
        Ok(shapes)
    }

    /// Width of the flattened conv output.
    pub fn flat_len(&self, length: usize) -> Result<usize> {
        let shapes = self.block_shapes(length)?;
        Ok(self.feature_maps * shapes.last().map_or(length, |s| s.1))
    }

    /// Multiply-accumulates of one inference on a `channels × length` input.
    pub fn forward_macs(&self, channels: usize, length: usize) -> Result<u64> {
        let mut total = 0u64;
        let mut c_in = channels;
        for (conv, _) in self.block_shapes(length)? {
            total += (self.feature_maps * c_in * self.kernel_size * conv) as u64;
            c_in = self.feature_maps;
        }
        let mut n_in = self.flat_len(length)?;
        for _ in 0..self.dense_layers {
            total += (n_in * self.dense_neurons) as u64;
            n_in = self.dense_neurons;
        }
        Ok(total + n_in as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kernel_size: usize, conv_layers: usize) -> Cnn1dConfig {
        Cnn1dConfig {
            kernel_size,
            conv_layers,
            ..Default::default()
        }
    }

    #[test]
    fn shape_walkthrough() {
        assert_eq!(
            cfg(2, 2).block_shapes(450).unwrap(),
            vec![(449, 224), (223, 111)]
        );
    }

    #[test]
    fn shapes_match_brute_force_oracle() {
        // Oracle: slide the kernel position by position, then pair up outputs.
        fn oracle(d: usize, k: usize, blocks: usize) -> Option<Vec<(usize, usize)>> {
            let mut len = d;
            let mut out = Vec::new();
            for _ in 0..blocks {
                let conv = (0..len).filter(|&s| s + k <= len).count();
                let pooled = (0..conv).filter(|&s| s + 2 <= conv).step_by(2).count();
                if conv == 0 || pooled == 0 {
                    return None;
                }
                out.push((conv, pooled));
                len = pooled;
            }
            Some(out)
        }
        for d in 1..=1100 {
            for k in KERNEL_SIZE.0..=KERNEL_SIZE.1 {
                for h3 in CONV_LAYERS.0..=CONV_LAYERS.1 {
                    assert_eq!(
                        cfg(k, h3).block_shapes(d).ok(),
                        oracle(d, k, h3),
                        "d={d} k={k} h3={h3}"
                    );
                }
            }
        }
    }

    #[test]
    fn underflow_names_the_block() {
        assert!(matches!(
            cfg(6, 4).block_shapes(4),
            Err(Error::ShapeUnderflow {
                block: 0,
                length: 4
            })
        ));
        // 16 → 11 → 5: the kernel no longer fits the second block.
        assert!(matches!(
            cfg(6, 3).block_shapes(16),
            Err(Error::ShapeUnderflow { block: 1, .. })
        ));
        // 10 → 9 → 4 → 3 → 1 → 0: nothing left to pool in the third block.
        assert!(matches!(
            cfg(2, 3).block_shapes(10),
            Err(Error::ShapeUnderflow { block: 2, .. })
        ));
    }

    #[test]
    fn validation() {
        assert!(Cnn1dConfig::default().validate().is_ok());
        let bad = Cnn1dConfig {
            learning_rate: 0.002,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidConfig {
                name: "learning_rate",
                ..
            })
        ));
        let bad = Cnn1dConfig {
            feature_maps: 601,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidConfig {
                name: "feature_maps",
                ..
            })
        ));
        let bad = Cnn1dConfig {
            dropout: 0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn macs_by_hand() {
        let c = Cnn1dConfig {
            feature_maps: 8,
            kernel_size: 2,
            conv_layers: 2,
            dense_layers: 1,
            dense_neurons: 60,
            ..Default::default()
        };
        // D=16: 15→7, 6→3; flat 24.
        let expected = 8 * 2 * 2 * 15 + 8 * 8 * 2 * 6 + 24 * 60 + 60;
        assert_eq!(c.forward_macs(2, 16).unwrap(), expected as u64);
    }
}
