use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::{dropout_masks, loss_and_grad};
use super::TrainedModel;
use crate::error::{Error, Result};
use crate::eval::{confusion, mcc};
use crate::features::{Example, ScenarioDataset};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarlyStopping {
    /// Epochs without a validation-MCC improvement before stopping.
    pub patience: usize,
    /// Stop as soon as validation MCC reaches 1; later epochs could only tie.
    pub stop_on_perfect: bool,
}

impl Default for EarlyStopping {
    fn default() -> Self {
        EarlyStopping {
            patience: 10,
            stop_on_perfect: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub early_stopping: Option<EarlyStopping>,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            max_epochs: 100,
            batch_size: 32,
            early_stopping: Some(EarlyStopping::default()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mcc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// Trains on the dataset's train split, selecting the epoch by validation MCC.
pub fn train(
    model: &TrainedModel,
    ds: &ScenarioDataset,
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    let mut out = train_examples(model, &ds.train, &ds.val, opts)?;
    out.pipeline = Some(ds.pipeline);
    out.normalization = Some(ds.normalization.clone());
    Ok(out)
}

fn validation_mcc(model: &TrainedModel, val: &[Example]) -> Result<f64> {
    let preds = model.classify_batch(val)?;
    let labels: Vec<u8> = val.iter().map(|e| e.label).collect();
    Ok(mcc(&confusion(&labels, &preds)?))
}

/// Minibatch Adam on binary cross-entropy. With a non-empty `val`, the
/// parameters of the best validation-MCC epoch (earliest on ties) are
/// returned; otherwise those of the last epoch.
pub fn train_examples(
    model: &TrainedModel,
    train: &[Example],
    val: &[Example],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    for e in train.iter().chain(val) {
        model.check_shape(e.channels, e.length)?;
    }
    let mut current = model.clone();
    current.history = TrainHistory::default();
    if opts.max_epochs == 0 {
        return Ok(current);
    }
    if train.is_empty() {
        return Err(Error::TooFewExamples { needed: 1, got: 0 });
    }
    let batch_size = opts.batch_size.max(1);
    let lr = model.config.learning_rate;
    let dropout = model.config.dropout;
    let n = model.layout().n_params;
    let (mut m, mut v, mut grad) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut step = 0i32;
    let mut rng = TrainedModel::rng(opts.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;

    for epoch in 1..=opts.max_epochs {
        let last_finite_epoch = (epoch > 1).then(|| epoch - 1);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch_size) {
            let inputs: Vec<&[f64]> = chunk.iter().map(|&i| train[i].data.as_slice()).collect();
            let labels: Vec<f64> = chunk.iter().map(|&i| f64::from(train[i].label)).collect();
            let masks = (dropout > 0.0)
                .then(|| dropout_masks(current.layout(), chunk.len(), dropout, &mut rng));
            let loss = loss_and_grad(
                current.layout(),
                current.parameters(),
                &inputs,
                &labels,
                masks.as_deref(),
                &mut grad,
            );
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    last_finite_epoch,
                });
            }
            total += loss * chunk.len() as f64;

            step += 1;
            let c1 = 1.0 - BETA1.powi(step);
            let c2 = 1.0 - BETA2.powi(step);
            for (((p, g), m), v) in current
                .params_mut()
                .iter_mut()
                .zip(&grad)
                .zip(&mut m)
                .zip(&mut v)
            {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
            }
        }
        if current.parameters().iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss {
                epoch,
                last_finite_epoch,
            });
        }
        let train_loss = total / train.len() as f64;
        let val_mcc = if val.is_empty() {
            None
        } else {
            Some(validation_mcc(&current, val)?)
        };
        debug!("epoch {epoch}: loss {train_loss:.5} val mcc {val_mcc:?}");
        current.history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_mcc,
        });

        let Some(score) = val_mcc else { continue };
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, epoch, current.parameters().to_vec()));
        }
        if let Some(es) = opts.early_stopping {
            let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
            if (es.stop_on_perfect && score >= 1.0) || epoch - best_epoch >= es.patience {
                current.history.stopped_early = epoch < opts.max_epochs;
                break;
            }
        }
    }

    match best {
        Some((_, epoch, params)) => {
            *current.params_mut() = params;
            current.history.best_epoch = Some(epoch);
        }
        None => current.history.best_epoch = current.history.epochs.last().map(|e| e.epoch),
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Provenance;
    use crate::ingest::ActivityCode;
    use crate::model::{build, Cnn1dConfig};

    fn separable(n: usize, channels: usize, length: usize) -> Vec<Example> {
        (0..n)
            .map(|i| {
                let label = (i % 2) as u8;
                let data = (0..channels * length)
                    .map(|k| {
                        let t = (k % length) as f64;
                        let wobble = ((i * 7 + k) as f64 * 0.37).sin() * 0.1;
                        if label == 1 {
                            (t * 0.8).sin() + wobble
                        } else {
                            -0.5 + wobble
                        }
                    })
                    .collect();
                Example {
                    channels,
                    length,
                    data,
                    label,
                    provenance: Provenance {
                        subject_id: 0,
                        activity: ActivityCode::adl(1),
                    },
                }
            })
            .collect()
    }

    fn cfg() -> Cnn1dConfig {
        Cnn1dConfig {
            feature_maps: 8,
            kernel_size: 3,
            conv_layers: 2,
            dense_layers: 1,
            dense_neurons: 60,
            dropout: 0.2,
            learning_rate: 0.003,
            threshold: 0.5,
        }
    }

    #[test]
    fn zero_epochs_is_identity() {
        let m = build(cfg(), 2, 32, 4).unwrap();
        let data = separable(20, 2, 32);
        let opts = TrainOptions {
            max_epochs: 0,
            ..Default::default()
        };
        assert_eq!(train_examples(&m, &data, &data, &opts).unwrap(), m);
    }

    #[test]
    fn overfits_a_separable_set() {
        let data = separable(20, 2, 32);
        let m = build(cfg(), 2, 32, 4).unwrap();
        let opts = TrainOptions {
            max_epochs: 200,
            batch_size: 32,
            early_stopping: None,
            seed: 1,
        };
        let trained = train_examples(&m, &data, &[], &opts).unwrap();
        let losses: Vec<f64> = trained
            .history
            .epochs
            .iter()
            .map(|e| e.train_loss)
            .collect();
        assert!(
            losses.iter().any(|&l| l < 0.01),
            "final loss {:?}",
            losses.last()
        );
        // Trend: the late-epoch average sits well below the early one.
        let early: f64 = losses[..10].iter().sum::<f64>() / 10.0;
        let late: f64 = losses[losses.len() - 10..].iter().sum::<f64>() / 10.0;
        assert!(late < early * 0.1);
        for e in &data {
            let p = trained.predict_proba(e).unwrap();
            let confident = if e.label == 1 { p > 0.99 } else { p < 0.01 };
            assert!(confident, "label {} p {p}", e.label);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = separable(24, 1, 32);
        let m = build(cfg(), 1, 32, 9).unwrap();
        let opts = TrainOptions {
            max_epochs: 5,
            seed: 3,
            ..Default::default()
        };
        let a = train_examples(&m, &data[..16], &data[16..], &opts).unwrap();
        let b = train_examples(&m, &data[..16], &data[16..], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keeps_the_best_validation_epoch() {
        let data = separable(40, 1, 32);
        let m = build(cfg(), 1, 32, 2).unwrap();
        let opts = TrainOptions {
            max_epochs: 15,
            early_stopping: None,
            seed: 8,
            ..Default::default()
        };
        let t = train_examples(&m, &data[..30], &data[30..], &opts).unwrap();
        let best = t.history.best_epoch.unwrap();
        let scores: Vec<f64> = t
            .history
            .epochs
            .iter()
            .map(|e| e.val_mcc.unwrap())
            .collect();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(scores[best - 1], max);
        assert!(scores[..best - 1].iter().all(|&s| s < max));
        assert_eq!(validation_mcc(&t, &data[30..]).unwrap(), max);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let m = build(cfg(), 2, 32, 0).unwrap();
        let data = separable(10, 1, 32);
        assert!(matches!(
            train_examples(&m, &data, &[], &TrainOptions::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let data = separable(8, 1, 32);
        let mut m = build(cfg(), 1, 32, 0).unwrap();
        let out_b = m.layout().out_b;
        m.params_mut()[out_b] = f64::INFINITY;
        let err = train_examples(
            &m,
            &data,
            &[],
            &TrainOptions {
                max_epochs: 3,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonFiniteLoss {
                epoch: 1,
                last_finite_epoch: None
            }
        ));
    }
}
