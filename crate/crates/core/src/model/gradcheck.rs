use serde::Serialize;

use super::network::{dropout_masks, loss, loss_and_grad};
use super::TrainedModel;
use crate::error::Result;
use crate::features::Example;

const RELATIVE_FLOOR: f64 = 1e-6;

/// Worst analytic-vs-numeric disagreement within one parameter group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupCheck {
    pub name: String,
    pub parameters: usize,
    pub max_relative_error: f64,
    pub max_abs_gradient: f64,
}

/// Compares backprop gradients of the batch loss with central differences
/// for every parameter. Dropout masks, when `dropout_seed` is given, are
/// drawn once and held fixed so the loss is a deterministic function.
///
/// Relative error is `|a − n| / max(|a|, |n|, 1e-6)`. The floor keeps
/// finite-difference roundoff (about ε·loss/step) on near-zero gradients from
/// reading as disagreement.
pub fn check_gradients(
    model: &TrainedModel,
    batch: &[Example],
    step: f64,
    dropout_seed: Option<u64>,
) -> Result<Vec<GroupCheck>> {
    for e in batch {
        model.check_shape(e.channels, e.length)?;
    }
    let layout = model.layout();
    let inputs: Vec<&[f64]> = batch.iter().map(|e| e.data.as_slice()).collect();
    let labels: Vec<f64> = batch.iter().map(|e| f64::from(e.label)).collect();
    let masks = dropout_seed.map(|s| {
        dropout_masks(
            layout,
            batch.len(),
            model.config.dropout,
            &mut TrainedModel::rng(s),
        )
    });
    let masks = masks.as_deref();

    let mut analytic = vec![0.0; layout.n_params];
    loss_and_grad(
        layout,
        model.parameters(),
        &inputs,
        &labels,
        masks,
        &mut analytic,
    );

    let mut params = model.parameters().to_vec();
    let mut out = Vec::new();
    for group in layout.groups() {
        let mut worst = 0.0f64;
        let mut largest = 0.0f64;
        for i in group.range.clone() {
            let orig = params[i];
            params[i] = orig + step;
            let up = loss(layout, &params, &inputs, &labels, masks);
            params[i] = orig - step;
            let down = loss(layout, &params, &inputs, &labels, masks);
            params[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[i];
            let scale = a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
            largest = largest.max(a.abs());
            worst = worst.max((a - numeric).abs() / scale);
        }
        out.push(GroupCheck {
            name: group.name,
            parameters: group.range.len(),
            max_relative_error: worst,
            max_abs_gradient: largest,
        });
    }
    Ok(out)
}
