//! Forward and backward passes over a flat parameter vector.
//!
//! Conv blocks run one example at a time (im2col + GEMM); the dense head
//! runs on the whole batch.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::Cnn1dConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConvLayer {
    pub c_in: usize,
    pub l_in: usize,
    pub l_conv: usize,
    pub l_out: usize,
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub maps: usize,
    pub kernel: usize,
    pub channels: usize,
    pub length: usize,
    pub convs: Vec<ConvLayer>,
    pub denses: Vec<DenseLayer>,
    pub out_in: usize,
    pub out_w: usize,
    pub out_b: usize,
    pub n_params: usize,
}

/// A named slice of the parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGroup {
    pub name: String,
    pub range: Range<usize>,
}

impl Layout {
    pub fn new(cfg: &Cnn1dConfig, channels: usize, length: usize) -> Result<Self> {
        let shapes = cfg.block_shapes(length)?;
        let mut off = 0;
        let mut take = |n: usize| {
            let start = off;
            off += n;
            start
        };
        let mut convs = Vec::new();
        let (mut c_in, mut l_in) = (channels, length);
        for (l_conv, l_out) in shapes {
            let w = take(cfg.feature_maps * c_in * cfg.kernel_size);
            let b = take(cfg.feature_maps);
            convs.push(ConvLayer {
                c_in,
                l_in,
                l_conv,
                l_out,
                w,
                b,
            });
            c_in = cfg.feature_maps;
            l_in = l_out;
        }
        let mut denses = Vec::new();
        let mut n_in = cfg.feature_maps * l_in;
        for _ in 0..cfg.dense_layers {
            let w = take(cfg.dense_neurons * n_in);
            let b = take(cfg.dense_neurons);
            denses.push(DenseLayer {
                n_in,
                n_out: cfg.dense_neurons,
                w,
                b,
            });
            n_in = cfg.dense_neurons;
        }
        let out_w = take(n_in);
        let out_b = take(1);
        Ok(Layout {
            maps: cfg.feature_maps,
            kernel: cfg.kernel_size,
            channels,
            length,
            convs,
            denses,
            out_in: n_in,
            out_w,
            out_b,
            n_params: off,
        })
    }

    pub fn input_len(&self) -> usize {
        self.channels * self.length
    }

    pub fn flat_len(&self) -> usize {
        self.denses.first().map_or(self.out_in, |d| d.n_in)
    }

    pub fn groups(&self) -> Vec<ParamGroup> {
        let mut g = Vec::new();
        let k = self.kernel;
        for (i, c) in self.convs.iter().enumerate() {
            g.push(ParamGroup {
                name: format!("conv{i}.weight"),
                range: c.w..c.w + self.maps * c.c_in * k,
            });
            g.push(ParamGroup {
                name: format!("conv{i}.bias"),
                range: c.b..c.b + self.maps,
            });
        }
        for (i, d) in self.denses.iter().enumerate() {
            g.push(ParamGroup {
                name: format!("dense{i}.weight"),
                range: d.w..d.w + d.n_in * d.n_out,
            });
            g.push(ParamGroup {
                name: format!("dense{i}.bias"),
                range: d.b..d.b + d.n_out,
            });
        }
        g.push(ParamGroup {
            name: "output.weight".into(),
            range: self.out_w..self.out_w + self.out_in,
        });
        g.push(ParamGroup {
            name: "output.bias".into(),
            range: self.out_b..self.out_b + 1,
        });
        g
    }

    /// Fan-in scaled uniform weights, zero biases.
    pub fn init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = vec![0.0; self.n_params];
        let mut fill = |range: Range<usize>, fan_in: usize, gain: f64| {
            let a = (gain / fan_in as f64).sqrt();
            for v in &mut p[range] {
                *v = rng.random_range(-a..a);
            }
        };
        for c in &self.convs {
            let n = c.c_in * self.kernel;
            fill(c.w..c.w + self.maps * n, n, 6.0);
        }
        for d in &self.denses {
            fill(d.w..d.w + d.n_in * d.n_out, d.n_in, 6.0);
        }
        fill(self.out_w..self.out_w + self.out_in, self.out_in, 3.0);
        p
    }
}

/// `C = alpha·A·B + beta·C` on strided row/column views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(k == 0 || a.len() > (m - 1) * rsa + (k - 1) * csa);
    debug_assert!(k == 0 || b.len() > (k - 1) * rsb + (n - 1) * csb);
    debug_assert!(c.len() > (m - 1) * rsc + (n - 1));
    // SAFETY: the asserted extents keep every strided access inside its slice.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

fn im2col(x: &[f64], layer: &ConvLayer, k: usize, cols: &mut Vec<f64>) {
    let n = layer.l_conv;
    cols.clear();
    cols.resize(layer.c_in * k * n, 0.0);
    for c in 0..layer.c_in {
        for j in 0..k {
            let row = (c * k + j) * n;
            let src = c * layer.l_in + j;
            cols[row..row + n].copy_from_slice(&x[src..src + n]);
        }
    }
}

/// Per-example conv activations: pooled outputs and argmax offsets per block.
struct ConvTrace {
    pooled: Vec<Vec<f64>>,
    argmax: Vec<Vec<u32>>,
}

fn conv_forward(
    layout: &Layout,
    params: &[f64],
    x: &[f64],
    cols: &mut Vec<f64>,
    z: &mut Vec<f64>,
) -> ConvTrace {
    let (maps, k) = (layout.maps, layout.kernel);
    let mut pooled: Vec<Vec<f64>> = Vec::with_capacity(layout.convs.len());
    let mut argmax = Vec::with_capacity(layout.convs.len());
    for (i, layer) in layout.convs.iter().enumerate() {
        let input = if i == 0 { x } else { &pooled[i - 1][..] };
        im2col(input, layer, k, cols);
        let (kk, n) = (layer.c_in * k, layer.l_conv);
        z.clear();
        z.resize(maps * n, 0.0);
        gemm(
            maps,
            kk,
            n,
            &params[layer.w..layer.w + maps * kk],
            (kk, 1),
            cols,
            (n, 1),
            0.0,
            z,
            n,
        );
        let mut p = vec![0.0; maps * layer.l_out];
        let mut am = vec![0u32; maps * layer.l_out];
        for m in 0..maps {
            let bias = params[layer.b + m];
            let row = &z[m * n..(m + 1) * n];
            for t in 0..layer.l_out {
                let a = (row[2 * t] + bias).max(0.0);
                let b = (row[2 * t + 1] + bias).max(0.0);
                let (v, idx) = if a >= b { (a, 2 * t) } else { (b, 2 * t + 1) };
                p[m * layer.l_out + t] = v;
                am[m * layer.l_out + t] = idx as u32;
            }
        }
        pooled.push(p);
        argmax.push(am);
    }
    ConvTrace { pooled, argmax }
}

/// Accumulates conv gradients for one example given the gradient of its
/// flattened conv output.
fn conv_backward(
    layout: &Layout,
    params: &[f64],
    x: &[f64],
    trace: &ConvTrace,
    d_flat: &[f64],
    grad: &mut [f64],
    cols: &mut Vec<f64>,
) {
    let (maps, k) = (layout.maps, layout.kernel);
    let mut d_out = d_flat.to_vec();
    for (i, layer) in layout.convs.iter().enumerate().rev() {
        let (kk, n) = (layer.c_in * k, layer.l_conv);
        let mut dz = vec![0.0; maps * n];
        let p = &trace.pooled[i];
        let am = &trace.argmax[i];
        for idx in 0..maps * layer.l_out {
            if p[idx] > 0.0 {
                let m = idx / layer.l_out;
                dz[m * n + am[idx] as usize] = d_out[idx];
            }
        }
        let input = if i == 0 { x } else { &trace.pooled[i - 1][..] };
        im2col(input, layer, k, cols);
        gemm(
            maps,
            n,
            kk,
            &dz,
            (n, 1),
            cols,
            (1, n),
            1.0,
            &mut grad[layer.w..layer.w + maps * kk],
            kk,
        );
        for m in 0..maps {
            grad[layer.b + m] += dz[m * n..(m + 1) * n].iter().sum::<f64>();
        }
        if i == 0 {
            break;
        }
        let mut dcols = vec![0.0; kk * n];
        gemm(
            kk,
            maps,
            n,
            &params[layer.w..layer.w + maps * kk],
            (1, kk),
            &dz,
            (n, 1),
            0.0,
            &mut dcols,
            n,
        );
        let mut d_in = vec![0.0; layer.c_in * layer.l_in];
        for c in 0..layer.c_in {
            for j in 0..k {
                let src = &dcols[(c * k + j) * n..(c * k + j + 1) * n];
                let dst = &mut d_in[c * layer.l_in + j..c * layer.l_in + j + n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        d_out = d_in;
    }
}

/// Inverted-dropout scale factors, one vector per dense layer (`batch × n_out`).
pub(crate) fn dropout_masks(
    layout: &Layout,
    batch: usize,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let keep = 1.0 - rate;
    layout
        .denses
        .iter()
        .map(|d| {
            (0..batch * d.n_out)
                .map(|_| {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

struct DenseTrace {
    /// Inputs to each dense layer and to the output unit.
    acts: Vec<Vec<f64>>,
    /// Pre-activations of each dense layer.
    pre: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

fn dense_forward(
    layout: &Layout,
    params: &[f64],
    flat: Vec<f64>,
    batch: usize,
    masks: Option<&[Vec<f64>]>,
) -> DenseTrace {
    let mut acts = vec![flat];
    let mut pre = Vec::with_capacity(layout.denses.len());
    for (j, d) in layout.denses.iter().enumerate() {
        let mut z = vec![0.0; batch * d.n_out];
        for row in z.chunks_mut(d.n_out) {
            row.copy_from_slice(&params[d.b..d.b + d.n_out]);
        }
        let a = acts.last().expect("input activations");
        gemm(
            batch,
            d.n_in,
            d.n_out,
            a,
            (d.n_in, 1),
            &params[d.w..d.w + d.n_in * d.n_out],
            (1, d.n_in),
            1.0,
            &mut z,
            d.n_out,
        );
        let mut h: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
        if let Some(masks) = masks {
            for (v, s) in h.iter_mut().zip(&masks[j]) {
                *v *= s;
            }
        }
        pre.push(z);
        acts.push(h);
    }
    let a = acts.last().expect("output input");
    let w = &params[layout.out_w..layout.out_w + layout.out_in];
    let b = params[layout.out_b];
    let logits = a
        .chunks(layout.out_in)
        .map(|row| b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>())
        .collect();
    DenseTrace { acts, pre, logits }
}

fn conv_flat(layout: &Layout, params: &[f64], inputs: &[&[f64]]) -> (Vec<ConvTrace>, Vec<f64>) {
    let flat_len = layout.flat_len();
    let mut flat = Vec::with_capacity(inputs.len() * flat_len);
    let mut traces = Vec::with_capacity(inputs.len());
    let (mut cols, mut z) = (Vec::new(), Vec::new());
    for x in inputs {
        let trace = conv_forward(layout, params, x, &mut cols, &mut z);
        match trace.pooled.last() {
            Some(last) => flat.extend_from_slice(last),
            None => flat.extend_from_slice(x),
        }
        traces.push(trace);
    }
    (traces, flat)
}

/// Logits of a batch, dropout disabled.
pub(crate) fn logits(layout: &Layout, params: &[f64], inputs: &[&[f64]]) -> Vec<f64> {
    let (_, flat) = conv_flat(layout, params, inputs);
    dense_forward(layout, params, flat, inputs.len(), None).logits
}

/// Numerically stable binary cross-entropy on a logit.
pub(crate) fn bce_with_logit(s: f64, y: f64) -> f64 {
    s.max(0.0) - s * y + (-s.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Mean cross-entropy of the batch; `grad` is overwritten with its gradient.
pub(crate) fn loss_and_grad(
    layout: &Layout,
    params: &[f64],
    inputs: &[&[f64]],
    labels: &[f64],
    masks: Option<&[Vec<f64>]>,
    grad: &mut [f64],
) -> f64 {
    let batch = inputs.len();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let (traces, flat) = conv_flat(layout, params, inputs);
    let tr = dense_forward(layout, params, flat, batch, masks);
    let scale = 1.0 / batch as f64;
    let mut loss = 0.0;
    let ds: Vec<f64> = tr
        .logits
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            loss += bce_with_logit(s, y);
            (sigmoid(s) - y) * scale
        })
        .collect();

    let a = tr.acts.last().expect("output input");
    let w_out = &params[layout.out_w..layout.out_w + layout.out_in];
    let mut d_act = vec![0.0; batch * layout.out_in];
    for (i, &d) in ds.iter().enumerate() {
        let row = &a[i * layout.out_in..(i + 1) * layout.out_in];
        for (g, x) in grad[layout.out_w..layout.out_w + layout.out_in]
            .iter_mut()
            .zip(row)
        {
            *g += d * x;
        }
        for (da, w) in d_act[i * layout.out_in..(i + 1) * layout.out_in]
            .iter_mut()
            .zip(w_out)
        {
            *da = d * w;
        }
    }
    grad[layout.out_b] = ds.iter().sum();

    for (j, d) in layout.denses.iter().enumerate().rev() {
        let z = &tr.pre[j];
        let mut dz = d_act;
        for (idx, v) in dz.iter_mut().enumerate() {
            let scale = masks.map_or(1.0, |m| m[j][idx]);
            *v = if z[idx] > 0.0 { *v * scale } else { 0.0 };
        }
        let a_in = &tr.acts[j];
        gemm(
            d.n_out,
            batch,
            d.n_in,
            &dz,
            (1, d.n_out),
            a_in,
            (d.n_in, 1),
            1.0,
            &mut grad[d.w..d.w + d.n_out * d.n_in],
            d.n_in,
        );
        for row in dz.chunks(d.n_out) {
            for (g, v) in grad[d.b..d.b + d.n_out].iter_mut().zip(row) {
                *g += v;
            }
        }
        let mut da = vec![0.0; batch * d.n_in];
        gemm(
            batch,
            d.n_out,
            d.n_in,
            &dz,
            (d.n_out, 1),
            &params[d.w..d.w + d.n_out * d.n_in],
            (d.n_in, 1),
            0.0,
            &mut da,
            d.n_in,
        );
        d_act = da;
    }

    if !layout.convs.is_empty() {
        let flat_len = layout.flat_len();
        let mut cols = Vec::new();
        for (i, x) in inputs.iter().enumerate() {
            conv_backward(
                layout,
                params,
                x,
                &traces[i],
                &d_act[i * flat_len..(i + 1) * flat_len],
                grad,
                &mut cols,
            );
        }
    }
    loss * scale
}

/// Mean cross-entropy only (for finite differences).
pub(crate) fn loss(
    layout: &Layout,
    params: &[f64],
    inputs: &[&[f64]],
    labels: &[f64],
    masks: Option<&[Vec<f64>]>,
) -> f64 {
    let (_, flat) = conv_flat(layout, params, inputs);
    let tr = dense_forward(layout, params, flat, inputs.len(), masks);
    tr.logits
        .iter()
        .zip(labels)
        .map(|(&s, &y)| bce_with_logit(s, y))
        .sum::<f64>()
        * (1.0 / inputs.len() as f64)
}
