use ndarray::{Array1, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Activation tensor `[channels][height][width]`.
pub type FeatureTensor = Array3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvLayerSpec {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        ConvLayerSpec { in_channels, out_channels, kernel, stride: 1, padding: 0 }
    }

    pub fn with_padding(mut self, padding: usize) -> Self {
        self.padding = padding;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// `floor((in − S + 2·pad) / stride) + 1` per spatial axis.
    pub fn output_dims(&self, height: usize, width: usize) -> Result<(usize, usize)> {
        if self.kernel == 0 || self.stride == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Shape(format!("degenerate conv layer {self:?}")));
        }
        let dim = |len: usize| -> Result<usize> {
            let padded = len + 2 * self.padding;
            if padded < self.kernel {
                return Err(Error::Shape(format!(
                    "kernel {} larger than padded input {padded}",
                    self.kernel
                )));
            }
            Ok((padded - self.kernel) / self.stride + 1)
        };
        Ok((dim(height)?, dim(width)?))
    }

    pub fn kernel_shape(&self) -> (usize, usize, usize, usize) {
        (self.out_channels, self.in_channels, self.kernel, self.kernel)
    }
}

fn check_conv(input: &FeatureTensor, spec: &ConvLayerSpec, kernels: &Array4<f64>, biases: &Array1<f64>) -> Result<(usize, usize)> {
    if input.dim().0 != spec.in_channels {
        return Err(Error::Shape(format!("input has {} channels, layer expects {}", input.dim().0, spec.in_channels)));
    }
    if kernels.dim() != spec.kernel_shape() {
        return Err(Error::Shape(format!("kernel tensor {:?}, layer expects {:?}", kernels.dim(), spec.kernel_shape())));
    }
    if biases.len() != spec.out_channels {
        return Err(Error::Shape(format!("{} biases for {} output channels", biases.len(), spec.out_channels)));
    }
    spec.output_dims(input.dim().1, input.dim().2)
}

/// Cross-correlation `A[k][i][j] = Σ_{c,s₁,s₂} W[k][c][s₁][s₂]·x[c][i·st+s₁−pad][j·st+s₂−pad] + b[k]`
/// with zero padding.
pub fn conv_forward(input: &FeatureTensor, spec: &ConvLayerSpec, kernels: &Array4<f64>, biases: &Array1<f64>) -> Result<FeatureTensor> {
    let (oh, ow) = check_conv(input, spec, kernels, biases)?;
    let (_, ih, iw) = input.dim();
    let (s, st, pad) = (spec.kernel, spec.stride, spec.padding as isize);
    let mut out = Array3::zeros((spec.out_channels, oh, ow));
    for k in 0..spec.out_channels {
        for i in 0..oh {
            for j in 0..ow {
                let mut acc = biases[k];
                for c in 0..spec.in_channels {
                    for s1 in 0..s {
                        let r = (i * st + s1) as isize - pad;
                        if r < 0 || r >= ih as isize {
                            continue;
                        }
                        for s2 in 0..s {
                            let col = (j * st + s2) as isize - pad;
                            if col < 0 || col >= iw as isize {
                                continue;
                            }
                            acc += kernels[[k, c, s1, s2]] * input[[c, r as usize, col as usize]];
                        }
                    }
                }
                out[[k, i, j]] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of a conv layer given the upstream gradient `grad_out`:
/// `(∂/∂input, ∂/∂kernels, ∂/∂biases)`.
pub fn conv_backward(
    input: &FeatureTensor,
    spec: &ConvLayerSpec,
    kernels: &Array4<f64>,
    grad_out: &FeatureTensor,
) -> Result<(FeatureTensor, Array4<f64>, Array1<f64>)> {
    let (oh, ow) = check_conv(input, spec, kernels, &Array1::zeros(spec.out_channels))?;
    if grad_out.dim() != (spec.out_channels, oh, ow) {
        return Err(Error::Shape(format!("upstream gradient {:?}, expected {:?}", grad_out.dim(), (spec.out_channels, oh, ow))));
    }
    let (_, ih, iw) = input.dim();
    let (s, st, pad) = (spec.kernel, spec.stride, spec.padding as isize);
    let mut d_in = Array3::zeros(input.dim());
    let mut d_w = Array4::zeros(kernels.dim());
    let mut d_b = Array1::zeros(spec.out_channels);
    for k in 0..spec.out_channels {
        for i in 0..oh {
            for j in 0..ow {
                let g = grad_out[[k, i, j]];
                d_b[k] += g;
                if g == 0.0 {
                    continue;
                }
                for c in 0..spec.in_channels {
                    for s1 in 0..s {
                        let r = (i * st + s1) as isize - pad;
                        if r < 0 || r >= ih as isize {
                            continue;
                        }
                        for s2 in 0..s {
                            let col = (j * st + s2) as isize - pad;
                            if col < 0 || col >= iw as isize {
                                continue;
                            }
                            let (r, col) = (r as usize, col as usize);
                            d_w[[k, c, s1, s2]] += g * input[[c, r, col]];
                            d_in[[c, r, col]] += g * kernels[[k, c, s1, s2]];
                        }
                    }
                }
            }
        }
    }
    Ok((d_in, d_w, d_b))
}

pub fn relu_forward(t: &FeatureTensor) -> FeatureTensor {
    t.mapv(|v| v.max(0.0))
}

/// Passes the gradient where the pre-activation is strictly positive.
pub fn relu_backward(pre: &FeatureTensor, grad: &FeatureTensor) -> FeatureTensor {
    let mut out = grad.clone();
    ndarray::Zip::from(&mut out).and(pre).for_each(|g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    out
}

/// Winner positions of a max-pool forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolCache {
    input_shape: (usize, usize, usize),
    /// For each output cell (row-major), the input `(row, col)` that won.
    winners: Vec<(usize, usize)>,
}

/// Non-overlapping `window × window` max pool. Ragged borders behave as if
/// the input were edge-replicated to a multiple of `window`: the partial
/// window takes the max of the cells it covers. Ties go to the first cell in
/// row-major order.
pub fn maxpool_forward(t: &FeatureTensor, window: usize) -> Result<(FeatureTensor, PoolCache)> {
    if window == 0 {
        return Err(Error::Shape("pool window must be ≥ 1".into()));
    }
    let (c, h, w) = t.dim();
    let (oh, ow) = (h.div_ceil(window), w.div_ceil(window));
    let mut out = Array3::zeros((c, oh, ow));
    let mut winners = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for i in 0..oh {
            for j in 0..ow {
                let mut best = (i * window, j * window);
                let mut best_v = f64::NEG_INFINITY;
                for r in i * window..((i + 1) * window).min(h) {
                    for col in j * window..((j + 1) * window).min(w) {
                        let v = t[[ch, r, col]];
                        if v > best_v {
                            best_v = v;
                            best = (r, col);
                        }
                    }
                }
                out[[ch, i, j]] = best_v;
                winners.push(best);
            }
        }
    }
    Ok((out, PoolCache { input_shape: (c, h, w), winners }))
}

pub fn maxpool_backward(cache: &PoolCache, grad: &FeatureTensor) -> Result<FeatureTensor> {
    let (c, oh, ow) = grad.dim();
    if c * oh * ow != cache.winners.len() || c != cache.input_shape.0 {
        return Err(Error::Shape(format!("pool gradient {:?} does not match cache", grad.dim())));
    }
    let mut out = Array3::zeros(cache.input_shape);
    for ((idx, g), &(r, col)) in grad.iter().enumerate().zip(&cache.winners) {
        let ch = idx / (oh * ow);
        out[[ch, r, col]] += g;
    }
    Ok(out)
}
