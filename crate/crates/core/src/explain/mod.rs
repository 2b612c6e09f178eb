//! Class activation heatmaps for the hybrid model.
//!
//! For class `ℓ` the score `f^ℓ` (readout output, before softmax) is
//! differentiated with respect to the tapped activation maps `A`:
//! readout row → circuit input Jacobian → projection transpose. The channel
//! weights are the spatial means of that gradient and the heatmap is
//! `ReLU(Σ_k w_k A^k)`.

mod export;

pub use export::{colormap, export_overlay, overlay_rgb, read_grayscale, to_gray_u8, write_pgm, write_png, HEAT_STOPS};

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::cnn::FeatureTensor;
use crate::hybrid::HybridModel;
use crate::vqc::{grad_input_analytic, grad_input_shift};
use crate::{Error, Result};

/// How `∂⟨Q⟩/∂x` is evaluated inside the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradPath {
    #[default]
    Shift,
    Analytic,
}

impl std::str::FromStr for GradPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(GradPath::Shift),
            "analytic" => Ok(GradPath::Analytic),
            other => Err(Error::InvalidArgument(format!("unknown gradient path {other:?} (shift | analytic)"))),
        }
    }
}

/// `∂f^ℓ/∂A`, same shape as `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationGradient {
    /// 0-based class.
    pub class: usize,
    pub grad: FeatureTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelWeights {
    pub class: usize,
    pub w: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    /// `ReLU(Σ_k w_k A^k)`, `[H][W]`.
    pub raw: Array2<f64>,
    /// `raw / max(raw)`, or all zeros when `raw` is.
    pub normalized: Array2<f64>,
}

pub fn activation_gradient(model: &HybridModel, activation: &FeatureTensor, class: usize, path: GradPath) -> Result<ActivationGradient> {
    let m = model.classes();
    if class >= m {
        return Err(Error::InvalidLabel { label: class, classes: m });
    }
    if activation.dim() != model.activation_shape() {
        return Err(Error::Shape(format!("activation {:?}, model taps {:?}", activation.dim(), model.activation_shape())));
    }
    let z = model.project(activation);
    let jac = match path {
        GradPath::Shift => grad_input_shift(&z, &model.theta, &model.circuit)?,
        GradPath::Analytic => grad_input_analytic(&z, &model.theta, &model.circuit)?,
    };
    let d_expect = model.readout.row(class);
    let d_z = jac.t().dot(&d_expect);
    let d_a = model.projection.t().dot(&d_z);
    let grad = Array3::from_shape_vec(activation.dim(), d_a.to_vec()).expect("projection width matches activation");
    Ok(ActivationGradient { class, grad })
}

/// `w_k = mean_{ij} g[k][i][j]`.
pub fn channel_weights(g: &ActivationGradient) -> ChannelWeights {
    let (k, h, w) = g.grad.dim();
    let area = (h * w) as f64;
    let w = Array1::from_shape_fn(k, |c| g.grad.slice(ndarray::s![c, .., ..]).sum() / area);
    ChannelWeights { class: g.class, w }
}

pub fn heatmap(a: &FeatureTensor, w: &ChannelWeights) -> Result<Heatmap> {
    let (k, h, wd) = a.dim();
    if w.w.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: w.w.len() });
    }
    let mut raw = Array2::zeros((h, wd));
    for c in 0..k {
        raw.scaled_add(w.w[c], &a.slice(ndarray::s![c, .., ..]));
    }
    raw.mapv_inplace(|v: f64| v.max(0.0));
    let normalized = normalize(&raw);
    Ok(Heatmap { raw, normalized })
}

/// Divide by the maximum. An identically zero map stays zero (with a warning).
pub fn normalize(raw: &Array2<f64>) -> Array2<f64> {
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        raw.mapv(|v| v / max)
    } else {
        log::warn!("heatmap is identically zero; normalized map left at zero");
        Array2::zeros(raw.dim())
    }
}

/// Corner-aligned bilinear interpolation onto `rows × cols` (output corners
/// sample the input corners exactly).
pub fn upsample_bilinear(map: &Array2<f64>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let (sr, sc) = map.dim();
    if sr == 0 || sc == 0 || rows == 0 || cols == 0 {
        return Err(Error::Shape("degenerate upsampling dimensions".into()));
    }
    if rows < sr || cols < sc {
        return Err(Error::Shape(format!("target {rows}×{cols} smaller than source {sr}×{sc}")));
    }
    let coord = |i: usize, dst: usize, src: usize| -> (usize, usize, f64) {
        if dst == 1 || src == 1 {
            return (0, 0, 0.0);
        }
        let x = i as f64 * (src - 1) as f64 / (dst - 1) as f64;
        let lo = (x.floor() as usize).min(src - 2);
        (lo, lo + 1, x - lo as f64)
    };
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        let (r0, r1, fr) = coord(i, rows, sr);
        let (c0, c1, fc) = coord(j, cols, sc);
        let top = map[(r0, c0)] + (map[(r0, c1)] - map[(r0, c0)]) * fc;
        let bottom = map[(r1, c0)] + (map[(r1, c1)] - map[(r1, c0)]) * fc;
        top + (bottom - top) * fr
    }))
}

/// Everything computed while explaining one input.
#[derive(Debug, Clone)]
pub struct Explanation {
    pub class: usize,
    pub scores: Vec<f64>,
    pub predicted: usize,
    pub activation: FeatureTensor,
    pub gradient: ActivationGradient,
    pub weights: ChannelWeights,
    pub heatmap: Heatmap,
    /// Normalized heatmap at input resolution.
    pub upsampled: Array2<f64>,
}

/// Explain `image` for `class`, or for the predicted class when `None`.
pub fn explain(model: &HybridModel, image: &FeatureTensor, class: Option<usize>, path: GradPath) -> Result<Explanation> {
    let (scores, cache) = model.forward_cached(image)?;
    let predicted = crate::hybrid::argmax(&scores);
    let class = class.unwrap_or(predicted);
    let activation = cache.activation;
    let gradient = activation_gradient(model, &activation, class, path)?;
    let weights = channel_weights(&gradient);
    let heatmap = heatmap(&activation, &weights)?;
    let (_, h, w) = image.dim();
    let upsampled = upsample_bilinear(&heatmap.normalized, h, w)?;
    Ok(Explanation { class, scores, predicted, activation, gradient, weights, heatmap, upsampled })
}

#[cfg(test)]
mod tests;
