use ndarray::{Array1, Array3, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ops::*;
use crate::{Error, Result};

/// One conv → ReLU → (pool) stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub conv: ConvLayerSpec,
    /// Max-pool window after the ReLU, if any.
    pub pool: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvStage {
    pub spec: StageSpec,
    /// `[out][in][S][S]`
    pub kernels: Array4<f64>,
    pub biases: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvNet {
    pub stages: Vec<ConvStage>,
}

/// Per-stage intermediates recorded by [`ConvNet::forward_cached`].
#[derive(Debug, Clone)]
pub struct ConvCache {
    inputs: Vec<FeatureTensor>,
    pre_relu: Vec<FeatureTensor>,
    pools: Vec<Option<PoolCache>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub kernels: Vec<Array4<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub input: FeatureTensor,
}

/// Uniform in `[−a, a]`, `a = sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> f64 {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.random_range(-a..=a)
}

impl ConvCache {
    /// Whether two passes share every ReLU on/off state and every pool
    /// winner, i.e. lie in the same linear piece of the network.
    pub fn same_region(&self, other: &ConvCache) -> bool {
        self.pools == other.pools
            && self.pre_relu.len() == other.pre_relu.len()
            && self
                .pre_relu
                .iter()
                .zip(&other.pre_relu)
                .all(|(a, b)| a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| (*x > 0.0) == (*y > 0.0)))
    }
}

impl ConvNet {
    /// Three 3×3 "same" stages `C→8→16→32`, pooling by 2 after the first two.
    pub fn default_arch(in_channels: usize) -> Vec<StageSpec> {
        vec![
            StageSpec { conv: ConvLayerSpec::new(in_channels, 8, 3).with_padding(1), pool: Some(2) },
            StageSpec { conv: ConvLayerSpec::new(8, 16, 3).with_padding(1), pool: Some(2) },
            StageSpec { conv: ConvLayerSpec::new(16, 32, 3).with_padding(1), pool: None },
        ]
    }

    /// Glorot-uniform kernels, zero biases.
    pub fn new(specs: &[StageSpec], rng: &mut impl Rng) -> Result<Self> {
        Self::check_chain(specs)?;
        let stages = specs
            .iter()
            .map(|spec| {
                let c = &spec.conv;
                let area = c.kernel * c.kernel;
                let (fan_in, fan_out) = (c.in_channels * area, c.out_channels * area);
                let kernels = Array4::from_shape_simple_fn(c.kernel_shape(), || glorot(rng, fan_in, fan_out));
                ConvStage { spec: *spec, kernels, biases: Array1::zeros(c.out_channels) }
            })
            .collect();
        Ok(ConvNet { stages })
    }

    pub fn seeded(specs: &[StageSpec], seed: u64) -> Result<Self> {
        Self::new(specs, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn check_chain(specs: &[StageSpec]) -> Result<()> {
        if specs.is_empty() {
            return Err(Error::Shape("network needs at least one stage".into()));
        }
        for w in specs.windows(2) {
            if w[0].conv.out_channels != w[1].conv.in_channels {
                return Err(Error::Shape(format!(
                    "stage emits {} channels, next expects {}",
                    w[0].conv.out_channels, w[1].conv.in_channels
                )));
            }
        }
        Ok(())
    }

    pub fn specs(&self) -> Vec<StageSpec> {
        self.stages.iter().map(|s| s.spec).collect()
    }

    pub fn in_channels(&self) -> usize {
        self.stages[0].spec.conv.in_channels
    }

    /// `(K, H, W)` of the final activation map for an input of `(C, H, W)`.
    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        let (c, mut h, mut w) = input;
        if c != self.in_channels() {
            return Err(Error::Shape(format!("input has {c} channels, network expects {}", self.in_channels())));
        }
        for s in &self.stages {
            (h, w) = s.spec.conv.output_dims(h, w)?;
            if let Some(p) = s.spec.pool {
                (h, w) = (h.div_ceil(p), w.div_ceil(p));
            }
        }
        Ok((self.stages.last().expect("non-empty").spec.conv.out_channels, h, w))
    }

    pub fn forward(&self, input: &FeatureTensor) -> Result<FeatureTensor> {
        Ok(self.forward_cached(input)?.0)
    }

    pub fn forward_cached(&self, input: &FeatureTensor) -> Result<(FeatureTensor, ConvCache)> {
        let mut cache = ConvCache { inputs: Vec::new(), pre_relu: Vec::new(), pools: Vec::new() };
        let mut x = input.clone();
        for s in &self.stages {
            let pre = conv_forward(&x, &s.spec.conv, &s.kernels, &s.biases)?;
            let act = relu_forward(&pre);
            cache.inputs.push(x);
            cache.pre_relu.push(pre);
            x = match s.spec.pool {
                Some(win) => {
                    let (pooled, pc) = maxpool_forward(&act, win)?;
                    cache.pools.push(Some(pc));
                    pooled
                }
                None => {
                    cache.pools.push(None);
                    act
                }
            };
        }
        Ok((x, cache))
    }

    /// Reverse-mode gradients given `∂L/∂(network output)`.
    pub fn backward(&self, cache: &ConvCache, grad_out: &FeatureTensor) -> Result<ConvGrads> {
        if cache.inputs.len() != self.stages.len() {
            return Err(Error::MissingCache);
        }
        let mut kernels = Vec::with_capacity(self.stages.len());
        let mut biases = Vec::with_capacity(self.stages.len());
        let mut g = grad_out.clone();
        for (idx, s) in self.stages.iter().enumerate().rev() {
            if let Some(pc) = &cache.pools[idx] {
                g = maxpool_backward(pc, &g)?;
            }
            g = relu_backward(&cache.pre_relu[idx], &g);
            let (d_in, d_w, d_b) = conv_backward(&cache.inputs[idx], &s.spec.conv, &s.kernels, &g)?;
            kernels.push(d_w);
            biases.push(d_b);
            g = d_in;
        }
        kernels.reverse();
        biases.reverse();
        Ok(ConvGrads { kernels, biases, input: g })
    }

    pub fn zero_grads(&self, input_shape: (usize, usize, usize)) -> ConvGrads {
        ConvGrads {
            kernels: self.stages.iter().map(|s| Array4::zeros(s.kernels.dim())).collect(),
            biases: self.stages.iter().map(|s| Array1::zeros(s.biases.len())).collect(),
            input: Array3::zeros(input_shape),
        }
    }
}
