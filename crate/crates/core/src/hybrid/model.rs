use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnn::{ConvCache, ConvNet, FeatureTensor, StageSpec};
use crate::vqc::{run, shift_gradients, Circuit, VqcParams};
use crate::{Error, Result};

/// Everything needed to rebuild a model's shapes, minus the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// `(channels, height, width)` of the images the model accepts.
    pub input_shape: (usize, usize, usize),
    pub stages: Vec<StageSpec>,
    pub circuit: Circuit,
}

impl ModelConfig {
    /// Default CNN, `qubits`-qubit / `blocks`-block classifier circuit with
    /// `classes` outputs.
    pub fn default_for(input_shape: (usize, usize, usize), qubits: usize, blocks: usize, classes: usize) -> Result<Self> {
        Ok(ModelConfig {
            input_shape,
            stages: ConvNet::default_arch(input_shape.0),
            circuit: Circuit::default_classifier(qubits, blocks, classes)?,
        })
    }
}

/// Which learning rate a parameter block uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Classical,
    Quantum,
}

/// `scores = W_m · f_VQC(P · vec(A) + b_P) + b_m` with `A = cnn(image)`.
/// The circuit's arctan scaling turns `P · vec(A) + b_P` into angles.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub input_shape: (usize, usize, usize),
    pub cnn: ConvNet,
    /// `n × (K·H·W)`
    pub projection: Array2<f64>,
    pub projection_bias: Array1<f64>,
    pub circuit: Circuit,
    pub theta: VqcParams,
    /// `m × m`
    pub readout: Array2<f64>,
    pub readout_bias: Array1<f64>,
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) conv: ConvCache,
    /// Tapped activation maps `A`.
    pub activation: FeatureTensor,
    /// Raw circuit inputs `P · vec(A) + b_P`, before arctan.
    pub features: Vec<f64>,
    pub expectations: Vec<f64>,
    pub scores: Vec<f64>,
}

impl ForwardCache {
    /// Same ReLU pattern and pool winners in the CNN as `other`.
    pub fn same_region(&self, other: &ForwardCache) -> bool {
        self.conv.same_region(&other.conv)
    }
}

/// Gradient of the loss for every parameter block, in [`HybridModel::blocks`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub blocks: Vec<Vec<f64>>,
}

impl ModelGrads {
    pub fn zeros_like(model: &HybridModel) -> Self {
        ModelGrads { blocks: model.blocks().iter().map(|b| vec![0.0; b.values.len()]).collect() }
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.blocks.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().flatten().all(|v| v.is_finite())
    }
}

/// A named view of one weight block.
#[derive(Debug, Clone)]
pub struct ParamBlock<'a> {
    pub name: &'static str,
    pub kind: ParamKind,
    pub dims: Vec<usize>,
    pub values: &'a [f64],
}

impl HybridModel {
    /// Random initialisation: Glorot-uniform kernels, projection and readout,
    /// zero biases, θ uniform in `[−π, π)`.
    pub fn new(config: &ModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cnn = ConvNet::new(&config.stages, &mut rng)?;
        let (k, h, w) = cnn.output_shape(config.input_shape)?;
        let d = k * h * w;
        let n = config.circuit.qubits();
        let m = config.circuit.num_outputs();
        let projection = Array2::from_shape_simple_fn((n, d), || crate::cnn::glorot(&mut rng, d, n));
        let theta = VqcParams(
            (0..config.circuit.num_params())
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect(),
        );
        let readout = Array2::from_shape_simple_fn((m, m), || crate::cnn::glorot(&mut rng, m, m));
        HybridModel::from_parts(
            config.input_shape,
            cnn,
            projection,
            Array1::zeros(n),
            config.circuit.clone(),
            theta,
            readout,
            Array1::zeros(m),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        input_shape: (usize, usize, usize),
        cnn: ConvNet,
        projection: Array2<f64>,
        projection_bias: Array1<f64>,
        circuit: Circuit,
        theta: VqcParams,
        readout: Array2<f64>,
        readout_bias: Array1<f64>,
    ) -> Result<Self> {
        let model = HybridModel { input_shape, cnn, projection, projection_bias, circuit, theta, readout, readout_bias };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        let (k, h, w) = self.cnn.output_shape(self.input_shape)?;
        let (n, m) = (self.circuit.qubits(), self.circuit.num_outputs());
        let expect = |what: &str, got: &[usize], want: &[usize]| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Shape(format!("{what} has shape {got:?}, expected {want:?}")))
            }
        };
        expect("projection", self.projection.shape(), &[n, k * h * w])?;
        expect("projection bias", self.projection_bias.shape(), &[n])?;
        expect("theta", &[self.theta.len()], &[self.circuit.num_params()])?;
        expect("readout", self.readout.shape(), &[m, m])?;
        expect("readout bias", self.readout_bias.shape(), &[m])
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig { input_shape: self.input_shape, stages: self.cnn.specs(), circuit: self.circuit.clone() }
    }

    pub fn classes(&self) -> usize {
        self.circuit.num_outputs()
    }

    /// Shape of the tapped activation maps.
    pub fn activation_shape(&self) -> (usize, usize, usize) {
        self.cnn.output_shape(self.input_shape).expect("validated at construction")
    }

    /// Weight blocks in checkpoint order: per CNN stage kernels then biases,
    /// projection, projection bias, θ, readout, readout bias.
    pub fn blocks(&self) -> Vec<ParamBlock<'_>> {
        let mut out = Vec::new();
        for s in &self.cnn.stages {
            out.push(ParamBlock {
                name: "conv.kernels",
                kind: ParamKind::Classical,
                dims: s.kernels.shape().to_vec(),
                values: s.kernels.as_slice().expect("standard layout"),
            });
            out.push(ParamBlock {
                name: "conv.biases",
                kind: ParamKind::Classical,
                dims: s.biases.shape().to_vec(),
                values: s.biases.as_slice().expect("standard layout"),
            });
        }
        out.push(ParamBlock {
            name: "projection",
            kind: ParamKind::Classical,
            dims: self.projection.shape().to_vec(),
            values: self.projection.as_slice().expect("standard layout"),
        });
        out.push(ParamBlock {
            name: "projection.bias",
            kind: ParamKind::Classical,
            dims: self.projection_bias.shape().to_vec(),
            values: self.projection_bias.as_slice().expect("standard layout"),
        });
        out.push(ParamBlock { name: "theta", kind: ParamKind::Quantum, dims: vec![self.theta.len()], values: self.theta.as_slice() });
        out.push(ParamBlock {
            name: "readout",
            kind: ParamKind::Classical,
            dims: self.readout.shape().to_vec(),
            values: self.readout.as_slice().expect("standard layout"),
        });
        out.push(ParamBlock {
            name: "readout.bias",
            kind: ParamKind::Classical,
            dims: self.readout_bias.shape().to_vec(),
            values: self.readout_bias.as_slice().expect("standard layout"),
        });
        out
    }

    /// Mutable slices in the same order as [`HybridModel::blocks`].
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for s in &mut self.cnn.stages {
            out.push(s.kernels.as_slice_mut().expect("standard layout"));
            out.push(s.biases.as_slice_mut().expect("standard layout"));
        }
        out.push(self.projection.as_slice_mut().expect("standard layout"));
        out.push(self.projection_bias.as_slice_mut().expect("standard layout"));
        out.push(&mut self.theta.0);
        out.push(self.readout.as_slice_mut().expect("standard layout"));
        out.push(self.readout_bias.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn forward(&self, image: &FeatureTensor) -> Result<Vec<f64>> {
        Ok(self.forward_cached(image)?.0)
    }

    pub fn forward_cached(&self, image: &FeatureTensor) -> Result<(Vec<f64>, ForwardCache)> {
        if image.dim() != self.input_shape {
            return Err(Error::Shape(format!("image {:?}, model expects {:?}", image.dim(), self.input_shape)));
        }
        let (activation, conv) = self.cnn.forward_cached(image)?;
        let features = self.project(&activation);
        let expectations = run(&features, &self.theta, &self.circuit)?;
        let scores = self.read_out(&expectations);
        let cache = ForwardCache { conv, activation, features, expectations, scores: scores.clone() };
        Ok((scores, cache))
    }

    /// `P · vec(A) + b_P`.
    pub fn project(&self, activation: &FeatureTensor) -> Vec<f64> {
        let flat = Array1::from_iter(activation.iter().copied());
        (self.projection.dot(&flat) + &self.projection_bias).to_vec()
    }

    pub fn read_out(&self, expectations: &[f64]) -> Vec<f64> {
        (self.readout.dot(&Array1::from(expectations.to_vec())) + &self.readout_bias).to_vec()
    }

    /// Class scores from an activation tensor, skipping the CNN.
    pub fn head(&self, activation: &FeatureTensor) -> Result<Vec<f64>> {
        if activation.dim() != self.activation_shape() {
            return Err(Error::Shape(format!("activation {:?}, head expects {:?}", activation.dim(), self.activation_shape())));
        }
        Ok(self.read_out(&run(&self.project(activation), &self.theta, &self.circuit)?))
    }

    /// Loss and all gradients for one labelled sample.
    pub fn backward(&self, cache: &ForwardCache, label: usize) -> Result<(f64, ModelGrads)> {
        let loss = softmax_cross_entropy(&cache.scores, label)?;
        // ∂L/∂scores = softmax − onehot
        let mut d_scores = softmax(&cache.scores);
        d_scores[label] -= 1.0;
        let d_scores = Array1::from(d_scores);

        let expectations = Array1::from(cache.expectations.clone());
        let d_readout = outer(&d_scores, &expectations);
        let d_expect = self.readout_vjp(&d_scores);

        let jac = shift_gradients(&cache.features, &self.theta, &self.circuit)?;
        let d_features = jac.input.t().dot(&d_expect);
        let d_theta = jac.params.t().dot(&d_expect);

        let flat = Array1::from_iter(cache.activation.iter().copied());
        let d_projection = outer(&d_features, &flat);
        let d_activation = Array3::from_shape_vec(cache.activation.dim(), self.projection.t().dot(&d_features).to_vec())
            .expect("projection width matches activation size");
        let conv = self.cnn.backward(&cache.conv, &d_activation)?;

        let mut blocks = Vec::new();
        for (k, b) in conv.kernels.into_iter().zip(conv.biases) {
            blocks.push(k.into_raw_vec_and_offset().0);
            blocks.push(b.to_vec());
        }
        blocks.push(d_projection.into_raw_vec_and_offset().0);
        blocks.push(d_features.to_vec());
        blocks.push(d_theta.to_vec());
        blocks.push(d_readout.into_raw_vec_and_offset().0);
        blocks.push(d_scores.to_vec());
        Ok((loss, ModelGrads { blocks }))
    }

    /// `W_mᵀ · d_scores`
    pub(crate) fn readout_vjp(&self, d_scores: &Array1<f64>) -> Array1<f64> {
        self.readout.t().dot(d_scores)
    }

    /// Index of the largest score; ties go to the lower class.
    pub fn predict(&self, image: &FeatureTensor) -> Result<usize> {
        Ok(argmax(&self.forward(image)?))
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// `−log softmax(scores)[label]`, evaluated as `logsumexp(scores) − scores[label]`.
pub fn softmax_cross_entropy(scores: &[f64], label: usize) -> Result<f64> {
    if label >= scores.len() {
        return Err(Error::InvalidLabel { label, classes: scores.len() });
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    Ok((lse - scores[label]).max(0.0))
}
