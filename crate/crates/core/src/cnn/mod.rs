//! Convolutional feature extractor producing the activation maps that the
//! quantum head consumes and that the heatmaps are built from.
//!
//! Each stage is conv → ReLU → optional max-pool. The network output is the
//! post-ReLU activation of the last stage.

mod net;
mod ops;

pub use net::{ConvCache, ConvGrads, ConvNet, ConvStage, StageSpec};
pub(crate) use net::glorot;
pub use ops::{
    conv_backward, conv_forward, maxpool_backward, maxpool_forward, relu_backward, relu_forward, ConvLayerSpec,
    FeatureTensor, PoolCache,
};
