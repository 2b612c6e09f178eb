//! The composed classifier: CNN features, a linear projection onto the
//! circuit inputs, the variational circuit, and a linear readout.
//!
//! Loss is softmax cross-entropy on the readout scores. Gradients flow
//! through the readout by hand, through the circuit by the shift rule and
//! through the CNN by backprop.

pub mod checkpoint;
mod model;
mod train;

pub use model::{
    argmax, softmax, softmax_cross_entropy, ForwardCache, HybridModel, ModelConfig, ModelGrads, ParamBlock, ParamKind,
};
pub use train::{batch_gradients, evaluate, train, EpochMetrics, Holdout, Optimizer, TrainConfig, TrainOutcome};
