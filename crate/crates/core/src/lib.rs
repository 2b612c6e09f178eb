//! Hybrid CNN → variational-quantum-circuit classifier with class activation
//! heatmaps computed by differentiating quantum expectation values back onto
//! the convolutional activation maps.
//!
//! Module map:
//! - [`quantum`]: dense statevector / density-matrix primitives and Pauli algebra.
//! - [`vqc`]: encoding, ansatz, measurement and the three input-gradient paths.
//! - [`cnn`]: from-scratch convolutional feature extractor with backprop.
//! - [`hybrid`]: the composed model, loss, training and checkpoints.
//! - [`explain`]: channel weights, heatmaps, upsampling and image export.
//! - [`data`]: IDX parsing, synthetic shapes, STFT and the synthetic speech task.
//! - [`gradcheck`]: the oracle-triangle and bracket sweeps used by the CLI.

pub mod cnn;
pub mod data;
pub mod error;
pub mod explain;
pub mod gradcheck;
pub mod hybrid;
pub mod parallel;
pub mod quantum;
pub mod vqc;

pub use error::{Error, Result};
