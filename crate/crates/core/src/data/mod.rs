//! Datasets: MNIST-style IDX files, synthetic shapes, and a synthetic
//! clean-vs-noisy speech spectrogram task.

mod dataset;
pub mod idx;
pub mod resize;
mod shapes;
pub mod speech;
pub mod stft;

pub use dataset::{Dataset, Sample, Split};
pub use idx::{load_mnist_idx, select_classes};
pub use shapes::{cross_mass, synth_shapes, CROSS_ARMS, SHAPES_SIDE, SQUARE_SIDES};
pub use speech::{mix_noise, synth_speech_task, SpeechTask};
pub use stft::{stft, Spectrogram, StftParams};
