use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// In-place iterative radix-2 FFT (`X_k = Σ x_n e^{−2πikn/N}`).
///
/// # Panics
/// If the length is not a power of two.
pub fn fft(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = -2.0 * std::f64::consts::PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = Complex64::from_polar(1.0, step * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Direct `O(N²)` DFT, any length.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Periodic Hann window `0.5·(1 − cos(2πn/N))`.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    /// Power of two.
    pub window: usize,
    pub hop: usize,
}

impl Default for StftParams {
    fn default() -> Self {
        StftParams { window: 256, hop: 128 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// `|X|`, `[window/2 + 1 bins][frames]`.
    pub magnitude: Array2<f64>,
    pub sample_rate: u32,
    pub params: StftParams,
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.magnitude.nrows()
    }

    pub fn frames(&self) -> usize {
        self.magnitude.ncols()
    }
}

/// Frame `f` covers samples `[f·hop, f·hop + window)`; trailing samples that
/// do not fill a frame are dropped.
pub fn frame_count(len: usize, params: StftParams) -> usize {
    if len < params.window {
        0
    } else {
        1 + (len - params.window) / params.hop
    }
}

/// Full complex spectrum of one Hann-windowed frame.
pub fn frame_spectrum(signal: &[f64], start: usize, window: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> =
        window.iter().zip(&signal[start..start + window.len()]).map(|(w, x)| Complex64::new(w * x, 0.0)).collect();
    fft(&mut buf);
    buf
}

pub fn stft(signal: &[f64], sample_rate: u32, params: StftParams) -> Result<Spectrogram> {
    if !params.window.is_power_of_two() || params.hop == 0 {
        return Err(Error::InvalidArgument(format!("window {} must be a power of two and hop {} positive", params.window, params.hop)));
    }
    if signal.len() < params.window {
        return Err(Error::SignalTooShort { len: signal.len(), needed: params.window });
    }
    let window = hann(params.window);
    let frames = frame_count(signal.len(), params);
    let bins = params.window / 2 + 1;
    let mut magnitude = Array2::zeros((bins, frames));
    for f in 0..frames {
        let spec = frame_spectrum(signal, f * params.hop, &window);
        for k in 0..bins {
            magnitude[(k, f)] = spec[k].norm();
        }
    }
    Ok(Spectrogram { magnitude, sample_rate, params })
}
