//! Synthetic stand-in for the noisy-speech detection task: harmonic
//! "utterances" padded with silence, half of them mixed with rotor-like
//! noise, turned into log-magnitude spectrogram images.

use std::path::Path;

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::{Dataset, Sample, Split};
use super::resize::{map_range_to_cells, resize_area};
use super::stft::{stft, StftParams};
use crate::parallel::Execution;
use crate::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
/// One second of audio per sample.
pub const SIGNAL_LEN: usize = SAMPLE_RATE as usize;
pub const DEFAULT_SNR_DB: f64 = 5.0;
/// Spectrogram images are resized to this many rows (frequency) and columns (time).
pub const IMAGE_SIDE: usize = 32;

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `clean + g·noise` with `g` chosen so `10·log10(P_clean / P_(g·noise)) = snr_db`.
/// The noise is tiled or truncated to the clean length.
pub fn mix_noise(clean: &[f64], noise: &[f64], snr_db: f64) -> Result<Vec<f64>> {
    if clean.is_empty() || power(clean) == 0.0 {
        return Err(Error::SilentSignal);
    }
    if noise.is_empty() || power(noise) == 0.0 {
        return Err(Error::InvalidArgument("noise signal is silent".into()));
    }
    let fitted: Vec<f64> = noise.iter().copied().cycle().take(clean.len()).collect();
    let gain = (power(clean) / (power(&fitted) * 10f64.powf(snr_db / 10.0))).sqrt();
    Ok(clean.iter().zip(&fitted).map(|(c, n)| c + gain * n).collect())
}

/// Amplitude-modulated broadband noise: low-passed Gaussian noise under a
/// blade-pass envelope, plus a weak rotor hum. Unit RMS.
pub fn rotor_noise(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let fs = SAMPLE_RATE as f64;
    let blade = rng.random_range(12.0..25.0);
    let hum = rng.random_range(70.0..120.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let depth = rng.random_range(0.5..0.8);
    let mut lp = 0.0;
    let mut out: Vec<f64> = (0..len)
        .map(|t| {
            let w: f64 = StandardNormal.sample(rng);
            lp = 0.55 * lp + 0.45 * w;
            let time = t as f64 / fs;
            let env = 1.0 + depth * (std::f64::consts::TAU * blade * time + phase).sin();
            env * lp + 0.2 * (std::f64::consts::TAU * hum * time).sin()
        })
        .collect();
    let rms = power(&out).sqrt();
    out.iter_mut().for_each(|v| *v /= rms);
    out
}

/// A voiced tone burst inside `SIGNAL_LEN` samples of silence. Returns the
/// signal and the `[start, end)` sample range of the burst.
pub fn synth_utterance(rng: &mut impl Rng) -> (Vec<f64>, (usize, usize)) {
    let fs = SAMPLE_RATE as f64;
    let start = (rng.random_range(0.15..0.35) * fs) as usize;
    let len = (rng.random_range(0.35..0.5) * fs) as usize;
    let f0 = rng.random_range(110.0..220.0);
    let formants = [
        (rng.random_range(450.0..800.0), 120.0, 1.0),
        (rng.random_range(1100.0..2100.0), 180.0, 0.6),
        (rng.random_range(2400.0..3000.0), 250.0, 0.3),
    ];
    let syllables = rng.random_range(2..=3usize);
    let harmonics = (4000.0 / f0) as usize;
    let amps: Vec<f64> = (1..=harmonics)
        .map(|h| {
            let f = h as f64 * f0;
            let env: f64 = formants.iter().map(|&(c, bw, g)| g * (-0.5 * ((f - c) / bw).powi(2)).exp()).sum();
            (0.05 + env) / (h as f64).sqrt()
        })
        .collect();
    let mut signal = vec![0.0; SIGNAL_LEN];
    for t in 0..len {
        let time = t as f64 / fs;
        // syllable envelope: one raised-cosine hump per syllable
        let pos = t as f64 / len as f64 * syllables as f64;
        let env = (std::f64::consts::PI * pos.fract()).sin().powi(2);
        let v: f64 = amps
            .iter()
            .enumerate()
            .map(|(h, a)| a * (std::f64::consts::TAU * (h + 1) as f64 * f0 * time).sin())
            .sum();
        signal[start + t] = env * v;
    }
    let peak = signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    signal.iter_mut().for_each(|v| *v *= 0.5 / peak);
    (signal, (start, start + len))
}

/// `log(1 + |STFT|)`, area-resized to `IMAGE_SIDE²` and min-max scaled to
/// `[0, 1]` (an all-constant image maps to zeros). Row = frequency bin.
pub fn spectrogram_image(signal: &[f64]) -> Result<Array2<f64>> {
    let spec = stft(signal, SAMPLE_RATE, StftParams::default())?;
    let logged = spec.magnitude.mapv(f64::ln_1p);
    let mut img = resize_area(&logged, IMAGE_SIDE, IMAGE_SIDE);
    let (lo, hi) = img.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi > lo {
        img.mapv_inplace(|v| (v - lo) / (hi - lo));
    } else {
        img.fill(0.0);
    }
    Ok(img)
}

/// Image columns whose time span is centred inside the sample range.
pub fn utterance_columns(samples: (usize, usize), signal_len: usize) -> (usize, usize) {
    let p = StftParams::default();
    let frames = super::stft::frame_count(signal_len, p);
    let to_frame = |s: usize| (s as f64 - (p.window / 2) as f64) / p.hop as f64 + 0.5;
    map_range_to_cells(to_frame(samples.0), to_frame(samples.1), frames, IMAGE_SIDE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechTask {
    /// Label 0 = clean, 1 = noisy background. Samples `2p` and `2p+1` share
    /// one utterance.
    pub dataset: Dataset,
    /// Per sample, the `[start, end)` image columns covered by the utterance.
    pub bands: Vec<(usize, usize)>,
}

/// `count` spectrograms; pair `p` (samples `2p`, `2p+1`) draws its
/// utterance and noise from its own stream of `seed`.
pub fn synth_speech_task(count: usize, seed: u64) -> Result<SpeechTask> {
    synth_speech_task_with(count, seed, DEFAULT_SNR_DB, Execution::Sequential)
}

pub fn synth_speech_task_with(count: usize, seed: u64, snr_db: f64, exec: Execution) -> Result<SpeechTask> {
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let pairs = exec.map_range(count.div_ceil(2), |p| -> Result<[(Sample, (usize, usize)); 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p as u64);
        let (clean, span) = synth_utterance(&mut rng);
        let noise = rotor_noise(SIGNAL_LEN, &mut rng);
        let noisy = mix_noise(&clean, &noise, snr_db)?;
        let band = utterance_columns(span, SIGNAL_LEN);
        let make = |signal: &[f64], k: usize| -> Result<(Sample, (usize, usize))> {
            let img = spectrogram_image(signal)?;
            let input = img.into_shape_with_order((1, IMAGE_SIDE, IMAGE_SIDE)).expect("square image");
            Ok((Sample { id: (2 * p + k) as u64, input, label: k }, band))
        };
        Ok([make(&clean, 0)?, make(&noisy, 1)?])
    });
    let mut samples = Vec::with_capacity(count);
    let mut bands = Vec::with_capacity(count);
    for pair in pairs {
        for (s, b) in pair? {
            if samples.len() < count {
                samples.push(s);
                bands.push(b);
            }
        }
    }
    Ok(SpeechTask { dataset: Dataset::new(samples, Split::Train, 2)?, bands })
}

/// Spectrogram image of a WAV file as a one-channel input tensor.
pub fn wav_to_input(path: &Path) -> Result<Array3<f64>> {
    let signal = read_wav(path)?;
    let img = spectrogram_image(&signal)?;
    Ok(img.into_shape_with_order((1, IMAGE_SIDE, IMAGE_SIDE)).expect("square image"))
}

/// 16-bit PCM mono 16 kHz only; samples scaled to `[−1, 1)`.
pub fn read_wav(path: &Path) -> Result<Vec<f64>> {
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.sample_rate != SAMPLE_RATE || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::UnsupportedAudio(format!(
            "{}: {} ch, {} Hz, {}-bit {:?}; need mono 16 kHz 16-bit PCM",
            path.display(),
            spec.channels,
            spec.sample_rate,
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0).map_err(|e| wav_error(path, e)))
        .collect()
}

/// Clamp to `[−1, 1]` and write as 16-bit PCM mono 16 kHz.
pub fn write_wav(path: &Path, signal: &[f64]) -> Result<()> {
    let spec = hound::WavSpec { channels: 1, sample_rate: SAMPLE_RATE, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for v in signal {
        w.write_sample((v.clamp(-1.0, 1.0) * 32767.0).round() as i16).map_err(|e| wav_error(path, e))?;
    }
    w.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::UnsupportedAudio(format!("{}: {other}", path.display())),
    }
}
