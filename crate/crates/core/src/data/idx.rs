//! IDX container format: big-endian magic `00 00 <type> <rank>`, one
//! big-endian u32 per dimension, then the data in row-major order.

use std::path::Path;

use ndarray::Array3;

use super::dataset::{Dataset, Sample, Split};
use crate::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
/// Rank-3 array of big-endian f64, used for spectrogram datasets.
pub const IMAGES_F64_MAGIC: u32 = 0x0000_0E03;

const TYPE_U8: u8 = 0x08;
const TYPE_F64: u8 = 0x0E;

#[derive(Debug, Clone, PartialEq)]
pub enum IdxData {
    U8(Vec<u8>),
    F64(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: IdxData,
}

impl IdxArray {
    pub fn magic(&self) -> u32 {
        let ty = match self.data {
            IdxData::U8(_) => TYPE_U8,
            IdxData::F64(_) => TYPE_F64,
        };
        u32::from_be_bytes([0, 0, ty, self.dims.len() as u8])
    }
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray> {
    if bytes.len() < 4 {
        return Err(Error::Truncated(format!("{} bytes, header needs 4", bytes.len())));
    }
    let magic = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes"));
    let (ty, rank) = (bytes[2], bytes[3] as usize);
    if bytes[0] != 0 || bytes[1] != 0 || !(ty == TYPE_U8 || ty == TYPE_F64) || rank == 0 {
        return Err(Error::BadMagic { expected: IMAGES_MAGIC, found: magic });
    }
    let header = 4 + 4 * rank;
    if bytes.len() < header {
        return Err(Error::Truncated(format!("{} bytes, header needs {header}", bytes.len())));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    let count: usize = dims.iter().product();
    let width = if ty == TYPE_U8 { 1 } else { 8 };
    let body = &bytes[header..];
    if body.len() < count * width {
        return Err(Error::Truncated(format!("{} data bytes for {dims:?}, need {}", body.len(), count * width)));
    }
    let body = &body[..count * width];
    let data = if ty == TYPE_U8 {
        IdxData::U8(body.to_vec())
    } else {
        IdxData::F64(body.chunks_exact(8).map(|c| f64::from_be_bytes(c.try_into().expect("8 bytes"))).collect())
    };
    Ok(IdxArray { dims, data })
}

pub fn encode_idx(a: &IdxArray) -> Vec<u8> {
    let mut out = a.magic().to_be_bytes().to_vec();
    for &d in &a.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    match &a.data {
        IdxData::U8(v) => out.extend_from_slice(v),
        IdxData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_be_bytes())),
    }
    out
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn expect_magic(a: &IdxArray, expected: &[u32]) -> Result<()> {
    if expected.contains(&a.magic()) {
        Ok(())
    } else {
        Err(Error::BadMagic { expected: expected[0], found: a.magic() })
    }
}

/// Images (`u8` scaled by 1/255, or raw `f64`) and labels as a dataset.
/// Labels are taken as-is as 0-based classes; the class count is one more
/// than the largest label. Sample ids are file positions.
pub fn dataset_from_idx(images: &IdxArray, labels: &IdxArray) -> Result<Dataset> {
    expect_magic(images, &[IMAGES_MAGIC, IMAGES_F64_MAGIC])?;
    expect_magic(labels, &[LABELS_MAGIC])?;
    let (n, h, w) = (images.dims[0], images.dims[1], images.dims[2]);
    let IdxData::U8(label_bytes) = &labels.data else { unreachable!("label magic checked") };
    if labels.dims[0] != n {
        return Err(Error::CountMismatch { images: n, labels: labels.dims[0] });
    }
    let pixel = |i: usize| -> f64 {
        match &images.data {
            IdxData::U8(v) => v[i] as f64 / 255.0,
            IdxData::F64(v) => v[i],
        }
    };
    let classes = label_bytes.iter().copied().max().map_or(0, |m| m as usize + 1);
    let samples = (0..n)
        .map(|k| Sample {
            id: k as u64,
            input: Array3::from_shape_fn((1, h, w), |(_, i, j)| pixel(k * h * w + i * w + j)),
            label: label_bytes[k] as usize,
        })
        .collect();
    Dataset::new(samples, Split::Train, classes)
}

/// Parse an MNIST-style pair of IDX files (`0x803` images, `0x801` labels).
pub fn load_mnist_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let img = parse_idx(&read(images)?)?;
    expect_magic(&img, &[IMAGES_MAGIC])?;
    let lab = parse_idx(&read(labels)?)?;
    expect_magic(&lab, &[LABELS_MAGIC])?;
    dataset_from_idx(&img, &lab)
}

/// Load any image/label IDX pair (u8 or f64 images).
pub fn load_idx_dataset(images: &Path, labels: &Path) -> Result<Dataset> {
    dataset_from_idx(&parse_idx(&read(images)?)?, &parse_idx(&read(labels)?)?)
}

/// IDX encoding of a single-channel dataset. `u8` storage rounds pixels to
/// multiples of 1/255; `f64` storage is exact.
pub fn dataset_to_idx(ds: &Dataset, as_f64: bool) -> Result<(IdxArray, IdxArray)> {
    let (c, h, w) = ds.input_shape().ok_or(Error::EmptyDataset)?;
    if c != 1 {
        return Err(Error::Shape(format!("IDX export needs one channel, got {c}")));
    }
    if ds.classes > 256 {
        return Err(Error::InvalidArgument(format!("{} classes do not fit a u8 label", ds.classes)));
    }
    let pixels = ds.samples.iter().flat_map(|s| s.input.iter().copied());
    let data = if as_f64 {
        IdxData::F64(pixels.collect())
    } else {
        IdxData::U8(pixels.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect())
    };
    let images = IdxArray { dims: vec![ds.len(), h, w], data };
    let labels = IdxArray { dims: vec![ds.len()], data: IdxData::U8(ds.samples.iter().map(|s| s.label as u8).collect()) };
    Ok((images, labels))
}

pub fn write_idx(path: &Path, a: &IdxArray) -> Result<()> {
    std::fs::write(path, encode_idx(a)).map_err(|e| Error::io(path, e))
}

/// Keep samples whose label is in `classes` and relabel them to their
/// position in that list.
pub fn select_classes(ds: &Dataset, classes: &[usize]) -> Result<Dataset> {
    let samples: Vec<Sample> = ds
        .samples
        .iter()
        .filter_map(|s| {
            classes.iter().position(|&c| c == s.label).map(|label| Sample { label, ..s.clone() })
        })
        .collect();
    Dataset::new(samples, ds.split, classes.len())
}
