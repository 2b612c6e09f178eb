use serde::{Deserialize, Serialize};

use crate::cnn::FeatureTensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Stable identifier, unique within the source the sample came from.
    pub id: u64,
    /// `[channels][height][width]`, entries in `[0, 1]`.
    pub input: FeatureTensor,
    /// 0-based class index.
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub split: Split,
    pub classes: usize,
}

impl Dataset {
    /// Checks labels against `classes` and that all inputs share one shape.
    pub fn new(samples: Vec<Sample>, split: Split, classes: usize) -> Result<Self> {
        let ds = Dataset { samples, split, classes };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.samples.first() else {
            return Err(Error::EmptyDataset);
        };
        let shape = first.input.dim();
        for s in &self.samples {
            if s.label >= self.classes {
                return Err(Error::InvalidLabel { label: s.label, classes: self.classes });
            }
            if s.input.dim() != shape {
                return Err(Error::Shape(format!("sample {} has shape {:?}, dataset uses {shape:?}", s.id, s.input.dim())));
            }
            if s.input.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("sample {} has non-finite entries", s.id)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn input_shape(&self) -> Option<(usize, usize, usize)> {
        self.samples.first().map(|s| s.input.dim())
    }

    /// Samples per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Keep the first `per_class` samples of every class, preserving order.
    pub fn take_per_class(&self, per_class: usize) -> Dataset {
        let mut left = vec![per_class; self.classes];
        let samples = self
            .samples
            .iter()
            .filter(|s| {
                let keep = left[s.label] > 0;
                if keep {
                    left[s.label] -= 1;
                }
                keep
            })
            .cloned()
            .collect();
        Dataset { samples, split: self.split, classes: self.classes }
    }

    /// First `train_per_class` samples of each class for training, the next
    /// `test_per_class` for testing, classes interleaved. Returns `(train, test)`.
    pub fn split_balanced(&self, train_per_class: usize, test_per_class: usize) -> Result<(Dataset, Dataset)> {
        let mut by_class: Vec<Vec<&Sample>> = vec![Vec::new(); self.classes];
        for s in &self.samples {
            by_class[s.label].push(s);
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (c, list) in by_class.iter().enumerate() {
            if list.len() < train_per_class + test_per_class {
                return Err(Error::InvalidArgument(format!(
                    "class {c} has {} samples, need {}",
                    list.len(),
                    train_per_class + test_per_class
                )));
            }
        }
        for i in 0..train_per_class + test_per_class {
            for list in &by_class {
                let s = list[i].clone();
                if i < train_per_class {
                    train.push(s);
                } else {
                    test.push(s);
                }
            }
        }
        Ok((
            Dataset::new(train, Split::Train, self.classes)?,
            Dataset::new(test, Split::Test, self.classes)?,
        ))
    }
}
