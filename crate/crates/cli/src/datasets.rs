use std::path::{Path, PathBuf};

use qgradcam::data::{self, Dataset};
use qgradcam::hybrid::TrainConfig;

use crate::error::{usage, CliError};

/// What `--dataset` named.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    SynthShapes,
    SynthSpeech,
    /// Directory holding an images / labels IDX pair.
    Idx(PathBuf),
}

impl DatasetSource {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "synth-shapes" => Ok(DatasetSource::SynthShapes),
            "synth-speech" => Ok(DatasetSource::SynthSpeech),
            path => {
                let p = PathBuf::from(path);
                if p.is_dir() {
                    Ok(DatasetSource::Idx(p))
                } else {
                    Err(usage("--dataset", format!("{path:?} is not synth-shapes, synth-speech or an existing directory")))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSource::SynthShapes => "synth-shapes".into(),
            DatasetSource::SynthSpeech => "synth-speech".into(),
            DatasetSource::Idx(p) => p.display().to_string(),
        }
    }

    /// `(train, validation, test)` samples per class when not overridden.
    pub fn default_split(&self) -> (usize, usize, usize) {
        match self {
            DatasetSource::SynthShapes => (350, 25, 25),
            DatasetSource::SynthSpeech => (150, 25, 25),
            DatasetSource::Idx(_) => (250, 25, 50),
        }
    }

    /// Mini-batch size when not overridden. Square vs cross is not separable
    /// by ink mass, and plain SGD needs the extra steps of small batches.
    pub fn default_batch(&self) -> usize {
        match self {
            DatasetSource::SynthShapes => 2,
            _ => TrainConfig::default().batch_size,
        }
    }
}

/// The images / labels files of an IDX directory: the first files whose
/// names contain `images` / `labels` (sorted), or the classic MNIST names.
pub fn idx_pair(dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| usage("--dataset", format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    let find = |key: &str| {
        names
            .iter()
            .find(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.contains(key) && !n.ends_with(".md")))
            .cloned()
    };
    match (find("images"), find("labels")) {
        (Some(i), Some(l)) => Ok((i, l)),
        _ => Err(usage("--dataset", format!("{} has no *images* / *labels* IDX pair", dir.display()))),
    }
}

/// Load the full pool of samples the splits are drawn from.
pub fn load(source: &DatasetSource, count: usize, seed: u64, classes: Option<&[usize]>) -> Result<Dataset, CliError> {
    let ds = match source {
        DatasetSource::SynthShapes => data::synth_shapes(count, seed)?,
        DatasetSource::SynthSpeech => data::speech::synth_speech_task_with(count, seed, data::speech::DEFAULT_SNR_DB, qgradcam::parallel::Execution::Parallel)?.dataset,
        DatasetSource::Idx(dir) => {
            let (images, labels) = idx_pair(dir)?;
            data::idx::load_idx_dataset(&images, &labels)?
        }
    };
    match classes {
        Some(c) => Ok(data::select_classes(&ds, c)?),
        None => Ok(ds),
    }
}
