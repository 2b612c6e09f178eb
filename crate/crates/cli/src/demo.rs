use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use qgradcam::data::{self, idx};
use qgradcam::explain::write_pgm;
use qgradcam::parallel::Execution;

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Shapes,
    Speech,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "demo-data")]
    out: PathBuf,
    /// Also write every sample as `sample-<i>.class<ℓ>.pgm`
    #[arg(long)]
    pgm: bool,
}

pub fn run(a: DemoArgs) -> Result<(), CliError> {
    let ds = match a.kind {
        Kind::Shapes => data::synth_shapes(a.count, a.seed).map_err(|e| usage("--count", e))?,
        Kind::Speech => {
            if a.count == 0 {
                return Err(usage("--count", "must be positive"));
            }
            data::speech::synth_speech_task_with(a.count, a.seed, data::speech::DEFAULT_SNR_DB, Execution::Parallel)?.dataset
        }
    };
    std::fs::create_dir_all(&a.out).map_err(|e| usage("--out", format!("{}: {e}", a.out.display())))?;
    // shapes are binary and survive u8 storage exactly; spectrograms keep f64
    let (images, labels) = idx::dataset_to_idx(&ds, a.kind == Kind::Speech)?;
    let image_path = a.out.join("images-idx3-ubyte");
    let label_path = a.out.join("labels-idx1-ubyte");
    idx::write_idx(&image_path, &images)?;
    idx::write_idx(&label_path, &labels)?;
    if a.pgm {
        for (i, s) in ds.samples.iter().enumerate() {
            let img = s.input.index_axis(ndarray::Axis(0), 0).to_owned();
            write_pgm(&a.out.join(format!("sample-{i:05}.class{}.pgm", s.label + 1)), &img)?;
        }
    }
    let (_, h, w) = ds.input_shape().expect("non-empty");
    println!(
        "{}",
        json!({
            "event": "demo-data",
            "kind": format!("{:?}", a.kind).to_lowercase(),
            "count": ds.len(),
            "class_counts": ds.class_counts(),
            "shape": [h, w],
            "images": image_path,
            "labels": label_path,
        })
    );
    Ok(())
}
