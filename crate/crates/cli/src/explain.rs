use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use qgradcam::data::speech::wav_to_input;
use qgradcam::explain::{self, GradPath};
use qgradcam::hybrid::checkpoint;

use crate::error::{usage, CliError};

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Grayscale image (PGM / PNG) or 16 kHz mono 16-bit WAV
    #[arg(long)]
    input: PathBuf,
    /// Class to explain, 1..m, or "predicted"
    #[arg(long, default_value = "predicted")]
    class: String,
    #[arg(long, default_value = "shift", value_parser = ["shift", "analytic"])]
    grad_path: String,
    /// Output directory (default: current directory)
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn load_input(path: &Path) -> Result<ndarray::Array3<f64>, CliError> {
    let is_wav = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        return wav_to_input(path).map_err(|e| usage("--input", e));
    }
    let img = explain::read_grayscale(path).map_err(|e| usage("--input", e))?;
    let (h, w) = img.dim();
    Ok(img.into_shape_with_order((1, h, w)).expect("same element count"))
}

pub fn run(a: ExplainArgs) -> Result<(), CliError> {
    let model = checkpoint::load(&a.checkpoint).map_err(|e| usage("--checkpoint", e))?;
    let input = load_input(&a.input)?;
    if input.dim() != model.input_shape {
        return Err(usage("--input", format!("shape {:?} does not match the model input {:?}", input.dim(), model.input_shape)));
    }
    let m = model.classes();
    let class = match a.class.as_str() {
        "predicted" => None,
        s => match s.parse::<usize>() {
            Ok(l) if (1..=m).contains(&l) => Some(l - 1),
            _ => return Err(usage("--class", format!("expected 1..={m} or \"predicted\", got {s:?}"))),
        },
    };
    let path: GradPath = a.grad_path.parse()?;
    let ex = explain::explain(&model, &input, class, path)?;
    let stem = a.input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    std::fs::create_dir_all(&a.out).map_err(|e| usage("--out", format!("{}: {e}", a.out.display())))?;
    let base = input.index_axis(ndarray::Axis(0), 0).to_owned();
    let (pgm, png) = explain::export_overlay(&base, &ex.upsampled, &a.out, stem, ex.class + 1)?;
    println!(
        "{}",
        json!({
            "event": "explain",
            "predicted": ex.predicted + 1,
            "class": ex.class + 1,
            "scores": ex.scores,
            "heatmap": pgm,
            "overlay": png,
        })
    );
    eprintln!("predicted class {} (scores {:?}); wrote {} and {}", ex.predicted + 1, ex.scores, pgm.display(), png.display());
    Ok(())
}
