use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use qgradcam::hybrid::{self, checkpoint, Holdout, HybridModel, ModelConfig, Optimizer, TrainConfig};
use qgradcam::parallel::Execution;

use crate::datasets::{self, DatasetSource};
use crate::error::{usage, CliError};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// synth-shapes, synth-speech, or a directory with an IDX images/labels pair
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr_classical: Option<f64>,
    #[arg(long)]
    lr_quantum: Option<f64>,
    /// Momentum coefficient; 0 means plain SGD
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the checkpoint and metrics log
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checkpoint path (default: <out>/model.qgcm)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Samples to synthesise for synth-* datasets
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated source labels to keep (IDX datasets), relabelled 1..m in order
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<usize>>,
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    val_per_class: Option<usize>,
    #[arg(long)]
    test_per_class: Option<usize>,
    /// JSON file with any of the options above (snake_case keys); flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Same options as the flags, all optional; used for the config file and, once
/// merged, echoed into the metrics log.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    dataset: Option<String>,
    epochs: Option<usize>,
    batch: Option<usize>,
    lr_classical: Option<f64>,
    lr_quantum: Option<f64>,
    momentum: Option<f64>,
    qubits: Option<usize>,
    blocks: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    count: Option<usize>,
    labels: Option<Vec<usize>>,
    train_per_class: Option<usize>,
    val_per_class: Option<usize>,
    test_per_class: Option<usize>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, Serialize)]
struct Effective {
    dataset: String,
    epochs: usize,
    batch: usize,
    lr_classical: f64,
    lr_quantum: f64,
    momentum: f64,
    qubits: usize,
    blocks: usize,
    seed: u64,
    // output locations stay out of the log so reruns elsewhere match byte for byte
    #[serde(skip)]
    out: PathBuf,
    #[serde(skip)]
    checkpoint: PathBuf,
    count: usize,
    labels: Option<Vec<usize>>,
    train_per_class: usize,
    val_per_class: usize,
    test_per_class: usize,
}

fn read_config(path: &Path) -> Result<TrainFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage("--config", format!("{}: {e}", path.display())))
}

fn resolve(a: TrainArgs) -> Result<(Effective, DatasetSource), CliError> {
    let file = match &a.config {
        Some(p) => read_config(p)?,
        None => TrainFile::default(),
    };
    let dataset = a.dataset.or(file.dataset).ok_or_else(|| usage("--dataset", "required"))?;
    let source = DatasetSource::parse(&dataset)?;
    let defaults = TrainConfig::default();
    let (tr, va, te) = source.default_split();
    let out = a.out.or(file.out).unwrap_or_else(|| PathBuf::from("runs"));
    let checkpoint = a.checkpoint.or(file.checkpoint).unwrap_or_else(|| out.join("model.qgcm"));
    let e = Effective {
        dataset: source.name(),
        epochs: a.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        batch: a.batch.or(file.batch).unwrap_or(source.default_batch()),
        lr_classical: a.lr_classical.or(file.lr_classical).unwrap_or(defaults.lr_classical),
        lr_quantum: a.lr_quantum.or(file.lr_quantum).unwrap_or(defaults.lr_quantum),
        momentum: a.momentum.or(file.momentum).unwrap_or(0.0),
        qubits: a.qubits.or(file.qubits).unwrap_or(8),
        blocks: a.blocks.or(file.blocks).unwrap_or(4),
        seed: a.seed.or(file.seed).unwrap_or(42),
        out,
        checkpoint,
        count: a.count.or(file.count).unwrap_or(2 * (tr + va + te)),
        labels: a.labels.or(file.labels),
        train_per_class: a.train_per_class.or(file.train_per_class).unwrap_or(tr),
        val_per_class: a.val_per_class.or(file.val_per_class).unwrap_or(va),
        test_per_class: a.test_per_class.or(file.test_per_class).unwrap_or(te),
    };
    let positive = [("--epochs", e.epochs), ("--batch", e.batch), ("--qubits", e.qubits), ("--train-per-class", e.train_per_class)];
    for (flag, v) in positive {
        if v == 0 {
            return Err(usage(flag, "must be positive"));
        }
    }
    if e.qubits > 16 {
        return Err(usage("--qubits", format!("{} qubits is beyond the dense simulator", e.qubits)));
    }
    if !(0.0..1.0).contains(&e.momentum) {
        return Err(usage("--momentum", "must lie in [0, 1)"));
    }
    for (flag, v) in [("--lr-classical", e.lr_classical), ("--lr-quantum", e.lr_quantum)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(usage(flag, "must be a non-negative number"));
        }
    }
    Ok((e, source))
}

fn write_line(log: &mut impl Write, value: &serde_json::Value) -> Result<(), CliError> {
    let line = value.to_string();
    println!("{line}");
    writeln!(log, "{line}").map_err(|e| CliError::Usage(format!("metrics log: {e}")))
}

pub fn run(a: TrainArgs) -> Result<(), CliError> {
    let (e, source) = resolve(a)?;
    let pool = datasets::load(&source, e.count, e.seed, e.labels.as_deref())?;
    let (train_set, rest) = pool
        .split_balanced(e.train_per_class, e.val_per_class + e.test_per_class)
        .map_err(|err| usage("--dataset", err))?;
    let (val, test) = if e.val_per_class > 0 && e.test_per_class > 0 {
        let (v, t) = rest.split_balanced(e.val_per_class, e.test_per_class)?;
        (Some(v), Some(t))
    } else if e.val_per_class > 0 {
        (Some(rest), None)
    } else if e.test_per_class > 0 {
        (None, Some(rest))
    } else {
        (None, None)
    };
    let shape = train_set.input_shape().expect("non-empty split");
    let classes = train_set.classes;
    if classes > e.qubits {
        return Err(usage("--qubits", format!("{classes} classes need at least {classes} qubits")));
    }
    let config = ModelConfig::default_for(shape, e.qubits, e.blocks, classes)?;
    let model = HybridModel::new(&config, e.seed)?;
    let train_cfg = TrainConfig {
        epochs: e.epochs,
        batch_size: e.batch,
        lr_classical: e.lr_classical,
        lr_quantum: e.lr_quantum,
        seed: e.seed,
        optimizer: if e.momentum > 0.0 { Optimizer::Momentum { beta: e.momentum } } else { Optimizer::Sgd },
    };

    std::fs::create_dir_all(&e.out).map_err(|err| usage("--out", format!("{}: {err}", e.out.display())))?;
    let metrics_path = e.out.join("metrics.jsonl");
    let file = File::create(&metrics_path).map_err(|err| usage("--out", format!("{}: {err}", metrics_path.display())))?;
    let mut log = BufWriter::new(file);
    write_line(&mut log, &json!({ "event": "config", "config": &e }))?;

    let mut log_err = None;
    let holdout = Holdout { validation: val.as_ref(), test: test.as_ref() };
    let outcome = hybrid::train(&model, &train_set, holdout, &train_cfg, Execution::Parallel, |m| {
        let mut line = serde_json::to_value(m).expect("metrics serialise");
        line.as_object_mut().expect("object").insert("event".into(), json!("epoch"));
        if let Err(err) = write_line(&mut log, &line) {
            log_err.get_or_insert(err);
        }
        eprintln!(
            "epoch {:>3}  loss {:.4}  train acc {:.3}{}{}",
            m.epoch,
            m.loss,
            m.train_accuracy,
            m.val_accuracy.map(|a| format!("  val acc {a:.3}")).unwrap_or_default(),
            m.test_accuracy.map(|a| format!("  test acc {a:.3}")).unwrap_or_default(),
        );
    })?;
    if let Some(err) = log_err {
        return Err(err);
    }
    if let Some(dir) = e.checkpoint.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|err| usage("--checkpoint", format!("{}: {err}", dir.display())))?;
    }
    checkpoint::save(&outcome.model, &e.checkpoint)?;
    let final_train = hybrid::evaluate(&outcome.model, &train_set, Execution::Parallel)?.1;
    let final_test = match &test {
        Some(t) => Some(hybrid::evaluate(&outcome.model, t, Execution::Parallel)?.1),
        None => None,
    };
    write_line(
        &mut log,
        &json!({
            "event": "done",
            "best_epoch": outcome.best_epoch,
            "train_accuracy": final_train,
            "test_accuracy": final_test,
            "consumed_digest": outcome.consumed_digest,
        }),
    )?;
    log.flush().map_err(|err| CliError::Usage(format!("metrics log: {err}")))?;
    eprintln!(
        "saved {} (best epoch {}, train acc {final_train:.3}{})",
        e.checkpoint.display(),
        outcome.best_epoch,
        final_test.map(|a| format!(", test acc {a:.3}")).unwrap_or_default()
    );
    Ok(())
}
