use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::model::{argmax, HybridModel, ModelGrads, ParamKind};
use crate::data::Dataset;
use crate::parallel::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Optimizer {
    Sgd,
    Momentum { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_classical: f64,
    pub lr_quantum: f64,
    /// Drives the per-epoch shuffle.
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 5, batch_size: 16, lr_classical: 0.01, lr_quantum: 0.05, seed: 42, optimizer: Optimizer::Sgd }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.batch_size == 0 {
            return bad("batch size");
        }
        if !(self.lr_classical >= 0.0 && self.lr_quantum >= 0.0) {
            return Err(Error::InvalidArgument("learning rates must be non-negative".into()));
        }
        if let Optimizer::Momentum { beta } = self.optimizer {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::InvalidArgument(format!("momentum {beta} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean loss over the mini-batches seen this epoch.
    pub loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
    /// Reported only; never used for model selection.
    pub test_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// Held-out sets evaluated after every epoch.
#[derive(Debug, Clone, Copy, Default)]
pub struct Holdout<'a> {
    /// Selects the returned model.
    pub validation: Option<&'a Dataset>,
    pub test: Option<&'a Dataset>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Best model by validation accuracy (then loss); the final model if no
    /// validation set was given.
    pub model: HybridModel,
    pub best_epoch: usize,
    pub history: Vec<EpochMetrics>,
    /// SHA-256 over the ids of every sample that contributed a gradient, in
    /// consumption order.
    pub consumed_digest: String,
}

/// Mean loss and accuracy.
pub fn evaluate(model: &HybridModel, data: &Dataset, exec: Execution) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per = exec.map(&data.samples, |s| -> Result<(f64, bool)> {
        let scores = model.forward(&s.input)?;
        Ok((super::softmax_cross_entropy(&scores, s.label)?, argmax(&scores) == s.label))
    });
    let mut loss = 0.0;
    let mut correct = 0usize;
    for r in per {
        let (l, ok) = r?;
        loss += l;
        correct += ok as usize;
    }
    let n = data.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Mean loss and gradients over `indices`, reduced in ascending position.
pub fn batch_gradients(model: &HybridModel, data: &Dataset, indices: &[usize], exec: Execution) -> Result<(f64, ModelGrads)> {
    let per = exec.map(indices, |&i| -> Result<(f64, ModelGrads)> {
        let s = &data.samples[i];
        let (_, cache) = model.forward_cached(&s.input)?;
        model.backward(&cache, s.label)
    });
    let mut total = ModelGrads::zeros_like(model);
    let mut loss = 0.0;
    for r in per {
        let (l, g) = r?;
        loss += l;
        total.add_assign(&g);
    }
    let scale = 1.0 / indices.len() as f64;
    total.scale(scale);
    Ok((loss * scale, total))
}

/// Mini-batch gradient descent on all parameters.
pub fn train(
    model: &HybridModel,
    train_set: &Dataset,
    holdout: Holdout<'_>,
    cfg: &TrainConfig,
    exec: Execution,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    train_set.validate()?;
    if train_set.classes != model.classes() {
        return Err(Error::DimensionMismatch { expected: model.classes(), got: train_set.classes });
    }
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let kinds: Vec<ParamKind> = model.blocks().iter().map(|b| b.kind).collect();
    let mut velocity = ModelGrads::zeros_like(&model);
    let mut hasher = Sha256::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, f64, usize, HybridModel)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            for &i in chunk {
                hasher.update(train_set.samples[i].id.to_le_bytes());
            }
            let (loss, grads) = batch_gradients(&model, train_set, chunk, exec)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::Diverged { epoch, batch: b + 1, what: format!("loss {loss}, finite gradients {}", grads.is_finite()) });
            }
            step(&mut model, &grads, &mut velocity, &kinds, cfg);
            epoch_loss += loss;
            batches += 1;
        }
        let (_, train_accuracy) = evaluate(&model, train_set, exec)?;
        let held = |d: Option<&Dataset>| -> Result<(Option<f64>, Option<f64>)> {
            match d {
                Some(d) => {
                    let (l, a) = evaluate(&model, d, exec)?;
                    Ok((Some(l), Some(a)))
                }
                None => Ok((None, None)),
            }
        };
        let (val_loss, val_accuracy) = held(holdout.validation)?;
        let (test_loss, test_accuracy) = held(holdout.test)?;
        let metrics = EpochMetrics {
            epoch,
            loss: epoch_loss / batches as f64,
            train_accuracy,
            val_loss,
            val_accuracy,
            test_loss,
            test_accuracy,
        };
        on_epoch(&metrics);
        history.push(metrics);
        if let (Some(l), Some(a)) = (val_loss, val_accuracy) {
            let better = match &best {
                None => true,
                Some((ba, bl, _, _)) => a > *ba || (a == *ba && l < *bl),
            };
            if better {
                best = Some((a, l, epoch, model.clone()));
            }
        }
    }
    let consumed_digest = hex(&hasher.finalize());
    let (model, best_epoch) = match best {
        Some((_, _, e, m)) => (m, e),
        None => (model, cfg.epochs),
    };
    Ok(TrainOutcome { model, best_epoch, history, consumed_digest })
}

fn step(model: &mut HybridModel, grads: &ModelGrads, velocity: &mut ModelGrads, kinds: &[ParamKind], cfg: &TrainConfig) {
    for (((params, g), v), kind) in model.blocks_mut().into_iter().zip(&grads.blocks).zip(&mut velocity.blocks).zip(kinds) {
        let lr = match kind {
            ParamKind::Classical => cfg.lr_classical,
            ParamKind::Quantum => cfg.lr_quantum,
        };
        match cfg.optimizer {
            Optimizer::Sgd => params.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g),
            Optimizer::Momentum { beta } => {
                for ((p, g), v) in params.iter_mut().zip(g).zip(v.iter_mut()) {
                    *v = beta * *v + g;
                    *p -= lr * *v;
                }
            }
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
